#pragma once

#include <string>
#include <vector>

namespace vtms {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Exhaustive conversion oracle plus the cheap invariant checks. Used by
/// `vtms selftest`.
std::vector<CheckResult> run_selftest();

}  // namespace vtms
