#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "vtms/controller.hpp"

namespace vtms {

/// What survives a restart: the EEPROM analog of the unit.
struct PersistedCounters {
    milliseconds service_runtime{0};
    std::optional<Settings> settings;

    friend bool operator==(const PersistedCounters&, const PersistedCounters&) = default;
};

std::string to_json_text(const PersistedCounters& counters);
/// Throws ConfigError on malformed text or invalid settings.
PersistedCounters counters_from_json_text(const std::string& text);

/// Small state file, replaced atomically on each write. Unreadable or
/// corrupt files restore defaults with a logged warning.
class CounterStore {
public:
    explicit CounterStore(std::filesystem::path path);

    const std::filesystem::path& path() const { return path_; }

    PersistedCounters restore() const;
    void persist(const PersistedCounters& counters);

private:
    std::filesystem::path path_;
    std::optional<PersistedCounters> last_written_;
};

}  // namespace vtms
