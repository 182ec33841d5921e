#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "vtms/controller.hpp"

namespace vtms {

/// One editable line of the settings screen. Raw values are in the Settings
/// storage unit (degC, tenths of a volt, seconds, count).
struct PresetField {
    std::string_view label;
    char unit;
    std::int64_t step;
    std::int64_t (*get)(const Settings&);
    void (*set)(Settings&, std::int64_t);
    std::int64_t (*lower)(const Settings&);
    std::int64_t (*upper)(const Settings&);
};

std::span<const PresetField> preset_fields();

/// Value text as the LCD shows it: "40", "47.0", "6" (hours).
std::string format_preset_value(const PresetField& field, std::int64_t raw);

std::int64_t pin_preset(const PresetField& field, const Settings& settings, std::int64_t raw);

}  // namespace vtms
