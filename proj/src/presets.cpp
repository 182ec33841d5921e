#include "vtms/presets.hpp"

#include <algorithm>
#include <array>

namespace vtms {

namespace {

constexpr std::int64_t kHour = 3600;

std::int64_t secs(seconds s) { return s.count(); }

const std::array<PresetField, 10> kFields = {{
    {"TEMP ALARM", 'C', 1,
     [](const Settings& s) -> std::int64_t { return s.temp_alarm_on_c; },
     [](Settings& s, std::int64_t v) { s.temp_alarm_on_c = static_cast<int>(v); },
     [](const Settings& s) -> std::int64_t { return s.temp_alarm_off_c + 1; },
     [](const Settings&) -> std::int64_t { return kTemperatureMaxC; }},
    {"TEMP CLEAR", 'C', 1,
     [](const Settings& s) -> std::int64_t { return s.temp_alarm_off_c; },
     [](Settings& s, std::int64_t v) { s.temp_alarm_off_c = static_cast<int>(v); },
     [](const Settings&) -> std::int64_t { return 0; },
     [](const Settings& s) -> std::int64_t { return s.temp_alarm_on_c - 1; }},
    {"BATT LOW", 'V', 1,
     [](const Settings& s) -> std::int64_t { return s.batt_low_tenths; },
     [](Settings& s, std::int64_t v) { s.batt_low_tenths = static_cast<int>(v); },
     [](const Settings& s) -> std::int64_t { return s.batt_cutoff_tenths + 1; },
     [](const Settings&) -> std::int64_t { return 639; }},
    {"BATT CUTOFF", 'V', 1,
     [](const Settings& s) -> std::int64_t { return s.batt_cutoff_tenths; },
     [](Settings& s, std::int64_t v) { s.batt_cutoff_tenths = static_cast<int>(v); },
     [](const Settings&) -> std::int64_t { return 1; },
     [](const Settings& s) -> std::int64_t { return s.batt_low_tenths - 1; }},
    {"BATT PHASE", 'H', kHour,
     [](const Settings& s) { return secs(s.battery_phase_s); },
     [](Settings& s, std::int64_t v) { s.battery_phase_s = seconds{v}; },
     [](const Settings&) -> std::int64_t { return kHour; },
     [](const Settings&) -> std::int64_t { return 99 * kHour; }},
    {"GEN PHASE", 'H', kHour,
     [](const Settings& s) { return secs(s.genset_phase_s); },
     [](Settings& s, std::int64_t v) { s.genset_phase_s = seconds{v}; },
     [](const Settings&) -> std::int64_t { return kHour; },
     [](const Settings&) -> std::int64_t { return 99 * kHour; }},
    {"SERVICE INT", 'H', kHour,
     [](const Settings& s) { return secs(s.service_interval_s); },
     [](Settings& s, std::int64_t v) { s.service_interval_s = seconds{v}; },
     [](const Settings&) -> std::int64_t { return kHour; },
     [](const Settings&) -> std::int64_t { return 9999 * kHour; }},
    {"CRANK TIME", 'S', 1,
     [](const Settings& s) { return secs(s.crank_duration_s); },
     [](Settings& s, std::int64_t v) { s.crank_duration_s = seconds{v}; },
     [](const Settings&) -> std::int64_t { return 1; },
     [](const Settings&) -> std::int64_t { return 60; }},
    {"CRANK TRIES", ' ', 1,
     [](const Settings& s) -> std::int64_t { return s.crank_attempts_max; },
     [](Settings& s, std::int64_t v) { s.crank_attempts_max = static_cast<int>(v); },
     [](const Settings&) -> std::int64_t { return 1; },
     [](const Settings&) -> std::int64_t { return 9; }},
    {"COOLDOWN", 'S', 1,
     [](const Settings& s) { return secs(s.genset_cooldown_s); },
     [](Settings& s, std::int64_t v) { s.genset_cooldown_s = seconds{v}; },
     [](const Settings&) -> std::int64_t { return 1; },
     [](const Settings&) -> std::int64_t { return 600; }},
}};

}  // namespace

std::span<const PresetField> preset_fields() { return kFields; }

std::string format_preset_value(const PresetField& field, std::int64_t raw) {
    switch (field.unit) {
    case 'V':
        return std::to_string(raw / 10) + "." + std::to_string(raw % 10);
    case 'H':
        return std::to_string(raw / kHour);
    default:
        return std::to_string(raw);
    }
}

std::int64_t pin_preset(const PresetField& field, const Settings& settings, std::int64_t raw) {
    return std::clamp(raw, field.lower(settings), field.upper(settings));
}

}  // namespace vtms
