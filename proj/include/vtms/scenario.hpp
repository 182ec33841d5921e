#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vtms/controller.hpp"
#include "vtms/plant.hpp"

namespace vtms {

/// Everything a scenario script (or an operator command) can do to the
/// running simulation. The plant kinds map one-to-one onto PlantEventKind.
enum class EventKind {
    MainsOn,
    MainsOff,
    SetFuel,
    InjectGensetFault,
    ClearGensetFault,
    SetAmbient,
    HangController,
    ResumeController,
    SetTrimmerGain,
    PressButton,
    ResetServiceHours,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(std::string_view name);
std::span<const EventKind> all_event_kinds();
std::string valid_event_kinds_list();

enum class PayloadKind { None, Number, Button };
PayloadKind payload_kind(EventKind kind);

std::optional<PlantEventKind> as_plant_event(EventKind kind);

struct ScenarioEvent {
    milliseconds t{0};
    EventKind kind = EventKind::MainsOn;
    double value = 0.0;
    Button button = Button::Set;

    friend bool operator==(const ScenarioEvent&, const ScenarioEvent&) = default;
};

/// Partial Settings: only the fields present in a scenario file.
struct SettingsOverrides {
    std::optional<int> temp_alarm_on_c;
    std::optional<int> temp_alarm_off_c;
    std::optional<int> batt_low_tenths;
    std::optional<int> batt_cutoff_tenths;
    std::optional<seconds> battery_phase_s;
    std::optional<seconds> genset_phase_s;
    std::optional<seconds> crank_duration_s;
    std::optional<int> crank_attempts_max;
    std::optional<seconds> genset_cooldown_s;
    std::optional<seconds> service_interval_s;
    std::optional<int> scan_period_ms;

    Settings applied_to(Settings base) const;
};

struct Scenario {
    std::string name;
    milliseconds duration{0};
    milliseconds tick{100};
    SettingsOverrides settings_overrides;
    PlantParams plant;
    std::vector<ScenarioEvent> events;

    Settings settings() const { return settings_overrides.applied_to(Settings{}); }
};

/// Malformed or invalid scenario text. line is 1-based, 0 when unknown.
class ScenarioError : public std::runtime_error {
public:
    ScenarioError(const std::string& message, int line);
    int line() const { return line_; }

private:
    int line_;
};

/// Parses and validates a scenario document (YAML; JSON is accepted too).
Scenario load_scenario(std::string_view text);
Scenario load_scenario_file(const std::filesystem::path& path);

/// Checks the cross-field invariants; throws ScenarioError.
void validate(const Scenario& scenario, const Settings& effective_settings);

}  // namespace vtms
