#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>

#include "vtms/conversions.hpp"

namespace vtms {

using std::chrono::milliseconds;
using std::chrono::seconds;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operator presets. Voltages are integer tenths of a volt, temperatures
/// whole degrees; the controller never touches floating point.
struct Settings {
    int temp_alarm_on_c = 40;
    int temp_alarm_off_c = 38;
    int batt_low_tenths = 470;
    int batt_cutoff_tenths = 430;
    seconds battery_phase_s{21600};
    seconds genset_phase_s{21600};
    seconds crank_duration_s{10};
    int crank_attempts_max = 3;
    seconds genset_cooldown_s{30};
    seconds service_interval_s{900000};
    int scan_period_ms = 100;

    friend bool operator==(const Settings&, const Settings&) = default;
};

/// Throws ConfigError naming the first violated invariant.
void validate(const Settings& settings);

struct ControllerInputs {
    bool mains_fail = false;
    bool low_fuel = false;
    bool genset_supply_present = false;
    AdcSample adc_temp{AdcChannel::Temp0, 0};
    AdcSample adc_batt{AdcChannel::Batt1, 0};

    friend bool operator==(const ControllerInputs&, const ControllerInputs&) = default;
};

inline constexpr std::size_t kAlarmCount = 6;

/// The six relay-contact alarms. Member order is the wire and trace order.
struct AlarmSet {
    bool mains_fail = false;
    bool low_fuel = false;
    bool genset_on_load = false;
    bool high_temperature = false;
    bool genset_fault = false;
    bool service_hour = false;

    std::array<bool, kAlarmCount> bits() const {
        return {mains_fail, low_fuel, genset_on_load, high_temperature, genset_fault, service_hour};
    }
    std::size_t active_count() const;

    friend bool operator==(const AlarmSet&, const AlarmSet&) = default;
};

/// snake_case identifiers used for trace columns and JSON keys.
inline constexpr std::array<std::string_view, kAlarmCount> kAlarmKeys = {
    "mains_fail", "low_fuel", "genset_on_load", "high_temperature", "genset_fault", "service_hour"};

enum class ControllerMode { MainsPowered, BatteryPhase, GensetCranking, GensetPhase, GensetCooldown };

std::string_view to_string(ControllerMode mode);

enum class Screen { Main, Settings };

enum class Button { Up, Down, Set, Back };

std::string_view to_string(Button button);
std::optional<Button> button_from_string(std::string_view name);

struct ScreenCursor {
    Screen screen = Screen::Main;
    int field = 0;
    int window_top = 0;
    std::optional<std::int64_t> pending;

    friend bool operator==(const ScreenCursor&, const ScreenCursor&) = default;
};

struct ControllerState {
    ControllerMode mode = ControllerMode::MainsPowered;
    milliseconds phase_elapsed{0};
    int crank_attempt = 0;
    milliseconds crank_elapsed{0};
    milliseconds cooldown_elapsed{0};
    milliseconds genset_runtime_total{0};
    bool temp_alarm_latched = false;
    bool genset_fault_latched = false;
    TemperatureC last_temperature{};
    DisplayVoltage last_battery{};
    AlarmSet last_alarms{};
    Settings settings{};
    ScreenCursor ui{};

    friend bool operator==(const ControllerState&, const ControllerState&) = default;
};

struct LedSet {
    AlarmSet alarms{};
    bool on_battery = false;
    bool on_genset = false;

    friend bool operator==(const LedSet&, const LedSet&) = default;
};

struct ControllerOutputs {
    bool genset_start = false;
    AlarmSet alarms{};
    LedSet leds{};
    bool heartbeat = false;
    bool display_dirty = false;

    friend bool operator==(const ControllerOutputs&, const ControllerOutputs&) = default;
};

struct ScanResult {
    ControllerState state;
    ControllerOutputs outputs;
};

ControllerState controller_init(const Settings& settings, milliseconds persisted_runtime);

/// One pass of the firmware loop: convert ADCs, pick the source, accumulate
/// engine hours, evaluate the alarms, drive the relays.
ScanResult controller_scan(ControllerState state, const ControllerInputs& inputs, milliseconds dt);

ControllerState select_source(ControllerState state, bool mains_fail, int battery_tenths,
                              bool genset_supply_present, milliseconds dt);

AlarmSet evaluate_alarms(const ControllerState& state, const ControllerInputs& inputs,
                         TemperatureC temperature, milliseconds dt);

ControllerState reset_service_hours(ControllerState state);

ControllerState apply_button(ControllerState state, Button button);

/// True for the modes in which the controller closes the genset start relay.
bool genset_commanded(ControllerMode mode);

}  // namespace vtms
