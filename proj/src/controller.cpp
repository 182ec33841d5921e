#include "vtms/controller.hpp"

#include <algorithm>
#include <string>

#include "vtms/presets.hpp"

namespace vtms {

void validate(const Settings& s) {
    auto fail = [](const std::string& what) { throw ConfigError("invalid settings: " + what); };
    if (!(s.temp_alarm_off_c < s.temp_alarm_on_c)) {
        fail("temp_alarm_off_c (" + std::to_string(s.temp_alarm_off_c) +
             ") must be below temp_alarm_on_c (" + std::to_string(s.temp_alarm_on_c) + ")");
    }
    if (s.temp_alarm_off_c < 0 || s.temp_alarm_on_c > kTemperatureMaxC) {
        fail("temperature thresholds must lie within 0..150 C");
    }
    if (!(s.batt_cutoff_tenths < s.batt_low_tenths)) {
        fail("batt_cutoff_tenths (" + std::to_string(s.batt_cutoff_tenths) +
             ") must be below batt_low_tenths (" + std::to_string(s.batt_low_tenths) + ")");
    }
    if (s.batt_cutoff_tenths <= 0 || s.batt_low_tenths > 639) {
        fail("battery thresholds must lie within 0.1..63.9 V");
    }
    if (s.battery_phase_s.count() <= 0) fail("battery_phase_s must be > 0");
    if (s.genset_phase_s.count() <= 0) fail("genset_phase_s must be > 0");
    if (s.crank_duration_s.count() <= 0) fail("crank_duration_s must be > 0");
    if (s.genset_cooldown_s.count() <= 0) fail("genset_cooldown_s must be > 0");
    if (s.service_interval_s.count() <= 0) fail("service_interval_s must be > 0");
    if (s.scan_period_ms <= 0) fail("scan_period_ms must be > 0");
    if (s.crank_attempts_max < 1) fail("crank_attempts_max must be >= 1");
}

std::size_t AlarmSet::active_count() const {
    auto b = bits();
    return static_cast<std::size_t>(std::count(b.begin(), b.end(), true));
}

std::string_view to_string(ControllerMode mode) {
    switch (mode) {
    case ControllerMode::MainsPowered: return "MainsPowered";
    case ControllerMode::BatteryPhase: return "BatteryPhase";
    case ControllerMode::GensetCranking: return "GensetCranking";
    case ControllerMode::GensetPhase: return "GensetPhase";
    case ControllerMode::GensetCooldown: return "GensetCooldown";
    }
    return "?";
}

std::string_view to_string(Button button) {
    switch (button) {
    case Button::Up: return "Up";
    case Button::Down: return "Down";
    case Button::Set: return "Set";
    case Button::Back: return "Back";
    }
    return "?";
}

std::optional<Button> button_from_string(std::string_view name) {
    for (auto b : {Button::Up, Button::Down, Button::Set, Button::Back}) {
        if (to_string(b) == name) return b;
    }
    return std::nullopt;
}

bool genset_commanded(ControllerMode mode) {
    return mode == ControllerMode::GensetCranking || mode == ControllerMode::GensetPhase ||
           mode == ControllerMode::GensetCooldown;
}

ControllerState controller_init(const Settings& settings, milliseconds persisted_runtime) {
    validate(settings);
    if (persisted_runtime.count() < 0) {
        throw ConfigError("persisted service runtime must be >= 0");
    }
    ControllerState state;
    state.settings = settings;
    state.genset_runtime_total = persisted_runtime;
    return state;
}

namespace {

void enter(ControllerState& s, ControllerMode mode) {
    s.mode = mode;
    s.phase_elapsed = milliseconds{0};
    s.crank_attempt = 0;
    s.crank_elapsed = milliseconds{0};
    s.cooldown_elapsed = milliseconds{0};
    if (mode == ControllerMode::MainsPowered) s.genset_fault_latched = false;
}

}  // namespace

ControllerState select_source(ControllerState s, bool mains_fail, int battery_tenths,
                              bool genset_supply_present, milliseconds dt) {
    const Settings& cfg = s.settings;
    const milliseconds battery_phase = cfg.battery_phase_s;
    const milliseconds genset_phase = cfg.genset_phase_s;

    if (!mains_fail) {
        switch (s.mode) {
        case ControllerMode::MainsPowered:
            break;
        case ControllerMode::GensetPhase:
            enter(s, ControllerMode::GensetCooldown);
            break;
        case ControllerMode::GensetCooldown:
            s.cooldown_elapsed += dt;
            if (s.cooldown_elapsed >= milliseconds{cfg.genset_cooldown_s}) {
                enter(s, ControllerMode::MainsPowered);
            }
            break;
        case ControllerMode::BatteryPhase:
        case ControllerMode::GensetCranking:
            enter(s, genset_supply_present ? ControllerMode::GensetCooldown
                                           : ControllerMode::MainsPowered);
            break;
        }
        return s;
    }

    switch (s.mode) {
    case ControllerMode::MainsPowered:
        enter(s, battery_tenths > cfg.batt_low_tenths ? ControllerMode::BatteryPhase
                                                      : ControllerMode::GensetCranking);
        break;

    case ControllerMode::BatteryPhase:
        s.phase_elapsed += dt;
        if (s.genset_fault_latched) {
            // Last resort: ride the battery until mains returns.
            s.phase_elapsed = std::min(s.phase_elapsed, battery_phase);
        } else if (s.phase_elapsed >= battery_phase || battery_tenths <= cfg.batt_low_tenths) {
            enter(s, ControllerMode::GensetCranking);
        }
        break;

    case ControllerMode::GensetCranking:
        s.phase_elapsed += dt;
        s.crank_elapsed += dt;
        if (genset_supply_present) {
            // The genset phase clock keeps running from the first crank.
            s.mode = ControllerMode::GensetPhase;
            s.crank_attempt = 0;
            s.crank_elapsed = milliseconds{0};
        } else if (s.crank_elapsed >= milliseconds{cfg.crank_duration_s}) {
            ++s.crank_attempt;
            s.crank_elapsed = milliseconds{0};
            if (s.crank_attempt >= cfg.crank_attempts_max) {
                enter(s, ControllerMode::BatteryPhase);
                s.genset_fault_latched = true;
            }
        }
        break;

    case ControllerMode::GensetPhase:
        s.phase_elapsed += dt;
        if (!genset_supply_present) {
            enter(s, ControllerMode::BatteryPhase);
            s.genset_fault_latched = true;
        } else if (s.phase_elapsed >= genset_phase) {
            if (battery_tenths > cfg.batt_cutoff_tenths) {
                enter(s, ControllerMode::BatteryPhase);
            } else {
                s.phase_elapsed = genset_phase;
            }
        }
        break;

    case ControllerMode::GensetCooldown:
        enter(s, genset_supply_present ? ControllerMode::GensetPhase
                                       : ControllerMode::GensetCranking);
        break;
    }
    return s;
}

AlarmSet evaluate_alarms(const ControllerState& state, const ControllerInputs& inputs,
                         TemperatureC temperature, milliseconds /*dt*/) {
    const Settings& cfg = state.settings;
    AlarmSet a;
    a.mains_fail = inputs.mains_fail;
    a.low_fuel = inputs.low_fuel;
    a.genset_on_load = inputs.genset_supply_present && inputs.mains_fail;
    if (temperature.celsius >= cfg.temp_alarm_on_c) {
        a.high_temperature = true;
    } else if (temperature.celsius <= cfg.temp_alarm_off_c) {
        a.high_temperature = false;
    } else {
        a.high_temperature = state.temp_alarm_latched;
    }
    a.genset_fault = state.genset_fault_latched;
    a.service_hour = state.genset_runtime_total >= milliseconds{cfg.service_interval_s};
    return a;
}

ScanResult controller_scan(ControllerState state, const ControllerInputs& inputs, milliseconds dt) {
    if (inputs.adc_temp.channel != AdcChannel::Temp0 || inputs.adc_batt.channel != AdcChannel::Batt1) {
        throw ContractViolation("controller_scan: ADC samples carry the wrong channel tags");
    }
    if (dt != milliseconds{state.settings.scan_period_ms}) {
        throw ContractViolation("controller_scan: dt must equal the scan period");
    }

    const ControllerState before = state;

    const TemperatureC temperature = temperature_from_adc(inputs.adc_temp.code);
    DisplayVoltage battery = battery_voltage_from_adc(inputs.adc_batt.code);

    state = select_source(std::move(state), inputs.mains_fail, battery.in_tenths(),
                          inputs.genset_supply_present, dt);

    // Engine hours are counted before the alarm pass so the service alarm
    // asserts on the scan that reaches the interval.
    if (inputs.genset_supply_present) state.genset_runtime_total += dt;

    const AlarmSet alarms = evaluate_alarms(state, inputs, temperature, dt);
    state.temp_alarm_latched = alarms.high_temperature;
    state.last_temperature = temperature;
    state.last_battery = std::move(battery);
    state.last_alarms = alarms;

    ControllerOutputs out;
    out.genset_start = genset_commanded(state.mode);
    out.alarms = alarms;
    out.leds.alarms = alarms;
    out.leds.on_battery = inputs.mains_fail && !inputs.genset_supply_present;
    out.leds.on_genset = inputs.mains_fail && inputs.genset_supply_present;
    out.heartbeat = true;
    out.display_dirty = before.mode != state.mode || before.last_alarms != state.last_alarms ||
                        before.last_battery != state.last_battery ||
                        before.last_temperature != state.last_temperature || before.ui != state.ui;
    return {std::move(state), out};
}

ControllerState reset_service_hours(ControllerState state) {
    state.genset_runtime_total = milliseconds{0};
    return state;
}

ControllerState apply_button(ControllerState state, Button button) {
    ScreenCursor& ui = state.ui;
    const auto fields = preset_fields();
    const int count = static_cast<int>(fields.size());

    if (ui.screen == Screen::Main) {
        if (button == Button::Set) ui = ScreenCursor{Screen::Settings, 0, 0, std::nullopt};
        return state;
    }

    const PresetField& field = fields[static_cast<std::size_t>(ui.field)];
    switch (button) {
    case Button::Up:
    case Button::Down: {
        const std::int64_t current = ui.pending.value_or(field.get(state.settings));
        const std::int64_t next = button == Button::Up ? current + field.step : current - field.step;
        ui.pending = pin_preset(field, state.settings, next);
        break;
    }
    case Button::Set: {
        if (ui.pending) {
            Settings candidate = state.settings;
            field.set(candidate, *ui.pending);
            try {
                validate(candidate);
            } catch (const ConfigError&) {
                ui.pending = pin_preset(field, state.settings, *ui.pending);
                break;
            }
            state.settings = candidate;
            ui.pending.reset();
        }
        ui.field = (ui.field + 1) % count;
        if (ui.field < ui.window_top) ui.window_top = ui.field;
        if (ui.field >= ui.window_top + 3) ui.window_top = ui.field - 2;
        break;
    }
    case Button::Back:
        if (ui.pending) {
            ui.pending.reset();
        } else {
            ui = ScreenCursor{};
        }
        break;
    }
    return state;
}

}  // namespace vtms
