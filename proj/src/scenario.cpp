#include "vtms/scenario.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace vtms {

namespace {

constexpr std::array<EventKind, 11> kKinds = {
    EventKind::MainsOn,          EventKind::MainsOff,         EventKind::SetFuel,
    EventKind::InjectGensetFault, EventKind::ClearGensetFault, EventKind::SetAmbient,
    EventKind::HangController,   EventKind::ResumeController, EventKind::SetTrimmerGain,
    EventKind::PressButton,      EventKind::ResetServiceHours,
};

int line_of(const YAML::Node& node) {
    const auto mark = node.Mark();
    return mark.line < 0 ? 0 : mark.line + 1;
}

[[noreturn]] void fail(const YAML::Node& node, const std::string& message) {
    throw ScenarioError(message, line_of(node));
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
    if (!node.IsScalar()) fail(node, "'" + key + "' must be a scalar");
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        fail(node, "'" + key + "' has an invalid value '" + node.Scalar() + "'");
    }
}

milliseconds seconds_to_ms(const YAML::Node& node, const std::string& key) {
    const double s = scalar<double>(node, key);
    if (!std::isfinite(s)) fail(node, "'" + key + "' must be finite");
    return milliseconds{std::llround(s * 1000.0)};
}

void require_map(const YAML::Node& node, const std::string& what) {
    if (!node.IsMap()) fail(node, "'" + what + "' must be a mapping");
}

SettingsOverrides parse_settings(const YAML::Node& node) {
    require_map(node, "settings");
    SettingsOverrides o;
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        const YAML::Node& v = kv.second;
        auto secs = [&] { return seconds{scalar<long long>(v, key)}; };
        if (key == "temp_alarm_on_c") o.temp_alarm_on_c = scalar<int>(v, key);
        else if (key == "temp_alarm_off_c") o.temp_alarm_off_c = scalar<int>(v, key);
        else if (key == "batt_low_tenths") o.batt_low_tenths = scalar<int>(v, key);
        else if (key == "batt_cutoff_tenths") o.batt_cutoff_tenths = scalar<int>(v, key);
        else if (key == "battery_phase_s") o.battery_phase_s = secs();
        else if (key == "genset_phase_s") o.genset_phase_s = secs();
        else if (key == "crank_duration_s") o.crank_duration_s = secs();
        else if (key == "crank_attempts_max") o.crank_attempts_max = scalar<int>(v, key);
        else if (key == "genset_cooldown_s") o.genset_cooldown_s = secs();
        else if (key == "service_interval_s") o.service_interval_s = secs();
        else if (key == "scan_period_ms") o.scan_period_ms = scalar<int>(v, key);
        else fail(kv.first, "unknown settings key '" + key + "'");
    }
    return o;
}

PlantParams parse_plant(const YAML::Node& node) {
    require_map(node, "plant");
    PlantParams p;
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        const YAML::Node& v = kv.second;
        auto num = [&] { return scalar<double>(v, key); };
        if (key == "battery_capacity_wh") p.battery_capacity_wh = num();
        else if (key == "site_load_w") p.site_load_w = num();
        else if (key == "charge_power_w") p.charge_power_w = num();
        else if (key == "internal_resistance_ohm") p.internal_resistance_ohm = num();
        else if (key == "fuel_capacity_l") p.fuel_capacity_l = num();
        else if (key == "fuel_burn_lph") p.fuel_burn_lph = num();
        else if (key == "low_fuel_fraction") p.low_fuel_fraction = num();
        else if (key == "genset_start_delay_s") p.genset_start_delay_s = num();
        else if (key == "ambient_c") p.ambient_c = num();
        else if (key == "room_thermal_capacity_j_per_c") p.room_thermal_capacity_j_per_c = num();
        else if (key == "heat_load_w") p.heat_load_w = num();
        else if (key == "cooling_coeff_w_per_c") p.cooling_coeff_w_per_c = num();
        else if (key == "trimmer_gain") p.trimmer_gain = num();
        else if (key == "initial_soc") p.initial_soc = num();
        else if (key == "initial_fuel_l") p.initial_fuel_l = num();
        else if (key == "initial_room_temp_c") p.initial_room_temp_c = num();
        else if (key == "temp_adc_dither_counts") p.temp_adc_dither_counts = scalar<int>(v, key);
        else if (key == "ocv_table") {
            if (!v.IsSequence()) fail(v, "'ocv_table' must be a list of [soc, volts] pairs");
            p.ocv_table.clear();
            for (const auto& point : v) {
                if (!point.IsSequence() || point.size() != 2) {
                    fail(point, "'ocv_table' entries must be [soc, volts] pairs");
                }
                p.ocv_table.push_back({scalar<double>(point[0], "soc"), scalar<double>(point[1], "volts")});
            }
        } else {
            fail(kv.first, "unknown plant key '" + key + "'");
        }
    }
    return p;
}

ScenarioEvent parse_event(const YAML::Node& node, std::size_t index) {
    const std::string where = "events[" + std::to_string(index) + "]";
    require_map(node, where);
    ScenarioEvent e;
    bool have_t = false;
    bool have_kind = false;
    std::optional<YAML::Node> value_node;
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (key == "t_s") {
            e.t = seconds_to_ms(kv.second, where + ".t_s");
            have_t = true;
        } else if (key == "kind") {
            const auto name = scalar<std::string>(kv.second, where + ".kind");
            auto kind = event_kind_from_string(name);
            if (!kind) {
                fail(kv.second, "unknown event kind '" + name + "'; valid kinds: " + valid_event_kinds_list());
            }
            e.kind = *kind;
            have_kind = true;
        } else if (key == "value") {
            value_node = kv.second;
        } else {
            fail(kv.first, "unknown event key '" + key + "'");
        }
    }
    if (!have_t) fail(node, where + " is missing 't_s'");
    if (!have_kind) fail(node, where + " is missing 'kind'");

    const PayloadKind payload = payload_kind(e.kind);
    if (payload == PayloadKind::None && value_node) {
        fail(*value_node, where + ": " + std::string(to_string(e.kind)) + " takes no value");
    }
    if (payload != PayloadKind::None && !value_node) {
        fail(node, where + ": " + std::string(to_string(e.kind)) + " requires a value");
    }
    if (payload == PayloadKind::Number) {
        e.value = scalar<double>(*value_node, where + ".value");
        if (e.kind == EventKind::SetFuel && e.value < 0.0) fail(*value_node, "fuel must be >= 0");
        if (e.kind == EventKind::SetAmbient && e.value < 0.0) fail(*value_node, "ambient must be >= 0");
        if (e.kind == EventKind::SetTrimmerGain && !(e.value > 0.0)) {
            fail(*value_node, "trimmer gain must be > 0");
        }
    } else if (payload == PayloadKind::Button) {
        const auto name = scalar<std::string>(*value_node, where + ".value");
        auto button = button_from_string(name);
        if (!button) fail(*value_node, "unknown button '" + name + "'; valid buttons: Up, Down, Set, Back");
        e.button = *button;
    }
    return e;
}

}  // namespace

std::string_view to_string(EventKind kind) {
    switch (kind) {
    case EventKind::MainsOn: return "MainsOn";
    case EventKind::MainsOff: return "MainsOff";
    case EventKind::SetFuel: return "SetFuel";
    case EventKind::InjectGensetFault: return "InjectGensetFault";
    case EventKind::ClearGensetFault: return "ClearGensetFault";
    case EventKind::SetAmbient: return "SetAmbient";
    case EventKind::HangController: return "HangController";
    case EventKind::ResumeController: return "ResumeController";
    case EventKind::SetTrimmerGain: return "SetTrimmerGain";
    case EventKind::PressButton: return "PressButton";
    case EventKind::ResetServiceHours: return "ResetServiceHours";
    }
    return "?";
}

std::optional<EventKind> event_kind_from_string(std::string_view name) {
    for (auto k : kKinds) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

std::span<const EventKind> all_event_kinds() { return kKinds; }

std::string valid_event_kinds_list() {
    std::string out;
    for (auto k : kKinds) {
        if (!out.empty()) out += ", ";
        out += to_string(k);
    }
    return out;
}

PayloadKind payload_kind(EventKind kind) {
    switch (kind) {
    case EventKind::SetFuel:
    case EventKind::SetAmbient:
    case EventKind::SetTrimmerGain:
        return PayloadKind::Number;
    case EventKind::PressButton:
        return PayloadKind::Button;
    default:
        return PayloadKind::None;
    }
}

std::optional<PlantEventKind> as_plant_event(EventKind kind) {
    switch (kind) {
    case EventKind::MainsOn: return PlantEventKind::MainsOn;
    case EventKind::MainsOff: return PlantEventKind::MainsOff;
    case EventKind::SetFuel: return PlantEventKind::SetFuel;
    case EventKind::InjectGensetFault: return PlantEventKind::InjectGensetFault;
    case EventKind::ClearGensetFault: return PlantEventKind::ClearGensetFault;
    case EventKind::SetAmbient: return PlantEventKind::SetAmbient;
    case EventKind::HangController: return PlantEventKind::HangController;
    case EventKind::ResumeController: return PlantEventKind::ResumeController;
    case EventKind::SetTrimmerGain: return PlantEventKind::SetTrimmerGain;
    case EventKind::PressButton:
    case EventKind::ResetServiceHours:
        return std::nullopt;
    }
    return std::nullopt;
}

Settings SettingsOverrides::applied_to(Settings s) const {
    if (temp_alarm_on_c) s.temp_alarm_on_c = *temp_alarm_on_c;
    if (temp_alarm_off_c) s.temp_alarm_off_c = *temp_alarm_off_c;
    if (batt_low_tenths) s.batt_low_tenths = *batt_low_tenths;
    if (batt_cutoff_tenths) s.batt_cutoff_tenths = *batt_cutoff_tenths;
    if (battery_phase_s) s.battery_phase_s = *battery_phase_s;
    if (genset_phase_s) s.genset_phase_s = *genset_phase_s;
    if (crank_duration_s) s.crank_duration_s = *crank_duration_s;
    if (crank_attempts_max) s.crank_attempts_max = *crank_attempts_max;
    if (genset_cooldown_s) s.genset_cooldown_s = *genset_cooldown_s;
    if (service_interval_s) s.service_interval_s = *service_interval_s;
    if (scan_period_ms) s.scan_period_ms = *scan_period_ms;
    return s;
}

ScenarioError::ScenarioError(const std::string& message, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

void validate(const Scenario& sc, const Settings& effective) {
    try {
        validate(effective);
        validate(sc.plant);
    } catch (const ConfigError& e) {
        throw ScenarioError(e.what(), 0);
    }
    if (sc.duration.count() <= 0) throw ScenarioError("duration_s must be > 0", 0);
    if (sc.tick != milliseconds{effective.scan_period_ms}) {
        throw ScenarioError("tick_ms (" + std::to_string(sc.tick.count()) +
                                ") must equal settings.scan_period_ms (" +
                                std::to_string(effective.scan_period_ms) + ")",
                            0);
    }
    milliseconds previous{0};
    for (std::size_t i = 0; i < sc.events.size(); ++i) {
        const auto& e = sc.events[i];
        const std::string where = "events[" + std::to_string(i) + "]";
        if (e.t.count() < 0) throw ScenarioError(where + ": t_s must be >= 0", 0);
        if (e.t > sc.duration) throw ScenarioError(where + ": t_s beyond duration_s", 0);
        if (e.t < previous) throw ScenarioError(where + ": events must be sorted by t_s", 0);
        previous = e.t;
    }
}

Scenario load_scenario(std::string_view text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw ScenarioError("parse error: " + e.msg, e.mark.line + 1);
    }
    if (!root.IsMap()) throw ScenarioError("scenario must be a mapping of top-level keys", line_of(root));

    Scenario sc;
    bool have_name = false;
    bool have_duration = false;
    std::optional<milliseconds> tick;
    for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        const YAML::Node& v = kv.second;
        if (key == "name") {
            sc.name = scalar<std::string>(v, key);
            have_name = true;
        } else if (key == "duration_s") {
            sc.duration = seconds_to_ms(v, key);
            have_duration = true;
        } else if (key == "tick_ms") {
            tick = milliseconds{scalar<long long>(v, key)};
        } else if (key == "settings") {
            sc.settings_overrides = parse_settings(v);
        } else if (key == "plant") {
            sc.plant = parse_plant(v);
        } else if (key == "events") {
            if (!v.IsSequence()) fail(v, "'events' must be a list");
            for (std::size_t i = 0; i < v.size(); ++i) {
                sc.events.push_back(parse_event(v[i], i));
                if (have_duration && sc.events.back().t > sc.duration) {
                    fail(v[i], "events[" + std::to_string(i) + "]: t_s beyond duration_s");
                }
                if (i > 0 && sc.events[i].t < sc.events[i - 1].t) {
                    fail(v[i], "events[" + std::to_string(i) + "]: events must be sorted by t_s");
                }
            }
        } else {
            fail(kv.first, "unknown top-level key '" + key + "'");
        }
    }
    if (!have_name) throw ScenarioError("missing required key 'name'", line_of(root));
    if (!have_duration) throw ScenarioError("missing required key 'duration_s'", line_of(root));

    const Settings effective = sc.settings();
    sc.tick = tick.value_or(milliseconds{effective.scan_period_ms});
    validate(sc, effective);
    return sc;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file '" + path.string() + "'", 0);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_scenario(buf.str());
}

}  // namespace vtms
