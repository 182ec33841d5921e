#include "vtms/settings_json.hpp"

namespace vtms {

using nlohmann::json;

json settings_to_json(const Settings& s) {
    return json{
        {"temp_alarm_on_c", s.temp_alarm_on_c},
        {"temp_alarm_off_c", s.temp_alarm_off_c},
        {"batt_low_tenths", s.batt_low_tenths},
        {"batt_cutoff_tenths", s.batt_cutoff_tenths},
        {"battery_phase_s", s.battery_phase_s.count()},
        {"genset_phase_s", s.genset_phase_s.count()},
        {"crank_duration_s", s.crank_duration_s.count()},
        {"crank_attempts_max", s.crank_attempts_max},
        {"genset_cooldown_s", s.genset_cooldown_s.count()},
        {"service_interval_s", s.service_interval_s.count()},
        {"scan_period_ms", s.scan_period_ms},
    };
}

Settings settings_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("settings must be a JSON object");
    Settings s;
    auto read = [&](const char* key, auto& field) {
        auto it = j.find(key);
        if (it == j.end()) return;
        if (!it->is_number_integer()) throw ConfigError(std::string("settings.") + key + " must be an integer");
        field = it->template get<std::remove_reference_t<decltype(field)>>();
    };
    auto read_secs = [&](const char* key, seconds& field) {
        long long v = field.count();
        read(key, v);
        field = seconds{v};
    };
    read("temp_alarm_on_c", s.temp_alarm_on_c);
    read("temp_alarm_off_c", s.temp_alarm_off_c);
    read("batt_low_tenths", s.batt_low_tenths);
    read("batt_cutoff_tenths", s.batt_cutoff_tenths);
    read_secs("battery_phase_s", s.battery_phase_s);
    read_secs("genset_phase_s", s.genset_phase_s);
    read_secs("crank_duration_s", s.crank_duration_s);
    read("crank_attempts_max", s.crank_attempts_max);
    read_secs("genset_cooldown_s", s.genset_cooldown_s);
    read_secs("service_interval_s", s.service_interval_s);
    read("scan_period_ms", s.scan_period_ms);
    return s;
}

}  // namespace vtms
