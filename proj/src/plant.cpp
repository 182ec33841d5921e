#include "vtms/plant.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "vtms/log.hpp"

namespace vtms {

namespace {

std::string shortest(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc{} ? std::string(buf, end) : std::to_string(v);
}

}  // namespace

void validate(const PlantParams& p) {
    auto fail = [](const std::string& what) { throw ConfigError("invalid plant parameters: " + what); };
    auto positive = [&](double v, const char* name) {
        if (!(v > 0.0)) fail(std::string(name) + " must be > 0");
    };
    positive(p.battery_capacity_wh, "battery_capacity_wh");
    positive(p.site_load_w, "site_load_w");
    positive(p.charge_power_w, "charge_power_w");
    positive(p.internal_resistance_ohm, "internal_resistance_ohm");
    positive(p.fuel_capacity_l, "fuel_capacity_l");
    positive(p.fuel_burn_lph, "fuel_burn_lph");
    positive(p.genset_start_delay_s, "genset_start_delay_s");
    positive(p.room_thermal_capacity_j_per_c, "room_thermal_capacity_j_per_c");
    positive(p.heat_load_w, "heat_load_w");
    positive(p.cooling_coeff_w_per_c, "cooling_coeff_w_per_c");
    positive(p.trimmer_gain, "trimmer_gain");
    if (!(p.low_fuel_fraction > 0.0 && p.low_fuel_fraction < 1.0)) {
        fail("low_fuel_fraction must lie strictly between 0 and 1");
    }
    const auto& t = p.ocv_table;
    if (t.size() < 2) fail("ocv_table needs at least two breakpoints");
    if (t.front().soc != 0.0 || t.back().soc != 1.0) fail("ocv_table must cover soc 0..1");
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (!(t[i].soc > t[i - 1].soc) || !(t[i].volts > t[i - 1].volts)) {
            fail("ocv_table must be strictly increasing in both soc and volts");
        }
    }
    if (!(p.initial_soc >= 0.0 && p.initial_soc <= 1.0)) fail("initial_soc must lie within 0..1");
    if (p.initial_fuel_l && !(*p.initial_fuel_l >= 0.0 && *p.initial_fuel_l <= p.fuel_capacity_l)) {
        fail("initial_fuel_l must lie within 0..fuel_capacity_l");
    }
    if (p.initial_room_temp_c && !(*p.initial_room_temp_c >= 0.0)) fail("initial_room_temp_c must be >= 0");
    if (!(p.ambient_c >= 0.0)) fail("ambient_c must be >= 0");
    if (p.temp_adc_dither_counts < 0) fail("temp_adc_dither_counts must be >= 0");
}

std::string_view to_string(GensetStatus status) {
    switch (status) {
    case GensetStatus::Off: return "Off";
    case GensetStatus::Starting: return "Starting";
    case GensetStatus::Running: return "Running";
    case GensetStatus::FaultInjected: return "FaultInjected";
    }
    return "?";
}

PlantState plant_initial_state(const PlantParams& params) {
    PlantState s;
    s.soc = params.initial_soc;
    s.fuel_l = params.initial_fuel_l.value_or(params.fuel_capacity_l);
    s.ambient_c = params.ambient_c;
    s.room_temp_c = params.initial_room_temp_c.value_or(params.ambient_c);
    s.trimmer_gain = params.trimmer_gain;
    return s;
}

double ocv_from_soc(double soc, const PlantParams& params) {
    const auto& t = params.ocv_table;
    soc = std::clamp(soc, 0.0, 1.0);
    auto hi = std::upper_bound(t.begin(), t.end(), soc,
                               [](double v, const OcvPoint& p) { return v < p.soc; });
    if (hi == t.end()) return t.back().volts;
    if (hi == t.begin()) return t.front().volts;
    auto lo = std::prev(hi);
    const double f = (soc - lo->soc) / (hi->soc - lo->soc);
    return lo->volts + f * (hi->volts - lo->volts);
}

double battery_terminal_voltage(double soc, bool discharging, const PlantParams& params) {
    if (soc < 0.0 || soc > 1.0) throw ContractViolation("battery_terminal_voltage: soc outside 0..1");
    const double ocv = ocv_from_soc(soc, params);
    if (!discharging) return ocv;
    const double current = params.site_load_w / ocv;
    return ocv - current * params.internal_resistance_ohm;
}

AdcSample adc_from_battery_voltage(double volts, double trimmer_gain) {
    if (!(volts >= 0.0)) throw ContractViolation("adc_from_battery_voltage: volts must be >= 0");
    const long code = std::lround(volts * 16.0 * trimmer_gain);
    return {AdcChannel::Batt1, static_cast<int>(std::clamp(code, 0L, static_cast<long>(kAdcMaxCode)))};
}

AdcSample adc_from_temperature(double celsius) {
    if (!(celsius >= 0.0)) throw ContractViolation("adc_from_temperature: celsius must be >= 0");
    const long code = std::lround(celsius * 1024.0 / 500.0);
    return {AdcChannel::Temp0, static_cast<int>(std::clamp(code, 0L, static_cast<long>(kAdcMaxCode)))};
}

PlantStepResult plant_step(PlantState s, const PlantParams& p, bool genset_cmd, milliseconds dt) {
    if (dt.count() <= 0) throw ContractViolation("plant_step: dt must be > 0");
    const double dt_s = static_cast<double>(dt.count()) / 1000.0;
    const double dt_h = dt_s / 3600.0;

    // Genset sequencing.
    GensetState& g = s.genset;
    if (g.status != GensetStatus::FaultInjected) {
        if (!genset_cmd) {
            g = GensetState{};
        } else if (g.status == GensetStatus::Off && s.fuel_l > 0.0) {
            g = GensetState{GensetStatus::Starting, milliseconds{0}};
        }
        if (g.status == GensetStatus::Starting) {
            g.starting_elapsed += dt;
            if (static_cast<double>(g.starting_elapsed.count()) >= p.genset_start_delay_s * 1000.0) {
                g = GensetState{GensetStatus::Running, milliseconds{0}};
            }
        }
    }

    if (g.status == GensetStatus::Running) {
        s.fuel_l -= p.fuel_burn_lph * dt_h;
        if (s.fuel_l <= 0.0) {
            s.fuel_l = 0.0;
            g = GensetState{};
        }
    }

    s.supply = s.mains_on                           ? SupplySource::Mains
               : g.status == GensetStatus::Running ? SupplySource::Genset
                                                    : SupplySource::Battery;

    if (s.supply == SupplySource::Battery) {
        s.soc = std::max(0.0, s.soc - p.site_load_w * dt_h / p.battery_capacity_wh);
    } else {
        s.soc = std::min(1.0, s.soc + p.charge_power_w * dt_h / p.battery_capacity_wh);
    }

    const double heat_flow = p.heat_load_w - p.cooling_coeff_w_per_c * (s.room_temp_c - s.ambient_c);
    s.room_temp_c = std::max(0.0, s.room_temp_c + heat_flow / p.room_thermal_capacity_j_per_c * dt_s);

    s.t_ms += dt.count();
    ++s.steps;

    ControllerInputs in;
    in.mains_fail = !s.mains_on;
    in.low_fuel = s.fuel_l <= p.low_fuel_fraction * p.fuel_capacity_l;
    in.genset_supply_present = g.status == GensetStatus::Running;
    in.adc_temp = adc_from_temperature(s.room_temp_c);
    if (p.temp_adc_dither_counts != 0) {
        static constexpr int kPattern[3] = {0, 1, -1};
        const int offset = kPattern[s.steps % 3] * p.temp_adc_dither_counts;
        in.adc_temp.code = std::clamp(in.adc_temp.code + offset, 0, kAdcMaxCode);
    }
    const double volts = battery_terminal_voltage(s.soc, s.supply == SupplySource::Battery, p);
    in.adc_batt = adc_from_battery_voltage(volts, s.trimmer_gain);
    return {s, in};
}

PlantState apply_event(PlantState s, const PlantParams& p, const PlantEvent& e) {
    switch (e.kind) {
    case PlantEventKind::MainsOn: s.mains_on = true; break;
    case PlantEventKind::MainsOff: s.mains_on = false; break;
    case PlantEventKind::SetFuel:
        if (e.value < 0.0) throw ConfigError("fuel must be >= 0");
        if (e.value > p.fuel_capacity_l) {
            log_warning("SetFuel(" + shortest(e.value) + ") exceeds tank capacity; clamped to " +
                        shortest(p.fuel_capacity_l) + " L");
        }
        s.fuel_l = std::min(e.value, p.fuel_capacity_l);
        if (s.fuel_l <= 0.0 && s.genset.status == GensetStatus::Running) s.genset = GensetState{};
        break;
    case PlantEventKind::InjectGensetFault:
        s.genset = GensetState{GensetStatus::FaultInjected, milliseconds{0}};
        break;
    case PlantEventKind::ClearGensetFault:
        if (s.genset.status == GensetStatus::FaultInjected) s.genset = GensetState{};
        break;
    case PlantEventKind::SetAmbient:
        if (e.value < 0.0) throw ConfigError("ambient must be >= 0");
        s.ambient_c = e.value;
        break;
    case PlantEventKind::HangController: s.controller_hung = true; break;
    case PlantEventKind::ResumeController: s.controller_hung = false; break;
    case PlantEventKind::SetTrimmerGain:
        if (!(e.value > 0.0)) throw ConfigError("trimmer gain must be > 0");
        s.trimmer_gain = e.value;
        break;
    }
    return s;
}

}  // namespace vtms
