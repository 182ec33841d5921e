#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "vtms/controller.hpp"

namespace vtms {

struct OcvPoint {
    double soc;
    double volts;

    friend bool operator==(const OcvPoint&, const OcvPoint&) = default;
};

struct PlantParams {
    double battery_capacity_wh = 9600.0;
    double site_load_w = 1500.0;
    double charge_power_w = 3000.0;
    std::vector<OcvPoint> ocv_table = {{0.0, 42.0}, {0.1, 45.0}, {0.5, 48.5}, {0.9, 51.0}, {1.0, 54.0}};
    double internal_resistance_ohm = 0.05;
    double fuel_capacity_l = 100.0;
    double fuel_burn_lph = 4.0;
    double low_fuel_fraction = 0.20;
    double genset_start_delay_s = 5.0;
    double ambient_c = 32.0;
    double room_thermal_capacity_j_per_c = 2.0e6;
    double heat_load_w = 800.0;
    double cooling_coeff_w_per_c = 60.0;
    double trimmer_gain = 1.0;

    // Initial conditions. Unset room temperature starts at ambient, unset
    // fuel starts with a full tank.
    double initial_soc = 1.0;
    std::optional<double> initial_fuel_l;
    std::optional<double> initial_room_temp_c;

    // Deterministic +/- count jitter on the temperature ADC (0 = off).
    int temp_adc_dither_counts = 0;

    friend bool operator==(const PlantParams&, const PlantParams&) = default;
};

/// Throws ConfigError naming the first violated invariant.
void validate(const PlantParams& params);

enum class GensetStatus { Off, Starting, Running, FaultInjected };

std::string_view to_string(GensetStatus status);

struct GensetState {
    GensetStatus status = GensetStatus::Off;
    milliseconds starting_elapsed{0};

    friend bool operator==(const GensetState&, const GensetState&) = default;
};

enum class SupplySource { Mains, Genset, Battery };

struct PlantState {
    std::int64_t t_ms = 0;
    std::uint64_t steps = 0;
    bool mains_on = true;
    GensetState genset{};
    double soc = 1.0;
    double fuel_l = 100.0;
    double room_temp_c = 32.0;
    double ambient_c = 32.0;
    double trimmer_gain = 1.0;
    bool controller_hung = false;
    bool bypass_active = false;
    SupplySource supply = SupplySource::Mains;

    double t_s() const { return static_cast<double>(t_ms) / 1000.0; }

    friend bool operator==(const PlantState&, const PlantState&) = default;
};

PlantState plant_initial_state(const PlantParams& params);

struct PlantStepResult {
    PlantState state;
    ControllerInputs inputs;
};

/// Advances the room by one tick with explicit Euler integration and
/// samples the relay and ADC chain the controller sees.
PlantStepResult plant_step(PlantState state, const PlantParams& params, bool genset_cmd, milliseconds dt);

double ocv_from_soc(double soc, const PlantParams& params);

double battery_terminal_voltage(double soc, bool discharging, const PlantParams& params);

AdcSample adc_from_battery_voltage(double volts, double trimmer_gain);

AdcSample adc_from_temperature(double celsius);

enum class PlantEventKind {
    MainsOn,
    MainsOff,
    SetFuel,
    InjectGensetFault,
    ClearGensetFault,
    SetAmbient,
    HangController,
    ResumeController,
    SetTrimmerGain,
};

struct PlantEvent {
    PlantEventKind kind;
    double value = 0.0;
};

PlantState apply_event(PlantState state, const PlantParams& params, const PlantEvent& event);

}  // namespace vtms
