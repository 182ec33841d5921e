#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "vtms/log.hpp"
#include "vtms/plant.hpp"

using namespace vtms;

namespace {

constexpr milliseconds kDt{100};

struct CapturedLog {
    std::vector<std::string> lines;
    LogSink previous;

    CapturedLog() {
        previous = set_log_sink([this](std::string_view level, std::string_view msg) {
            lines.push_back(std::string(level) + ": " + std::string(msg));
        });
    }
    ~CapturedLog() { set_log_sink(previous); }
};

PlantState running_genset(const PlantParams& p) {
    auto s = plant_initial_state(p);
    s.mains_on = false;
    for (int i = 0; i < 50; ++i) s = plant_step(s, p, true, kDt).state;
    REQUIRE(s.genset.status == GensetStatus::Running);
    return s;
}

}  // namespace

TEST_CASE("plant_step examples") {
    const PlantParams p;

    SUBCASE("mains charges the battery") {
        auto s = plant_initial_state(p);
        s.soc = 0.5;
        const auto r = plant_step(s, p, false, kDt);
        // 3000 W for 0.1 s into 9600 Wh.
        CHECK(r.state.soc == doctest::Approx(0.5 + 3000.0 * 0.1 / 3600.0 / 9600.0).epsilon(1e-12));
        CHECK_FALSE(r.inputs.mains_fail);
        CHECK_FALSE(r.inputs.genset_supply_present);
        CHECK(r.state.genset.status == GensetStatus::Off);
        CHECK(r.state.supply == SupplySource::Mains);
        CHECK(r.state.t_ms == 100);
        CHECK(r.state.room_temp_c == doctest::Approx(32.0 + 800.0 / 2.0e6 * 0.1).epsilon(1e-12));
    }
    SUBCASE("genset needs the start delay before it carries load") {
        auto s = plant_initial_state(p);
        s.mains_on = false;
        for (int i = 1; i < 50; ++i) {
            const auto r = plant_step(s, p, true, kDt);
            s = r.state;
            REQUIRE(s.genset.status == GensetStatus::Starting);
            REQUIRE_FALSE(r.inputs.genset_supply_present);
            REQUIRE(s.supply == SupplySource::Battery);
        }
        const auto r = plant_step(s, p, true, kDt);
        CHECK(r.state.genset.status == GensetStatus::Running);
        CHECK(r.inputs.genset_supply_present);
        CHECK(r.state.supply == SupplySource::Genset);
    }
    SUBCASE("dropping the command stops the genset") {
        auto s = running_genset(p);
        const auto r = plant_step(s, p, false, kDt);
        CHECK(r.state.genset.status == GensetStatus::Off);
        CHECK(r.state.supply == SupplySource::Battery);
    }
    SUBCASE("low fuel contact closes at 20 percent") {
        auto s = plant_initial_state(p);
        s.fuel_l = 19.9;
        CHECK(plant_step(s, p, false, kDt).inputs.low_fuel);
        s.fuel_l = 20.0;
        CHECK(plant_step(s, p, false, kDt).inputs.low_fuel);
        s.fuel_l = 20.1;
        CHECK_FALSE(plant_step(s, p, false, kDt).inputs.low_fuel);
    }
    SUBCASE("running genset burns fuel at the rated flow") {
        auto s = running_genset(p);
        const double before = s.fuel_l;
        for (int i = 0; i < 36000; ++i) s = plant_step(s, p, true, kDt).state;
        CHECK(before - s.fuel_l == doctest::Approx(4.0).epsilon(1e-9));
    }
    SUBCASE("empty tank stops the genset") {
        auto s = running_genset(p);
        s.fuel_l = 1e-5;
        const auto r = plant_step(s, p, true, kDt);
        CHECK(r.state.fuel_l == 0.0);
        CHECK(r.state.genset.status == GensetStatus::Off);
        CHECK_FALSE(r.inputs.genset_supply_present);
        // It does not restart without fuel.
        CHECK(plant_step(r.state, p, true, kDt).state.genset.status == GensetStatus::Off);
    }
    SUBCASE("non-positive dt is a contract violation") {
        CHECK_THROWS_AS(plant_step(plant_initial_state(p), p, false, milliseconds{0}), ContractViolation);
    }
}

TEST_CASE("battery model") {
    const PlantParams p;
    CHECK(ocv_from_soc(1.0, p) == doctest::Approx(54.0));
    CHECK(ocv_from_soc(0.5, p) == doctest::Approx(48.5));
    CHECK(ocv_from_soc(0.7, p) == doctest::Approx(49.75));
    CHECK(ocv_from_soc(0.0, p) == doctest::Approx(42.0));
    CHECK(ocv_from_soc(0.05, p) == doctest::Approx(43.5));

    CHECK(battery_terminal_voltage(1.0, false, p) == doctest::Approx(54.0));
    // 1500 W / 54 V through 0.05 ohm.
    CHECK(battery_terminal_voltage(1.0, true, p) == doctest::Approx(54.0 - 1500.0 / 54.0 * 0.05));
    CHECK_THROWS_AS(battery_terminal_voltage(1.01, true, p), ContractViolation);
    CHECK_THROWS_AS(battery_terminal_voltage(-0.01, true, p), ContractViolation);
}

TEST_CASE("ADC front end") {
    CHECK(adc_from_battery_voltage(48.0, 1.0).code == 768);
    CHECK(adc_from_battery_voltage(0.0, 1.0).code == 0);
    const auto skewed = adc_from_battery_voltage(48.0, 1.05);
    CHECK(skewed.code == 806);
    CHECK(battery_voltage_from_adc(skewed.code).text == "50.3");
    CHECK(adc_from_battery_voltage(80.0, 1.0).code == kAdcMaxCode);
    CHECK(adc_from_battery_voltage(48.0, 1.0).channel == AdcChannel::Batt1);
    CHECK_THROWS_AS(adc_from_battery_voltage(-0.5, 1.0), ContractViolation);

    CHECK(adc_from_temperature(0.0).code == 0);
    CHECK(adc_from_temperature(35.0).code == 72);
    CHECK(adc_from_temperature(40.0).code == 82);
    CHECK(adc_from_temperature(40.0).channel == AdcChannel::Temp0);
    CHECK(temperature_from_adc(adc_from_temperature(40.0).code).celsius == 40);
    CHECK_THROWS_AS(adc_from_temperature(-1.0), ContractViolation);
}

TEST_CASE("apply_event") {
    const PlantParams p;
    auto s = plant_initial_state(p);

    SUBCASE("mains off is reported on the next tick") {
        s = apply_event(s, p, {PlantEventKind::MainsOff});
        CHECK_FALSE(s.mains_on);
        CHECK(plant_step(s, p, false, kDt).inputs.mains_fail);
    }
    SUBCASE("injected fault drops the genset supply on the next tick") {
        s = running_genset(p);
        s = apply_event(s, p, {PlantEventKind::InjectGensetFault});
        auto r = plant_step(s, p, true, kDt);
        CHECK_FALSE(r.inputs.genset_supply_present);
        CHECK(r.state.genset.status == GensetStatus::FaultInjected);
        CHECK(r.state.supply == SupplySource::Battery);
        // The fault survives the command being dropped and re-asserted.
        r = plant_step(plant_step(r.state, p, false, kDt).state, p, true, kDt);
        CHECK(r.state.genset.status == GensetStatus::FaultInjected);
        s = apply_event(r.state, p, {PlantEventKind::ClearGensetFault});
        CHECK(s.genset.status == GensetStatus::Off);
        CHECK(plant_step(s, p, true, kDt).state.genset.status == GensetStatus::Starting);
    }
    SUBCASE("overfilling clamps to the tank and warns") {
        CapturedLog log;
        s = apply_event(s, p, {PlantEventKind::SetFuel, 150.0});
        CHECK(s.fuel_l == 100.0);
        REQUIRE(log.lines.size() == 1);
        CHECK(log.lines[0].find("warning") == 0);
    }
    SUBCASE("invalid payloads") {
        CHECK_THROWS_AS(apply_event(s, p, {PlantEventKind::SetFuel, -1.0}), ConfigError);
        CHECK_THROWS_AS(apply_event(s, p, {PlantEventKind::SetAmbient, -1.0}), ConfigError);
        CHECK_THROWS_AS(apply_event(s, p, {PlantEventKind::SetTrimmerGain, 0.0}), ConfigError);
    }
    SUBCASE("ambient and trimmer take effect") {
        s = apply_event(s, p, {PlantEventKind::SetAmbient, 20.0});
        CHECK(s.ambient_c == 20.0);
        s = apply_event(s, p, {PlantEventKind::SetTrimmerGain, 1.05});
        CHECK(s.trimmer_gain == 1.05);
        CHECK(plant_step(s, p, false, kDt).inputs.adc_batt.code == adc_from_battery_voltage(54.0, 1.05).code);
    }
    SUBCASE("hang flags") {
        s = apply_event(s, p, {PlantEventKind::HangController});
        CHECK(s.controller_hung);
        s = apply_event(s, p, {PlantEventKind::ResumeController});
        CHECK_FALSE(s.controller_hung);
    }
}

TEST_CASE("validate(PlantParams)") {
    CHECK_NOTHROW(validate(PlantParams{}));
    PlantParams p;
    p.low_fuel_fraction = 1.0;
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = PlantParams{};
    p.ocv_table = {{0.0, 42.0}, {0.5, 41.0}, {1.0, 54.0}};
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = PlantParams{};
    p.initial_fuel_l = 120.0;
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = PlantParams{};
    p.battery_capacity_wh = 0.0;
    CHECK_THROWS_AS(validate(p), ConfigError);
}

TEST_CASE("energy bookkeeping closes over random supply changes") {
    const PlantParams p;
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> pct(0, 99);
    auto s = plant_initial_state(p);
    s.soc = 0.5;
    double charged_wh = 0.0;
    double discharged_wh = 0.0;
    bool cmd = false;
    for (int i = 0; i < 30000; ++i) {
        if (pct(rng) < 1) s = apply_event(s, p, {s.mains_on ? PlantEventKind::MainsOff : PlantEventKind::MainsOn});
        if (pct(rng) < 1) cmd = !cmd;
        s = plant_step(s, p, cmd, kDt).state;
        const double dt_h = 0.1 / 3600.0;
        if (s.supply == SupplySource::Battery) {
            discharged_wh += p.site_load_w * dt_h;
        } else {
            charged_wh += p.charge_power_w * dt_h;
        }
        REQUIRE(s.soc > 0.0);
        REQUIRE(s.soc < 1.0);
    }
    CHECK((s.soc - 0.5) * p.battery_capacity_wh == doctest::Approx(charged_wh - discharged_wh).epsilon(1e-9));
}

TEST_CASE("fuel only falls while the genset runs, and running implies fuel") {
    PlantParams p;
    p.initial_fuel_l = 0.5;
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> pct(0, 99);
    auto s = plant_initial_state(p);
    s.mains_on = false;
    bool cmd = true;
    for (int i = 0; i < 20000; ++i) {
        if (pct(rng) < 1) cmd = !cmd;
        const double before = s.fuel_l;
        s = plant_step(s, p, cmd, kDt).state;
        REQUIRE(s.fuel_l <= before);
        REQUIRE(s.fuel_l >= 0.0);
        if (s.fuel_l < before) REQUIRE(before - s.fuel_l <= p.fuel_burn_lph * 0.1 / 3600.0 + 1e-12);
        if (s.genset.status == GensetStatus::Running) REQUIRE(s.fuel_l > 0.0);
    }
    CHECK(s.fuel_l == 0.0);
}

TEST_CASE("room temperature settles monotonically at ambient + heat/k") {
    const PlantParams p;
    const double fixed_point = p.ambient_c + p.heat_load_w / p.cooling_coeff_w_per_c;  // 45.33 C
    CHECK(fixed_point == doctest::Approx(45.3333).epsilon(1e-5));
    auto s = plant_initial_state(p);
    // Ten-second steps keep Euler well inside its stability bound (k*dt/C = 3e-4).
    for (int i = 0; i < 40000; ++i) {
        const double before = s.room_temp_c;
        s = plant_step(s, p, false, milliseconds{10000}).state;
        REQUIRE(s.room_temp_c >= before);
        REQUIRE(s.room_temp_c <= fixed_point + 1e-9);
    }
    CHECK(std::abs(s.room_temp_c - fixed_point) < 0.01);

    // And from above.
    s.room_temp_c = 60.0;
    for (int i = 0; i < 40000; ++i) {
        const double before = s.room_temp_c;
        s = plant_step(s, p, false, milliseconds{10000}).state;
        REQUIRE(s.room_temp_c <= before);
        REQUIRE(s.room_temp_c >= fixed_point - 1e-9);
    }
    CHECK(std::abs(s.room_temp_c - fixed_point) < 0.01);
}

TEST_CASE("calibration round trip at unity trimmer gain") {
    // Every representable display voltage comes back as itself or one tenth low.
    for (int tenths = 0; tenths <= 639; ++tenths) {
        const double v = tenths / 10.0;
        const int shown = battery_voltage_from_adc(adc_from_battery_voltage(v, 1.0).code).in_tenths();
        REQUIRE_MESSAGE((shown == tenths || shown == tenths - 1), "v=", v, " shown=", shown);
    }
    // Anywhere in range the error stays within one ADC step plus the display truncation.
    for (int mv = 0; mv <= 63900; ++mv) {
        const double v = mv / 1000.0;
        const int shown = battery_voltage_from_adc(adc_from_battery_voltage(v, 1.0).code).in_tenths();
        REQUIRE(std::abs(shown / 10.0 - v) <= 1.0 / 16.0 + 0.1 + 1e-9);
    }
}

TEST_CASE("temperature dither follows the fixed pattern") {
    PlantParams p;
    p.temp_adc_dither_counts = 1;
    p.heat_load_w = 1e-9;  // hold the room still
    p.cooling_coeff_w_per_c = 1e-9;
    p.ambient_c = 40.0;
    auto s = plant_initial_state(p);
    const int base = adc_from_temperature(40.0).code;
    std::vector<int> codes;
    for (int i = 0; i < 6; ++i) {
        auto r = plant_step(s, p, false, kDt);
        codes.push_back(r.inputs.adc_temp.code);
        s = r.state;
    }
    CHECK(codes == std::vector<int>{base + 1, base - 1, base, base + 1, base - 1, base});
}
