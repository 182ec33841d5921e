#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "vtms/controller.hpp"
#include "vtms/presets.hpp"

using namespace vtms;

namespace {

constexpr milliseconds kDt{100};

ControllerInputs make_inputs(bool mains_fail, bool low_fuel, bool supply, int temp_code, int batt_code) {
    ControllerInputs in;
    in.mains_fail = mains_fail;
    in.low_fuel = low_fuel;
    in.genset_supply_present = supply;
    in.adc_temp = {AdcChannel::Temp0, temp_code};
    in.adc_batt = {AdcChannel::Batt1, batt_code};
    return in;
}

const ControllerInputs kHealthy = make_inputs(false, false, false, 72, 775);

ScanResult scan(const ControllerState& s, const ControllerInputs& in) { return controller_scan(s, in, kDt); }

}  // namespace

TEST_CASE("controller_init") {
    SUBCASE("fresh boot") {
        auto s = controller_init(Settings{}, milliseconds{0});
        CHECK(s.mode == ControllerMode::MainsPowered);
        CHECK(s.phase_elapsed.count() == 0);
        CHECK(s.crank_attempt == 0);
        CHECK(s.genset_runtime_total.count() == 0);
        CHECK_FALSE(s.temp_alarm_latched);
        CHECK_FALSE(s.genset_fault_latched);
    }
    SUBCASE("persisted runtime at the service interval asserts alarm 6 on the first scan") {
        auto s = controller_init(Settings{}, milliseconds{900000LL * 1000});
        auto r = scan(s, kHealthy);
        CHECK(r.outputs.alarms.service_hour);
        CHECK(r.outputs.alarms.active_count() == 1);
    }
    SUBCASE("inverted hysteresis band is a configuration error") {
        Settings bad;
        bad.temp_alarm_off_c = 45;
        CHECK_THROWS_WITH_AS(controller_init(bad, milliseconds{0}), doctest::Contains("temp_alarm_off_c"),
                             ConfigError);
    }
    SUBCASE("other invariants") {
        Settings bad;
        bad.batt_cutoff_tenths = 480;
        CHECK_THROWS_AS(controller_init(bad, milliseconds{0}), ConfigError);
        bad = Settings{};
        bad.crank_attempts_max = 0;
        CHECK_THROWS_AS(controller_init(bad, milliseconds{0}), ConfigError);
        bad = Settings{};
        bad.genset_cooldown_s = seconds{0};
        CHECK_THROWS_AS(controller_init(bad, milliseconds{0}), ConfigError);
        CHECK_THROWS_AS(controller_init(Settings{}, milliseconds{-1}), ConfigError);
    }
}

TEST_CASE("controller_scan examples") {
    const auto boot = controller_init(Settings{}, milliseconds{0});

    SUBCASE("healthy mains") {
        auto r = scan(boot, kHealthy);
        CHECK(r.state.mode == ControllerMode::MainsPowered);
        CHECK_FALSE(r.outputs.genset_start);
        CHECK(r.outputs.alarms == AlarmSet{});
        CHECK(r.outputs.heartbeat);
        CHECK(r.state.last_battery.text == "48.4");
        CHECK(r.state.last_temperature.celsius == 35);
    }
    SUBCASE("mains failure with a healthy battery starts the battery phase") {
        auto r = scan(boot, make_inputs(true, false, false, 72, 775));
        CHECK(r.state.mode == ControllerMode::BatteryPhase);
        CHECK_FALSE(r.outputs.genset_start);
        AlarmSet expected;
        expected.mains_fail = true;
        CHECK(r.outputs.alarms == expected);
        CHECK(r.outputs.leds.on_battery);
        CHECK_FALSE(r.outputs.leds.on_genset);
    }
    SUBCASE("battery phase expiry cranks the genset") {
        auto s = boot;
        s.mode = ControllerMode::BatteryPhase;
        s.phase_elapsed = seconds{21600};
        auto r = scan(s, make_inputs(true, false, false, 72, 775));
        CHECK(r.state.mode == ControllerMode::GensetCranking);
        CHECK(r.outputs.genset_start);
        CHECK(r.state.phase_elapsed.count() == 0);
    }
    SUBCASE("wrong channel tags or dt are contract violations") {
        auto in = kHealthy;
        in.adc_temp.channel = AdcChannel::Batt1;
        CHECK_THROWS_AS(scan(boot, in), ContractViolation);
        CHECK_THROWS_AS(controller_scan(boot, kHealthy, milliseconds{50}), ContractViolation);
    }
}

TEST_CASE("select_source rules") {
    auto s = controller_init(Settings{}, milliseconds{0});

    SUBCASE("no-op on healthy mains") {
        auto n = select_source(s, false, 480, false, kDt);
        CHECK(n == s);
    }
    SUBCASE("mains failure on a low battery goes straight to cranking") {
        auto n = select_source(s, true, 470, false, kDt);
        CHECK(n.mode == ControllerMode::GensetCranking);
    }
    SUBCASE("early low-battery switch") {
        s.mode = ControllerMode::BatteryPhase;
        s.phase_elapsed = seconds{100};
        auto n = select_source(s, true, 465, false, kDt);
        CHECK(n.mode == ControllerMode::GensetCranking);
        CHECK(n.phase_elapsed.count() == 0);
    }
    SUBCASE("third failed crank latches the fault and falls back to battery") {
        s.mode = ControllerMode::GensetCranking;
        s.crank_attempt = 2;
        s.crank_elapsed = milliseconds{9900};
        auto n = select_source(s, true, 480, false, kDt);
        CHECK(n.mode == ControllerMode::BatteryPhase);
        CHECK(n.genset_fault_latched);
        CHECK(n.crank_attempt == 0);
    }
    SUBCASE("a crank attempt expiring below the limit keeps cranking") {
        s.mode = ControllerMode::GensetCranking;
        s.crank_elapsed = milliseconds{9900};
        auto n = select_source(s, true, 480, false, kDt);
        CHECK(n.mode == ControllerMode::GensetCranking);
        CHECK(n.crank_attempt == 1);
        CHECK(n.crank_elapsed.count() == 0);
    }
    SUBCASE("genset supply ends cranking but not the phase clock") {
        s.mode = ControllerMode::GensetCranking;
        s.phase_elapsed = milliseconds{5000};
        s.crank_elapsed = milliseconds{5000};
        auto n = select_source(s, true, 480, true, kDt);
        CHECK(n.mode == ControllerMode::GensetPhase);
        CHECK(n.phase_elapsed == milliseconds{5100});
        CHECK(n.crank_elapsed.count() == 0);
    }
    SUBCASE("genset phase expiry hands back to the battery above cutoff") {
        s.mode = ControllerMode::GensetPhase;
        s.phase_elapsed = milliseconds{21600 * 1000 - 100};
        auto n = select_source(s, true, 431, true, kDt);
        CHECK(n.mode == ControllerMode::BatteryPhase);
        CHECK(n.phase_elapsed.count() == 0);
    }
    SUBCASE("genset phase expiry at cutoff keeps the genset running") {
        s.mode = ControllerMode::GensetPhase;
        s.phase_elapsed = milliseconds{21600 * 1000 - 100};
        auto n = select_source(s, true, 430, true, kDt);
        CHECK(n.mode == ControllerMode::GensetPhase);
        CHECK(n.phase_elapsed == seconds{21600});
        n = select_source(n, true, 430, true, kDt);
        CHECK(n.phase_elapsed == seconds{21600});
    }
    SUBCASE("genset supply lost while running latches the fault") {
        s.mode = ControllerMode::GensetPhase;
        auto n = select_source(s, true, 480, false, kDt);
        CHECK(n.mode == ControllerMode::BatteryPhase);
        CHECK(n.genset_fault_latched);
    }
    SUBCASE("faulted battery phase never re-cranks") {
        s.mode = ControllerMode::BatteryPhase;
        s.genset_fault_latched = true;
        s.phase_elapsed = seconds{21600};
        auto n = select_source(s, true, 400, false, kDt);
        CHECK(n.mode == ControllerMode::BatteryPhase);
        CHECK(n.phase_elapsed == seconds{21600});
    }
    SUBCASE("mains return: cooldown after a genset run, direct otherwise") {
        s.mode = ControllerMode::GensetPhase;
        auto n = select_source(s, false, 480, true, kDt);
        CHECK(n.mode == ControllerMode::GensetCooldown);
        CHECK(genset_commanded(n.mode));

        s.mode = ControllerMode::BatteryPhase;
        s.genset_fault_latched = true;
        n = select_source(s, false, 480, false, kDt);
        CHECK(n.mode == ControllerMode::MainsPowered);
        CHECK_FALSE(n.genset_fault_latched);
    }
    SUBCASE("cooldown lasts genset_cooldown_s") {
        s.mode = ControllerMode::GensetCooldown;
        int scans = 0;
        while (s.mode == ControllerMode::GensetCooldown) {
            s = select_source(s, false, 480, true, kDt);
            ++scans;
        }
        CHECK(scans == 300);
        CHECK(s.mode == ControllerMode::MainsPowered);
    }
    SUBCASE("mains failing again during cooldown resumes the genset") {
        s.mode = ControllerMode::GensetCooldown;
        s.cooldown_elapsed = seconds{10};
        auto n = select_source(s, true, 480, true, kDt);
        CHECK(n.mode == ControllerMode::GensetPhase);
        CHECK(n.phase_elapsed.count() == 0);
    }
}

TEST_CASE("evaluate_alarms") {
    auto s = controller_init(Settings{}, milliseconds{0});

    SUBCASE("healthy mains, 35 C, no runtime") {
        CHECK(evaluate_alarms(s, kHealthy, TemperatureC{35}, kDt) == AlarmSet{});
    }
    SUBCASE("hysteresis keeps the latch at 39 C") {
        auto r = scan(s, make_inputs(false, false, false, 82, 775));  // 40 C
        CHECK(r.state.last_temperature.celsius == 40);
        CHECK(r.outputs.alarms.high_temperature);
        r = scan(r.state, make_inputs(false, false, false, 80, 775));  // 39 C
        CHECK(r.state.last_temperature.celsius == 39);
        CHECK(r.outputs.alarms.high_temperature);
        r = scan(r.state, make_inputs(false, false, false, 78, 775));  // 38 C
        CHECK(r.state.last_temperature.celsius == 38);
        CHECK_FALSE(r.outputs.alarms.high_temperature);
    }
    SUBCASE("service boundary is inclusive") {
        s.genset_runtime_total = s.settings.service_interval_s;
        CHECK(evaluate_alarms(s, kHealthy, TemperatureC{35}, kDt).service_hour);
        s.genset_runtime_total -= milliseconds{1};
        CHECK_FALSE(evaluate_alarms(s, kHealthy, TemperatureC{35}, kDt).service_hour);
    }
    SUBCASE("genset on load needs both the genset supply and a mains failure") {
        CHECK(evaluate_alarms(s, make_inputs(true, false, true, 72, 775), TemperatureC{35}, kDt).genset_on_load);
        CHECK_FALSE(evaluate_alarms(s, make_inputs(false, false, true, 72, 775), TemperatureC{35}, kDt).genset_on_load);
    }
    SUBCASE("relay inputs pass through") {
        auto a = evaluate_alarms(s, make_inputs(true, true, false, 72, 775), TemperatureC{35}, kDt);
        CHECK(a.mains_fail);
        CHECK(a.low_fuel);
    }
}

TEST_CASE("reset_service_hours") {
    auto s = controller_init(Settings{}, milliseconds{900001LL * 1000});
    auto r = scan(s, kHealthy);
    CHECK(r.outputs.alarms.service_hour);
    auto cleared = reset_service_hours(r.state);
    CHECK(cleared.genset_runtime_total.count() == 0);
    CHECK_FALSE(scan(cleared, kHealthy).outputs.alarms.service_hour);
    CHECK(reset_service_hours(cleared).genset_runtime_total.count() == 0);

    // Mid genset phase the counter restarts on the next scan.
    auto running = controller_init(Settings{}, milliseconds{5000});
    running.mode = ControllerMode::GensetPhase;
    running = reset_service_hours(running);
    auto next = scan(running, make_inputs(true, false, true, 72, 775));
    CHECK(next.state.genset_runtime_total == kDt);
}

TEST_CASE("apply_button") {
    auto s = controller_init(Settings{}, milliseconds{0});

    SUBCASE("main screen + Set enters settings on field 0") {
        auto n = apply_button(s, Button::Set);
        CHECK(n.ui.screen == Screen::Settings);
        CHECK(n.ui.field == 0);
        CHECK_FALSE(n.ui.pending);
    }
    SUBCASE("Up/Down/Back on the main screen do nothing") {
        for (auto b : {Button::Up, Button::Down, Button::Back}) CHECK(apply_button(s, b) == s);
    }
    SUBCASE("Up steps the temperature alarm by one degree") {
        auto n = apply_button(apply_button(s, Button::Set), Button::Up);
        REQUIRE(n.ui.pending);
        CHECK(*n.ui.pending == 41);
        CHECK(n.settings.temp_alarm_on_c == 40);
        n = apply_button(n, Button::Set);
        CHECK(n.settings.temp_alarm_on_c == 41);
        CHECK(n.ui.field == 1);
        CHECK_FALSE(n.ui.pending);
    }
    SUBCASE("alarm threshold cannot be edited down to the clear threshold") {
        auto n = apply_button(s, Button::Set);
        n = apply_button(n, Button::Down);
        CHECK(*n.ui.pending == 39);
        n = apply_button(n, Button::Down);
        CHECK(*n.ui.pending == 39);
        n = apply_button(n, Button::Set);
        CHECK(n.settings.temp_alarm_on_c == 39);
        CHECK_NOTHROW(validate(n.settings));
    }
    SUBCASE("Back abandons the pending edit, then leaves settings") {
        auto n = apply_button(apply_button(s, Button::Set), Button::Up);
        n = apply_button(n, Button::Back);
        CHECK_FALSE(n.ui.pending);
        CHECK(n.ui.screen == Screen::Settings);
        CHECK(n.settings == s.settings);
        n = apply_button(n, Button::Back);
        CHECK(n.ui.screen == Screen::Main);
    }
    SUBCASE("voltage and hour presets step by 0.1 V and 1 h") {
        auto n = apply_button(s, Button::Set);
        n = apply_button(n, Button::Set);  // TEMP CLEAR
        n = apply_button(n, Button::Set);  // BATT LOW
        n = apply_button(n, Button::Up);
        CHECK(*n.ui.pending == 471);
        n = apply_button(n, Button::Set);  // commit, now BATT CUTOFF
        n = apply_button(n, Button::Set);  // BATT PHASE
        n = apply_button(n, Button::Down);
        CHECK(*n.ui.pending == 21600 - 3600);
        n = apply_button(n, Button::Set);
        CHECK(n.settings.batt_low_tenths == 471);
        CHECK(n.settings.battery_phase_s == seconds{18000});
    }
    SUBCASE("Set cycles through every field and wraps, window follows the cursor") {
        auto n = apply_button(s, Button::Set);
        const int count = static_cast<int>(preset_fields().size());
        for (int i = 1; i <= count; ++i) {
            n = apply_button(n, Button::Set);
            CHECK(n.ui.field == i % count);
            CHECK(n.ui.field >= n.ui.window_top);
            CHECK(n.ui.field < n.ui.window_top + 3);
        }
        CHECK(n.ui.window_top == 0);
    }
    SUBCASE("edits never produce invalid settings") {
        std::mt19937 rng(7);
        std::uniform_int_distribution<int> pick(0, 3);
        auto n = s;
        for (int i = 0; i < 5000; ++i) {
            n = apply_button(n, static_cast<Button>(pick(rng)));
            REQUIRE_NOTHROW(validate(n.settings));
            if (n.ui.pending) {
                const auto& f = preset_fields()[static_cast<std::size_t>(n.ui.field)];
                REQUIRE(*n.ui.pending >= f.lower(n.settings));
                REQUIRE(*n.ui.pending <= f.upper(n.settings));
            }
        }
    }
}

TEST_CASE("scan invariants over random input traces") {
    std::mt19937 rng(1234);
    std::uniform_int_distribution<int> coin(0, 99);
    std::uniform_int_distribution<int> code(0, kAdcMaxCode);

    for (int trial = 0; trial < 20; ++trial) {
        Settings cfg;
        cfg.battery_phase_s = seconds{30};
        cfg.genset_phase_s = seconds{20};
        auto s = controller_init(cfg, milliseconds{0});
        ControllerInputs in = kHealthy;
        int temp_code = 80;
        for (int i = 0; i < 5000; ++i) {
            if (coin(rng) < 2) in.mains_fail = !in.mains_fail;
            if (coin(rng) < 2) in.low_fuel = !in.low_fuel;
            if (coin(rng) < 5) in.genset_supply_present = !in.genset_supply_present;
            if (coin(rng) < 3) in.adc_batt.code = code(rng);
            temp_code = std::clamp(temp_code + (coin(rng) % 3) - 1, 60, 100);
            in.adc_temp.code = temp_code;

            const auto before = s;
            const auto r = scan(s, in);
            REQUIRE(r.outputs.heartbeat);
            REQUIRE(r.outputs.leds.alarms == r.outputs.alarms);
            REQUIRE(r.state.genset_runtime_total >= before.genset_runtime_total);
            REQUIRE(r.state.crank_attempt <= cfg.crank_attempts_max);
            REQUIRE(r.state.phase_elapsed <=
                    std::max<milliseconds>(cfg.battery_phase_s, cfg.genset_phase_s) + kDt);

            // Determinism.
            const auto again = scan(before, in);
            REQUIRE(again.state == r.state);
            REQUIRE(again.outputs == r.outputs);

            // Hysteresis: the latch only moves across a threshold.
            const int t = r.state.last_temperature.celsius;
            if (r.outputs.alarms.high_temperature && !before.temp_alarm_latched) REQUIRE(t >= cfg.temp_alarm_on_c);
            if (!r.outputs.alarms.high_temperature && before.temp_alarm_latched) REQUIRE(t <= cfg.temp_alarm_off_c);

            REQUIRE(r.outputs.genset_start == genset_commanded(r.state.mode));
            s = r.state;
        }
    }
}

namespace {

// Ideal genset: supply appears after the start relay has been held for
// five seconds and drops as soon as the relay opens.
struct IdealGenset {
    int held_scans = 0;
    bool supply = false;

    void update(bool relay) {
        held_scans = relay ? held_scans + 1 : 0;
        supply = held_scans >= 50;
    }
};

struct Segment {
    bool genset;
    int scans;
};

}  // namespace

TEST_CASE("alternation exactness against an ideal plant") {
    Settings cfg;
    cfg.battery_phase_s = seconds{600};
    cfg.genset_phase_s = seconds{900};
    auto s = controller_init(cfg, milliseconds{0});
    IdealGenset genset;
    bool relay = false;

    std::vector<Segment> segments;
    for (int i = 0; i < 4 * 7500; ++i) {
        genset.update(relay);
        auto r = scan(s, make_inputs(true, false, genset.supply, 72, 800));
        s = r.state;
        relay = r.outputs.genset_start;
        const bool on_genset = s.mode == ControllerMode::GensetCranking || s.mode == ControllerMode::GensetPhase;
        REQUIRE((on_genset || s.mode == ControllerMode::BatteryPhase));
        if (segments.empty() || segments.back().genset != on_genset) segments.push_back({on_genset, 0});
        ++segments.back().scans;
    }
    REQUIRE(segments.size() >= 4);
    for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
        CHECK(segments[i].scans == (segments[i].genset ? 9000 : 6000));
    }
    CHECK_FALSE(s.genset_fault_latched);
}

TEST_CASE("crank bound and mains priority") {
    auto s = controller_init(Settings{}, milliseconds{0});
    s = scan(s, make_inputs(true, false, false, 72, 700)).state;  // 43.7 V: straight to cranking
    REQUIRE(s.mode == ControllerMode::GensetCranking);
    int cranking_scans = 1;
    while (true) {
        auto r = scan(s, make_inputs(true, false, false, 72, 700));
        s = r.state;
        if (s.mode != ControllerMode::GensetCranking) break;
        REQUIRE(r.outputs.genset_start);
        ++cranking_scans;
    }
    CHECK(cranking_scans == 300);
    CHECK(s.mode == ControllerMode::BatteryPhase);
    CHECK(s.genset_fault_latched);

    auto r = scan(s, make_inputs(true, false, false, 72, 700));
    CHECK(r.outputs.alarms.genset_fault);
    r = scan(r.state, make_inputs(false, false, false, 72, 700));
    CHECK(r.state.mode == ControllerMode::MainsPowered);
    CHECK_FALSE(r.outputs.alarms.genset_fault);
    CHECK_FALSE(r.outputs.genset_start);
    r = scan(r.state, make_inputs(false, false, false, 72, 700));
    CHECK(r.state.mode == ControllerMode::MainsPowered);
    CHECK_FALSE(r.outputs.genset_start);
}
