#include "vtms/selftest.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>

#include "vtms/conversions.hpp"
#include "vtms/lcd.hpp"
#include "vtms/plant.hpp"
#include "vtms/simulation.hpp"

namespace vtms {

namespace {

// Exact non-negative rational, kept reduced.
struct Rational {
    std::int64_t num;
    std::int64_t den;

    Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
        const auto g = std::gcd(num, den);
        num /= g;
        den /= g;
    }
    Rational operator-(const Rational& o) const { return {num * o.den - o.num * den, den * o.den}; }
    Rational operator*(std::int64_t k) const { return {num * k, den}; }
    bool operator<(const Rational& o) const { return num * o.den < o.num * den; }
    std::int64_t floor() const {
        // Largest integer q with q <= num/den, found without '/' or '%'.
        std::int64_t q = 0;
        while ((q + 1) * den <= num) ++q;
        return q;
    }
};

CheckResult check_battery_oracle() {
    CheckResult r{"battery conversion matches rational oracle on all 1024 codes", true, {}};
    int mismatches = 0;
    for (int code = 0; code <= kAdcMaxCode; ++code) {
        const Rational volts(code, 16);
        const std::int64_t whole = volts.floor();
        const std::int64_t tenths = ((volts - Rational(whole, 1)) * 10).floor();
        const auto got = battery_voltage_from_adc(code);
        const std::string text = std::to_string(whole) + "." + std::to_string(tenths);
        if (got.whole != whole || got.tenths != tenths || got.text != text) {
            if (mismatches++ == 0) r.detail = "first mismatch at code " + std::to_string(code);
        }
    }
    r.passed = mismatches == 0;
    if (!r.passed) r.detail += " (" + std::to_string(mismatches) + " total)";
    return r;
}

CheckResult check_battery_tightness() {
    CheckResult r{"battery display within [0, 0.1) V below code/16", true, {}};
    for (int code = 0; code <= kAdcMaxCode; ++code) {
        const auto v = battery_voltage_from_adc(code);
        const Rational gap = Rational(code, 16) - Rational(v.in_tenths(), 10);
        if (gap.num < 0 || !(gap < Rational(1, 10))) {
            r.passed = false;
            r.detail = "violated at code " + std::to_string(code);
            break;
        }
    }
    return r;
}

CheckResult check_monotonic() {
    CheckResult r{"conversions monotone in code", true, {}};
    for (int code = 1; code <= kAdcMaxCode; ++code) {
        if (battery_voltage_from_adc(code) < battery_voltage_from_adc(code - 1) ||
            temperature_from_adc_unclamped(code) < temperature_from_adc_unclamped(code - 1)) {
            r.passed = false;
            r.detail = "decrease at code " + std::to_string(code);
            break;
        }
    }
    return r;
}

CheckResult check_temperature_oracle() {
    CheckResult r{"temperature conversion matches LM35 oracle on all 1024 codes", true, {}};
    for (int code = 0; code <= kAdcMaxCode; ++code) {
        // Largest c with c * 1024 <= code * 500, then clamp.
        int c = 0;
        while ((c + 1) * 1024 <= code * 500) ++c;
        c = std::min(c, kTemperatureMaxC);
        if (temperature_from_adc(code).celsius != c) {
            r.passed = false;
            r.detail = "mismatch at code " + std::to_string(code);
            break;
        }
    }
    return r;
}

CheckResult check_calibration_round_trip() {
    CheckResult r{"trimmer calibration round trip on 40.0..56.0 V", true, {}};
    for (int tenths = 400; tenths <= 560; ++tenths) {
        const double volts = tenths / 10.0;
        const auto shown = battery_voltage_from_adc(adc_from_battery_voltage(volts, 1.0).code);
        const double error = std::abs(shown.in_tenths() / 10.0 - volts);
        if (error > 1.0 / 16.0 + 0.1 + 1e-9) {
            r.passed = false;
            r.detail = "error " + std::to_string(error) + " V at " + std::to_string(volts);
            break;
        }
    }
    return r;
}

CheckResult check_lcd_frames() {
    CheckResult r{"LCD frames are 4x20 across random states", true, {}};
    std::mt19937 rng(0x5eed);
    std::uniform_int_distribution<int> code(0, kAdcMaxCode);
    std::uniform_int_distribution<int> mode(0, 4);
    std::uniform_int_distribution<int> bit(0, 1);
    std::uniform_int_distribution<int> field(0, 9);
    for (int i = 0; i < 20000; ++i) {
        AlarmSet a{bit(rng) == 1, bit(rng) == 1, bit(rng) == 1, bit(rng) == 1, bit(rng) == 1, bit(rng) == 1};
        const auto main = render_main(battery_voltage_from_adc(code(rng)), temperature_from_adc(code(rng)),
                                      static_cast<ControllerMode>(mode(rng)), a);
        ScreenCursor cursor{Screen::Settings, field(rng), 0, std::nullopt};
        cursor.window_top = std::max(0, cursor.field - 2);
        if (bit(rng)) cursor.pending = code(rng);
        const auto settings = render_settings(Settings{}, cursor);
        if (!is_well_formed(main) || !is_well_formed(settings)) {
            r.passed = false;
            r.detail = "malformed frame at iteration " + std::to_string(i);
            break;
        }
    }
    return r;
}

CheckResult check_closed_loop() {
    CheckResult r{"closed-loop invariants over a fault-injection run", true, {}};
    Scenario sc;
    sc.name = "selftest";
    sc.duration = milliseconds{600000};
    sc.settings_overrides.battery_phase_s = seconds{60};
    sc.settings_overrides.genset_phase_s = seconds{60};
    sc.events = {
        {milliseconds{0}, EventKind::MainsOff},
        {milliseconds{150000}, EventKind::HangController},
        {milliseconds{170000}, EventKind::ResumeController},
        {milliseconds{200000}, EventKind::InjectGensetFault},
        {milliseconds{400000}, EventKind::MainsOn},
        {milliseconds{410000}, EventKind::ClearGensetFault},
    };
    try {
        std::size_t rows = 0;
        bool chattering = false;
        bool prev_high = false;
        run_scenario(sc, {}, [&](const TraceRow& row) {
            ++rows;
            if (row.alarms.high_temperature != prev_high && row.temperature_c > 38 && row.temperature_c < 40) {
                chattering = true;
            }
            prev_high = row.alarms.high_temperature;
        });
        if (rows != 6000) {
            r.passed = false;
            r.detail = "expected 6000 rows, got " + std::to_string(rows);
        } else if (chattering) {
            r.passed = false;
            r.detail = "high-temperature alarm toggled inside the hysteresis band";
        }
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail = e.what();
    }
    return r;
}

}  // namespace

std::vector<CheckResult> run_selftest() {
    return {check_battery_oracle(),   check_battery_tightness(),      check_monotonic(),
            check_temperature_oracle(), check_calibration_round_trip(), check_lcd_frames(),
            check_closed_loop()};
}

}  // namespace vtms
