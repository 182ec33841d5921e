#pragma once

#include <compare>
#include <stdexcept>
#include <string>

namespace vtms {

// Raised when a caller breaks an operation's precondition. The ADC model
// guarantees code ranges, so hitting this means a bug upstream.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline constexpr int kAdcMaxCode = 1023;

enum class AdcChannel { Temp0, Batt1 };

struct AdcSample {
    AdcChannel channel = AdcChannel::Temp0;
    int code = 0;

    friend bool operator==(const AdcSample&, const AdcSample&) = default;
};

/// Battery voltage as the firmware shows it: integer volts, a period, one
/// truncated decimal digit.
struct DisplayVoltage {
    int whole = 0;
    int tenths = 0;
    std::string text = "0.0";

    int in_tenths() const { return whole * 10 + tenths; }

    friend bool operator==(const DisplayVoltage&, const DisplayVoltage&) = default;
    friend auto operator<=>(const DisplayVoltage& a, const DisplayVoltage& b) {
        return a.in_tenths() <=> b.in_tenths();
    }
};

struct TemperatureC {
    int celsius = 0;

    friend auto operator<=>(const TemperatureC&, const TemperatureC&) = default;
};

inline constexpr int kTemperatureMaxC = 150;

/// Integer volts = code / 16, tenths = ((code % 16) * 10) / 16, both
/// truncating. The trimmer is calibrated to 16 counts per volt.
DisplayVoltage battery_voltage_from_adc(int code);

/// LM35 (10 mV/degC) against a 5.00 V reference: floor(code * 500 / 1024),
/// clamped to the sensor range 0..150.
TemperatureC temperature_from_adc(int code);

/// Same as temperature_from_adc without the clamp.
int temperature_from_adc_unclamped(int code);

}  // namespace vtms
