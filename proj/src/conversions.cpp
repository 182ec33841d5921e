#include "vtms/conversions.hpp"

#include <algorithm>

namespace vtms {

namespace {

void require_code(int code, const char* what) {
    if (code < 0 || code > kAdcMaxCode) {
        throw ContractViolation(std::string(what) + ": ADC code " + std::to_string(code) +
                                " outside 0..1023");
    }
}

}  // namespace

DisplayVoltage battery_voltage_from_adc(int code) {
    require_code(code, "battery_voltage_from_adc");
    DisplayVoltage v;
    v.whole = code / 16;
    v.tenths = ((code % 16) * 10) / 16;
    v.text = std::to_string(v.whole);
    v.text += '.';
    v.text += static_cast<char>('0' + v.tenths);
    return v;
}

int temperature_from_adc_unclamped(int code) {
    require_code(code, "temperature_from_adc");
    return code * 500 / 1024;
}

TemperatureC temperature_from_adc(int code) {
    return TemperatureC{std::clamp(temperature_from_adc_unclamped(code), 0, kTemperatureMaxC)};
}

}  // namespace vtms
