#pragma once

#include <array>
#include <string>
#include <string_view>

#include "vtms/controller.hpp"

namespace vtms {

inline constexpr std::size_t kLcdRows = 4;
inline constexpr std::size_t kLcdCols = 20;

/// A 4x20 character frame, each line space-padded to exactly 20 printable
/// ASCII characters.
struct LcdFrame {
    std::array<std::string, kLcdRows> lines;

    friend bool operator==(const LcdFrame&, const LcdFrame&) = default;
};

/// Four-character source tag shown on the main screen: MAIN, BATT, GEN, CRNK, COOL.
std::string_view source_tag(ControllerMode mode);

/// Alarm names as they appear after "ALM: ", in alarm-number order.
std::string_view alarm_display_name(std::size_t index);

LcdFrame render_main(const DisplayVoltage& battery, TemperatureC temperature, ControllerMode mode,
                     const AlarmSet& alarms);

LcdFrame render_settings(const Settings& settings, const ScreenCursor& cursor);

/// Whatever the unit currently shows for this controller state.
LcdFrame render(const ControllerState& state);

bool is_well_formed(const LcdFrame& frame);

}  // namespace vtms
