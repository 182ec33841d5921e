#include "vtms/lcd.hpp"

#include <algorithm>

#include "vtms/presets.hpp"

namespace vtms {

namespace {

constexpr std::array<std::string_view, kAlarmCount> kAlarmNames = {
    "MAINS FAIL", "LOW FUEL", "GENSET ON LOAD", "HIGH TEMP", "GENSET FAULT", "SERVICE HOUR"};

std::string pad(std::string s) {
    s.resize(kLcdCols, ' ');
    return s;
}

std::string right(std::string_view s, std::size_t width) {
    std::string out;
    if (s.size() < width) out.assign(width - s.size(), ' ');
    out += s;
    return out;
}

std::string left(std::string_view s, std::size_t width) {
    std::string out(s.substr(0, width));
    out.resize(width, ' ');
    return out;
}

}  // namespace

std::string_view source_tag(ControllerMode mode) {
    switch (mode) {
    case ControllerMode::MainsPowered: return "MAIN";
    case ControllerMode::BatteryPhase: return "BATT";
    case ControllerMode::GensetCranking: return "CRNK";
    case ControllerMode::GensetPhase: return "GEN";
    case ControllerMode::GensetCooldown: return "COOL";
    }
    return "?";
}

std::string_view alarm_display_name(std::size_t index) { return kAlarmNames.at(index); }

LcdFrame render_main(const DisplayVoltage& battery, TemperatureC temperature, ControllerMode mode,
                     const AlarmSet& alarms) {
    LcdFrame f;
    f.lines[0] = pad("VTMS  BATT: " + right(battery.text, 4) + "V");
    f.lines[1] = pad("TEMP: " + right(std::to_string(temperature.celsius), 3) + "C  SRC:" +
                     left(source_tag(mode), 4));

    const auto bits = alarms.bits();
    const auto first = std::find(bits.begin(), bits.end(), true);
    if (first == bits.end()) {
        f.lines[2] = pad("STATUS: NORMAL");
        f.lines[3] = pad("");
    } else {
        f.lines[2] = pad("ALM: " + std::string(kAlarmNames[static_cast<std::size_t>(first - bits.begin())]));
        const std::size_t more = alarms.active_count() - 1;
        if (more == 0) {
            f.lines[3] = pad("");
        } else {
            f.lines[3] = pad("+" + std::to_string(more) + (more == 1 ? " MORE ALARM" : " MORE ALARMS"));
        }
    }
    return f;
}

LcdFrame render_settings(const Settings& settings, const ScreenCursor& cursor) {
    const auto fields = preset_fields();
    const int count = static_cast<int>(fields.size());

    LcdFrame f;
    auto two_digits = [](int n) { return n < 10 ? "0" + std::to_string(n) : std::to_string(n); };
    f.lines[0] = pad("SETTINGS" + right(two_digits(cursor.field + 1) + "/" + two_digits(count), 12));

    for (int row = 0; row < 3; ++row) {
        const int index = cursor.window_top + row;
        if (index < 0 || index >= count) {
            f.lines[static_cast<std::size_t>(row + 1)] = pad("");
            continue;
        }
        const PresetField& field = fields[static_cast<std::size_t>(index)];
        const bool selected = index == cursor.field;
        const bool editing = selected && cursor.pending.has_value();
        const std::int64_t raw = editing ? *cursor.pending : field.get(settings);

        std::string line;
        line += selected ? '>' : ' ';
        line += left(field.label, 11);
        line += right(format_preset_value(field, raw), 5);
        line += field.unit;
        line += editing ? '*' : ' ';
        f.lines[static_cast<std::size_t>(row + 1)] = pad(std::move(line));
    }
    return f;
}

LcdFrame render(const ControllerState& state) {
    if (state.ui.screen == Screen::Settings) return render_settings(state.settings, state.ui);
    return render_main(state.last_battery, state.last_temperature, state.mode, state.last_alarms);
}

bool is_well_formed(const LcdFrame& frame) {
    return std::all_of(frame.lines.begin(), frame.lines.end(), [](const std::string& line) {
        return line.size() == kLcdCols &&
               std::all_of(line.begin(), line.end(), [](char c) { return c >= 0x20 && c < 0x7f; });
    });
}

}  // namespace vtms
