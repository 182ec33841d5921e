#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include "vtms/controller.hpp"

namespace vtms {

/// One simulation tick as recorded in the CSV trace. t_ms is the simulated
/// time at the end of the tick.
struct TraceRow {
    std::int64_t t_ms = 0;
    ControllerMode mode = ControllerMode::MainsPowered;
    bool mains_fail = false;
    bool low_fuel = false;
    bool genset_cmd = false;
    bool genset_supply = false;
    bool bypass_active = false;
    std::string battery_display;
    int temperature_c = 0;
    double soc = 0.0;
    double fuel_l = 0.0;
    double room_temp_c = 0.0;
    AlarmSet alarms{};

    double t_s() const { return static_cast<double>(t_ms) / 1000.0; }

    friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

std::string_view trace_header();

/// Appends one CSV line (with trailing newline). Reals are printed with a
/// fixed number of decimals, correctly rounded, so output is identical on
/// every conforming platform.
void append_csv_row(std::string& out, const TraceRow& row);

void write_trace(std::span<const TraceRow> rows, std::ostream& out);

/// Streaming writer for long runs.
class TraceWriter {
public:
    explicit TraceWriter(std::ostream& out);
    void write(const TraceRow& row);
    void flush();

private:
    std::ostream& out_;
    std::string buffer_;
};

}  // namespace vtms
