#include "vtms/trace.hpp"

#include <charconv>
#include <cstdlib>

namespace vtms {

namespace {

void put_fixed(std::string& out, double value, int decimals) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, decimals);
    if (ec != std::errc{}) std::abort();
    std::string_view text(buf, static_cast<std::size_t>(end - buf));
    // Never print "-0.000".
    if (text.front() == '-' && text.find_first_not_of("-0.") == std::string_view::npos) text.remove_prefix(1);
    out += text;
}

void put_bool(std::string& out, bool b) {
    out += b ? '1' : '0';
    out += ',';
}

}  // namespace

std::string_view trace_header() {
    return "t_s,mode,mains_fail,low_fuel,genset_cmd,genset_supply,bypass_active,battery_display,"
           "temperature_c,soc,fuel_l,room_temp_c,alarm_mains_fail,alarm_low_fuel,"
           "alarm_genset_on_load,alarm_high_temperature,alarm_genset_fault,alarm_service_hour";
}

void append_csv_row(std::string& out, const TraceRow& r) {
    out += std::to_string(r.t_ms / 1000);
    out += '.';
    const auto millis = std::to_string(r.t_ms % 1000);
    out.append(3 - millis.size(), '0');
    out += millis;
    out += ',';
    out += to_string(r.mode);
    out += ',';
    put_bool(out, r.mains_fail);
    put_bool(out, r.low_fuel);
    put_bool(out, r.genset_cmd);
    put_bool(out, r.genset_supply);
    put_bool(out, r.bypass_active);
    out += r.battery_display;
    out += ',';
    out += std::to_string(r.temperature_c);
    out += ',';
    put_fixed(out, r.soc, 6);
    out += ',';
    put_fixed(out, r.fuel_l, 4);
    out += ',';
    put_fixed(out, r.room_temp_c, 3);
    for (bool bit : r.alarms.bits()) {
        out += ',';
        out += bit ? '1' : '0';
    }
    out += '\n';
}

void write_trace(std::span<const TraceRow> rows, std::ostream& out) {
    TraceWriter writer(out);
    for (const auto& row : rows) writer.write(row);
    writer.flush();
}

TraceWriter::TraceWriter(std::ostream& out) : out_(out) {
    out_ << trace_header() << '\n';
}

void TraceWriter::write(const TraceRow& row) {
    append_csv_row(buffer_, row);
    if (buffer_.size() > (1u << 16)) flush();
}

void TraceWriter::flush() {
    out_ << buffer_;
    buffer_.clear();
    out_.flush();
}

}  // namespace vtms
