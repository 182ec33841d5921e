#include "vtms/log.hpp"

#include <iostream>
#include <mutex>
#include <string>

namespace vtms {

namespace {

std::mutex g_mutex;

void stderr_sink(std::string_view level, std::string_view message) {
    std::cerr << "vtms: " << level << ": " << message << '\n';
}

LogSink& sink() {
    static LogSink s = stderr_sink;
    return s;
}

void emit(std::string_view level, std::string_view message) {
    std::lock_guard lock(g_mutex);
    if (sink()) sink()(level, message);
}

}  // namespace

LogSink set_log_sink(LogSink s) {
    std::lock_guard lock(g_mutex);
    return std::exchange(sink(), std::move(s));
}

void log_warning(std::string_view message) { emit("warning", message); }
void log_notice(std::string_view message) { emit("notice", message); }

}  // namespace vtms
