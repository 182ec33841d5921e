#include "vtms/counters.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vtms/log.hpp"
#include "vtms/settings_json.hpp"

namespace vtms {

using nlohmann::json;

std::string to_json_text(const PersistedCounters& c) {
    json j;
    j["service_runtime_s"] = static_cast<double>(c.service_runtime.count()) / 1000.0;
    if (c.settings) j["settings"] = settings_to_json(*c.settings);
    return j.dump(2) + "\n";
}

PersistedCounters counters_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("state file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("state file must hold a JSON object");
    PersistedCounters c;
    const auto runtime = j.find("service_runtime_s");
    if (runtime == j.end() || !runtime->is_number()) {
        throw ConfigError("state file lacks a numeric service_runtime_s");
    }
    const double s = runtime->get<double>();
    if (!std::isfinite(s) || s < 0.0) throw ConfigError("service_runtime_s must be a finite value >= 0");
    c.service_runtime = milliseconds{std::llround(s * 1000.0)};
    if (auto it = j.find("settings"); it != j.end()) {
        c.settings = settings_from_json(*it);
        validate(*c.settings);
    }
    return c;
}

CounterStore::CounterStore(std::filesystem::path path) : path_(std::move(path)) {}

PersistedCounters CounterStore::restore() const {
    std::ifstream in(path_);
    if (!in) {
        log_warning("state file '" + path_.string() + "' not found; starting with defaults");
        return {};
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return counters_from_json_text(buf.str());
    } catch (const std::exception& e) {
        log_warning("state file '" + path_.string() + "' unreadable (" + e.what() +
                    "); starting with defaults");
        return {};
    }
}

void CounterStore::persist(const PersistedCounters& counters) {
    if (last_written_ && *last_written_ == counters) return;
    auto tmp = path_;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) {
            log_warning("cannot write state file '" + tmp.string() + "'");
            return;
        }
        out << to_json_text(counters);
        if (!out.flush()) {
            log_warning("short write on state file '" + tmp.string() + "'");
            return;
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path_, ec);
    if (ec) {
        log_warning("cannot replace state file '" + path_.string() + "': " + ec.message());
        return;
    }
    last_written_ = counters;
}

}  // namespace vtms
