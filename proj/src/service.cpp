#include "vtms/service.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include "vtms/log.hpp"
#include "vtms/settings_json.hpp"

namespace vtms {

using nlohmann::json;

std::string_view to_string(ControlKind kind) {
    switch (kind) {
    case ControlKind::SetTimeScale: return "SetTimeScale";
    case ControlKind::Pause: return "Pause";
    case ControlKind::Resume: return "Resume";
    }
    return "?";
}

namespace {

std::optional<ControlKind> control_from_string(std::string_view name) {
    for (auto k : {ControlKind::SetTimeScale, ControlKind::Pause, ControlKind::Resume}) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

std::string kind_name(const Command& c) {
    return std::visit([](auto k) { return std::string(to_string(k)); }, c.kind);
}

json leds_to_json(const LedSet& leds) {
    json j;
    const auto bits = leds.alarms.bits();
    for (std::size_t i = 0; i < kAlarmCount; ++i) j[std::string(kAlarmKeys[i])] = bits[i];
    j["on_battery"] = leds.on_battery;
    j["on_genset"] = leds.on_genset;
    return j;
}

double ms_to_s(std::int64_t ms) { return static_cast<double>(ms) / 1000.0; }

}  // namespace

Command parse_command(const json& j) {
    if (!j.is_object()) throw CommandError("command must be a JSON object");
    auto kind_it = j.find("kind");
    if (kind_it == j.end() || !kind_it->is_string()) throw CommandError("command needs a string 'kind'");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() != "kind" && it.key() != "value") throw CommandError("unknown command field '" + it.key() + "'");
    }
    const auto name = kind_it->get<std::string>();
    const auto value_it = j.find("value");
    const bool has_value = value_it != j.end() && !value_it->is_null();

    Command c;
    PayloadKind payload = PayloadKind::None;
    if (auto ev = event_kind_from_string(name)) {
        c.kind = *ev;
        payload = payload_kind(*ev);
    } else if (auto ctl = control_from_string(name)) {
        c.kind = *ctl;
        payload = *ctl == ControlKind::SetTimeScale ? PayloadKind::Number : PayloadKind::None;
    } else {
        throw CommandError("unknown command kind '" + name + "'; valid kinds: " + valid_event_kinds_list() +
                           ", SetTimeScale, Pause, Resume");
    }

    if (payload == PayloadKind::None) {
        if (has_value) throw CommandError(name + " takes no value");
        return c;
    }
    if (!has_value) throw CommandError(name + " requires a value");
    if (payload == PayloadKind::Button) {
        if (!value_it->is_string()) throw CommandError("button must be one of Up, Down, Set, Back");
        auto b = button_from_string(value_it->get<std::string>());
        if (!b) throw CommandError("button must be one of Up, Down, Set, Back");
        c.button = *b;
        return c;
    }
    if (!value_it->is_number()) throw CommandError(name + " requires a numeric value");
    c.value = value_it->get<double>();
    if (!std::isfinite(c.value)) throw CommandError(name + " requires a finite value");
    if (const auto* ev = std::get_if<EventKind>(&c.kind)) {
        if (*ev == EventKind::SetFuel && c.value < 0.0) throw CommandError("fuel must be ≥ 0");
        if (*ev == EventKind::SetAmbient && c.value < 0.0) throw CommandError("ambient must be ≥ 0");
        if (*ev == EventKind::SetTrimmerGain && !(c.value > 0.0)) throw CommandError("trimmer gain must be > 0");
    } else if (!(c.value > 0.0)) {
        throw CommandError("time scale must be > 0");
    }
    return c;
}

json command_to_json(const Command& c) {
    json j{{"kind", kind_name(c)}};
    if (const auto* ev = std::get_if<EventKind>(&c.kind)) {
        if (payload_kind(*ev) == PayloadKind::Number) j["value"] = c.value;
        if (payload_kind(*ev) == PayloadKind::Button) j["value"] = std::string(to_string(c.button));
    } else if (std::get<ControlKind>(c.kind) == ControlKind::SetTimeScale) {
        j["value"] = c.value;
    }
    return j;
}

json to_json(const Acknowledgment& ack) {
    json j{{"accepted", ack.accepted}, {"detail", ack.detail}};
    if (ack.applied_at_t_s) j["applied_at_t_s"] = *ack.applied_at_t_s;
    return j;
}

json to_json(const Snapshot& s) {
    return json{
        {"t_s", s.t_s},
        {"time_scale", s.time_scale},
        {"paused", s.paused},
        {"lcd", s.lcd},
        {"leds", leds_to_json(s.leds)},
        {"relays", {{"genset_start", s.genset_start}, {"bypass_active", s.bypass_active}}},
        {"plant",
         {{"mains_on", s.mains_on},
          {"soc", s.soc},
          {"fuel_l", s.fuel_l},
          {"room_temp_c", s.room_temp_c},
          {"genset_state", std::string(to_string(s.genset_state))}}},
        {"controller",
         {{"mode", std::string(to_string(s.mode))},
          {"battery_text", s.battery_text},
          {"temperature_c", s.temperature_c},
          {"service_runtime_s", s.service_runtime_s}}},
        {"settings", settings_to_json(s.settings)},
    };
}

LiveSimulation::LiveSimulation(Simulation sim, double time_scale, std::vector<ScenarioEvent> scheduled,
                               milliseconds trace_window)
    : sim_(std::move(sim)),
      scheduled_(std::move(scheduled)),
      trace_capacity_(static_cast<std::size_t>(std::max<std::int64_t>(1, trace_window / sim_.tick()))),
      time_scale_(time_scale) {
    std::lock_guard lock(mutex_);
    publish_locked();
}

std::future<Acknowledgment> LiveSimulation::submit(const Command& command) {
    std::promise<Acknowledgment> done;
    auto future = done.get_future();
    std::lock_guard lock(mutex_);
    if (const auto* ctl = std::get_if<ControlKind>(&command.kind)) {
        switch (*ctl) {
        case ControlKind::Pause: paused_ = true; break;
        case ControlKind::Resume: paused_ = false; break;
        case ControlKind::SetTimeScale: time_scale_ = command.value; break;
        }
        ++pacing_epoch_;
        publish_locked();
        done.set_value({true, std::string(to_string(*ctl)) + " applied", ms_to_s(sim_.now_ms())});
        return future;
    }
    queue_.push_back({command, std::move(done)});
    return future;
}

std::shared_ptr<const Snapshot> LiveSimulation::snapshot() const {
    std::lock_guard lock(mutex_);
    return snapshot_;
}

std::vector<TraceRow> LiveSimulation::trace_rows() const {
    std::lock_guard lock(mutex_);
    return {trace_.begin(), trace_.end()};
}

std::string LiveSimulation::trace_csv(std::optional<double> from_s, std::optional<double> to_s) const {
    std::string out(trace_header());
    out += '\n';
    std::lock_guard lock(mutex_);
    for (const auto& row : trace_) {
        const double t = row.t_s();
        if (from_s && t < *from_s) continue;
        if (to_s && t > *to_s) break;
        append_csv_row(out, row);
    }
    return out;
}

void LiveSimulation::step_locked() {
    while (next_scheduled_ < scheduled_.size() && scheduled_[next_scheduled_].t.count() <= sim_.now_ms()) {
        sim_.apply(scheduled_[next_scheduled_++]);
    }
    while (!queue_.empty()) {
        Pending p = std::move(queue_.front());
        queue_.pop_front();
        ScenarioEvent ev;
        ev.t = milliseconds{sim_.now_ms()};
        ev.kind = std::get<EventKind>(p.command.kind);
        ev.value = p.command.value;
        ev.button = p.command.button;
        try {
            auto outcome = sim_.apply(ev);
            p.done.set_value({true, outcome.changed ? "applied" : outcome.note, ms_to_s(sim_.now_ms())});
        } catch (const std::exception& e) {
            p.done.set_value({false, e.what(), std::nullopt});
        }
    }
    trace_.push_back(sim_.step());
    if (trace_.size() > trace_capacity_) trace_.pop_front();
}

void LiveSimulation::publish_locked() {
    auto s = std::make_shared<Snapshot>();
    const auto& ctl = sim_.controller();
    const auto& plant = sim_.plant();
    const auto& out = sim_.outputs();
    s->t_s = ms_to_s(sim_.now_ms());
    s->time_scale = time_scale_;
    s->paused = paused_;
    s->lcd = sim_.frame().lines;
    s->leds = out.leds;
    s->genset_start = out.genset_start;
    s->bypass_active = sim_.watchdog().bypass_active;
    s->mains_on = plant.mains_on;
    s->soc = plant.soc;
    s->fuel_l = plant.fuel_l;
    s->room_temp_c = plant.room_temp_c;
    s->genset_state = plant.genset.status;
    s->mode = ctl.mode;
    s->battery_text = ctl.last_battery.text;
    s->temperature_c = ctl.last_temperature.celsius;
    s->service_runtime_s = ms_to_s(ctl.genset_runtime_total.count());
    s->settings = ctl.settings;
    snapshot_ = std::move(s);
}

void LiveSimulation::advance_ticks(std::size_t count) {
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < count; ++i) step_locked();
    publish_locked();
}

void LiveSimulation::run(std::stop_token stop) {
    using clock = std::chrono::steady_clock;
    constexpr std::size_t kBurst = 2000;

    auto origin_wall = clock::now();
    std::int64_t origin_sim = 0;
    std::uint64_t epoch = ~std::uint64_t{0};

    while (!stop.stop_requested()) {
        if (epoch != pacing_epoch_.load()) {
            std::lock_guard lock(mutex_);
            epoch = pacing_epoch_.load();
            origin_wall = clock::now();
            origin_sim = sim_.now_ms();
        }
        if (paused_) {
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
            continue;
        }
        const double wall_s = std::chrono::duration<double>(clock::now() - origin_wall).count();
        const auto target = origin_sim + static_cast<std::int64_t>(wall_s * time_scale_.load() * 1000.0);
        {
            std::lock_guard lock(mutex_);
            std::size_t stepped = 0;
            // Falls behind rather than skipping ticks.
            while (sim_.now_ms() + sim_.tick().count() <= target && stepped < kBurst && !paused_ &&
                   epoch == pacing_epoch_.load()) {
                step_locked();
                ++stepped;
            }
            if (stepped > 0) publish_locked();
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
}

void LiveSimulation::shutdown() {
    std::lock_guard lock(mutex_);
    sim_.flush_counters();
    for (auto& p : queue_) p.done.set_value({false, "service shutting down", std::nullopt});
    queue_.clear();
}

}  // namespace vtms
