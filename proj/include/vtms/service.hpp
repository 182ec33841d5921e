#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <deque>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "vtms/simulation.hpp"

namespace vtms {

enum class ControlKind { SetTimeScale, Pause, Resume };

std::string_view to_string(ControlKind kind);

/// Operator command as received on the wire: either a simulation event
/// (applied at the next tick boundary) or loop control (applied at once).
struct Command {
    std::variant<EventKind, ControlKind> kind = EventKind::MainsOn;
    double value = 0.0;
    Button button = Button::Set;

    friend bool operator==(const Command&, const Command&) = default;
};

class CommandError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Validates `{kind, value?}`; throws CommandError with the reason.
Command parse_command(const nlohmann::json& j);
nlohmann::json command_to_json(const Command& command);

struct Acknowledgment {
    bool accepted = false;
    std::string detail;
    std::optional<double> applied_at_t_s;
};

nlohmann::json to_json(const Acknowledgment& ack);

struct Snapshot {
    double t_s = 0.0;
    double time_scale = 0.0;
    bool paused = false;
    std::array<std::string, kLcdRows> lcd;
    LedSet leds{};
    bool genset_start = false;
    bool bypass_active = false;
    bool mains_on = true;
    double soc = 0.0;
    double fuel_l = 0.0;
    double room_temp_c = 0.0;
    GensetStatus genset_state = GensetStatus::Off;
    ControllerMode mode = ControllerMode::MainsPowered;
    std::string battery_text;
    int temperature_c = 0;
    double service_runtime_s = 0.0;
    Settings settings{};
};

nlohmann::json to_json(const Snapshot& snapshot);

/// Owns one Simulation and advances it either manually (advance_ticks) or
/// paced against the wall clock (run). Commands queue to tick boundaries;
/// snapshots are immutable copies taken between ticks.
class LiveSimulation {
public:
    LiveSimulation(Simulation sim, double time_scale, std::vector<ScenarioEvent> scheduled = {},
                   milliseconds trace_window = milliseconds{24 * 3600 * 1000});

    std::future<Acknowledgment> submit(const Command& command);

    std::shared_ptr<const Snapshot> snapshot() const;

    /// CSV (with header) of buffered rows with from_s <= t_s <= to_s.
    std::string trace_csv(std::optional<double> from_s, std::optional<double> to_s) const;

    /// Buffered rows, oldest first.
    std::vector<TraceRow> trace_rows() const;

    void advance_ticks(std::size_t count);

    /// Paced loop; returns when the token is stopped.
    void run(std::stop_token stop);

    bool paused() const { return paused_.load(); }
    double time_scale() const { return time_scale_.load(); }

    /// Flushes persisted counters.
    void shutdown();

private:
    struct Pending {
        Command command;
        std::promise<Acknowledgment> done;
    };

    void step_locked();
    void publish_locked();

    mutable std::mutex mutex_;
    Simulation sim_;
    std::vector<ScenarioEvent> scheduled_;
    std::size_t next_scheduled_ = 0;
    std::deque<Pending> queue_;
    std::deque<TraceRow> trace_;
    std::size_t trace_capacity_;
    std::shared_ptr<const Snapshot> snapshot_;
    std::atomic<double> time_scale_;
    std::atomic<bool> paused_{false};
    std::atomic<std::uint64_t> pacing_epoch_{0};
};

struct ServeConfig {
    int port = 8080;
    std::string host = "0.0.0.0";
    double time_scale = 60.0;
    double stream_hz = 10.0;
    std::optional<std::string> scenario_path;
    std::string state_file = "vtms-state";
};

/// Binds, serves the HTTP API and runs the paced loop until stop is
/// requested. Throws std::runtime_error if the port cannot be bound.
void serve(const ServeConfig& config, std::stop_token stop);

class HttpServer {
public:
    HttpServer(LiveSimulation& live, double stream_hz);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Returns the bound port (useful with port 0). Throws if busy.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace vtms
