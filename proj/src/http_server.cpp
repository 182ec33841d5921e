#include <chrono>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "vtms/log.hpp"
#include "vtms/service.hpp"

namespace vtms {

using nlohmann::json;

struct HttpServer::Impl {
    LiveSimulation& live;
    double stream_hz;
    httplib::Server server;

    Impl(LiveSimulation& l, double hz) : live(l), stream_hz(hz) {}
};

namespace {

void reply_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

std::optional<double> query_number(const httplib::Request& req, const char* key) {
    if (!req.has_param(key)) return std::nullopt;
    const auto text = req.get_param_value(key);
    if (text.empty()) return std::nullopt;
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(key);
    return v;
}

}  // namespace

HttpServer::HttpServer(LiveSimulation& live, double stream_hz) : impl_(std::make_unique<Impl>(live, stream_hz)) {
    auto& srv = impl_->server;
    Impl* self = impl_.get();

    srv.Get("/api/snapshot", [self](const httplib::Request&, httplib::Response& res) {
        reply_json(res, to_json(*self->live.snapshot()));
    });

    srv.Post("/api/command", [self](const httplib::Request& req, httplib::Response& res) {
        Command command;
        try {
            command = parse_command(json::parse(req.body));
        } catch (const json::exception& e) {
            reply_json(res, to_json(Acknowledgment{false, std::string("malformed JSON: ") + e.what(), {}}), 400);
            return;
        } catch (const CommandError& e) {
            reply_json(res, to_json(Acknowledgment{false, e.what(), {}}), 400);
            return;
        }
        auto future = self->live.submit(command);
        if (future.wait_for(std::chrono::seconds(2)) != std::future_status::ready) {
            reply_json(res, to_json(Acknowledgment{true, "queued for the next tick", {}}), 202);
            return;
        }
        const auto ack = future.get();
        reply_json(res, to_json(ack), ack.accepted ? 200 : 400);
    });

    srv.Get("/api/trace", [self](const httplib::Request& req, httplib::Response& res) {
        std::optional<double> from, to;
        try {
            from = query_number(req, "from_s");
            to = query_number(req, "to_s");
        } catch (const std::exception&) {
            res.status = 400;
            res.set_content("from_s and to_s must be numbers\n", "text/plain");
            return;
        }
        res.set_content(self->live.trace_csv(from, to), "text/csv");
    });

    srv.Get("/api/stream", [self](const httplib::Request&, httplib::Response& res) {
        const auto period = std::chrono::duration<double>(1.0 / std::max(0.1, self->stream_hz));
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider("text/event-stream", [self, period](std::size_t, httplib::DataSink& sink) {
            const std::string event = "data: " + to_json(*self->live.snapshot()).dump() + "\n\n";
            if (!sink.write(event.data(), event.size())) return false;
            std::this_thread::sleep_for(period);
            return sink.is_writable();
        });
    });
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) throw std::runtime_error("cannot bind " + host);
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port)) {
        throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port) + " (port busy?)");
    }
    return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

void serve(const ServeConfig& config, std::stop_token stop) {
    CounterStore store(config.state_file);
    Scenario scenario;
    scenario.name = "live";
    scenario.duration = milliseconds{1};
    if (config.scenario_path) scenario = load_scenario_file(*config.scenario_path);

    LiveSimulation live(make_simulation(scenario, &store), config.time_scale, scenario.events);
    HttpServer http(live, config.stream_hz);
    const int port = http.bind(config.host, config.port);
    std::ostringstream scale;
    scale << config.time_scale;
    log_notice("serving on " + config.host + ":" + std::to_string(port) + " at time scale " + scale.str());

    std::jthread loop([&live](std::stop_token st) { live.run(st); });
    std::jthread server([&http] { http.listen(); });
    std::stop_callback on_stop(stop, [&http] { http.stop(); });
    server.join();
    loop.request_stop();
    loop.join();
    live.shutdown();
}

}  // namespace vtms
