// vtms: batch scenario runner, self test and live service.

#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "vtms/selftest.hpp"
#include "vtms/service.hpp"
#include "vtms/simulation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitInvariant = 2;

int cmd_run(const std::string& scenario_path, const std::string& trace_path, std::optional<double> until_s,
            std::optional<std::string> state_path) {
    const vtms::Scenario scenario = vtms::load_scenario_file(scenario_path);

    std::optional<vtms::CounterStore> store;
    if (state_path) store.emplace(*state_path);

    vtms::RunOptions options;
    if (until_s) options.until = vtms::milliseconds{std::llround(*until_s * 1000.0)};
    options.store = store ? &*store : nullptr;

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (trace_path != "-") {
        file.open(trace_path, std::ios::binary | std::ios::trunc);
        if (!file) {
            std::cerr << "vtms: cannot open trace file '" << trace_path << "'\n";
            return kExitValidation;
        }
        out = &file;
    }
    vtms::TraceWriter writer(*out);
    const auto summary = vtms::run_scenario(scenario, options, [&](const vtms::TraceRow& row) { writer.write(row); });
    writer.flush();

    for (const auto& ev : summary.events) {
        if (!ev.applied_at_ms) {
            std::cerr << "vtms: event " << vtms::to_string(ev.event.kind) << " at t=" << ev.event.t.count() / 1000.0
                      << " s " << ev.note << '\n';
        }
    }
    std::cerr << "vtms: " << scenario.name << ": " << summary.ticks << " ticks\n";
    return kExitOk;
}

int cmd_selftest() {
    bool ok = true;
    for (const auto& check : vtms::run_selftest()) {
        std::cout << (check.passed ? "PASS  " : "FAIL  ") << check.name;
        if (!check.detail.empty()) std::cout << "  (" << check.detail << ')';
        std::cout << '\n';
        ok = ok && check.passed;
    }
    return ok ? kExitOk : kExitInvariant;
}

int cmd_serve(const vtms::ServeConfig& config) {
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    std::stop_source stop;
    std::jthread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        stop.request_stop();
    });
    vtms::serve(config, stop.get_token());
    if (!stop.stop_requested()) {
        stop.request_stop();
    }
    pthread_kill(waiter.native_handle(), SIGTERM);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"VTMS controller and BTS room simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string trace_path;
    std::optional<double> until_s;
    std::optional<std::string> run_state;
    auto* run = app.add_subcommand("run", "Run a scenario in batch and write the CSV trace");
    run->add_option("scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
    run->add_option("--trace", trace_path, "Output CSV ('-' for stdout)")->required();
    run->add_option("--until", until_s, "Stop at this simulated time (s)");
    run->add_option("--state", run_state, "State file for persisted counters");

    app.add_subcommand("selftest", "Exhaustive conversion oracle and invariant checks");

    vtms::ServeConfig serve_config;
    std::string serve_scenario;
    auto* serve = app.add_subcommand("serve", "Run the live simulation behind an HTTP API");
    serve->add_option("--port", serve_config.port, "Listen port")->capture_default_str();
    serve->add_option("--host", serve_config.host, "Listen address")->capture_default_str();
    serve->add_option("--time-scale", serve_config.time_scale, "Simulated seconds per wall second")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    serve->add_option("--stream-hz", serve_config.stream_hz, "Event stream cadence")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    serve->add_option("--scenario", serve_scenario, "Initial scenario")->check(CLI::ExistingFile);
    serve->add_option("--state", serve_config.state_file, "State file")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*run) return cmd_run(scenario_path, trace_path, until_s, run_state);
        if (app.got_subcommand("selftest")) return cmd_selftest();
        if (*serve) {
            if (!serve_scenario.empty()) serve_config.scenario_path = serve_scenario;
            return cmd_serve(serve_config);
        }
    } catch (const vtms::ScenarioError& e) {
        std::cerr << "vtms: " << e.what() << '\n';
        return kExitValidation;
    } catch (const vtms::ConfigError& e) {
        std::cerr << "vtms: " << e.what() << '\n';
        return kExitValidation;
    } catch (const vtms::InvariantViolation& e) {
        std::cerr << "vtms: invariant violated: " << e.what() << '\n';
        return kExitInvariant;
    } catch (const vtms::ContractViolation& e) {
        std::cerr << "vtms: invariant violated: " << e.what() << '\n';
        return kExitInvariant;
    } catch (const std::exception& e) {
        std::cerr << "vtms: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitOk;
}
