#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vtms/controller.hpp"
#include "vtms/counters.hpp"
#include "vtms/lcd.hpp"
#include "vtms/plant.hpp"
#include "vtms/scenario.hpp"
#include "vtms/trace.hpp"
#include "vtms/watchdog.hpp"

namespace vtms {

/// A runtime check on the closed loop failed; the run cannot be trusted.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct EventOutcome {
    bool changed = false;
    std::string note;
};

/// Controller, plant and watchdog stepped in lockstep at the scan period.
/// Each tick: plant_step (genset relay OR bypass) -> controller_scan unless
/// hung -> watchdog_step -> trace row.
class Simulation {
public:
    /// persisted is what the store held at start; its settings (if any) are
    /// the operator-committed ones and are the only settings written back.
    Simulation(const Settings& settings, const PlantParams& params, const PersistedCounters& persisted = {},
               CounterStore* store = nullptr);

    /// Applies immediately, i.e. at the current tick boundary.
    EventOutcome apply(const ScenarioEvent& event);

    const TraceRow& step();

    /// Writes the persisted counters if anything changed since the last write.
    void flush_counters();

    std::int64_t now_ms() const { return plant_.t_ms; }
    milliseconds tick() const { return tick_; }
    const ControllerState& controller() const { return controller_; }
    const ControllerOutputs& outputs() const { return outputs_; }
    const PlantState& plant() const { return plant_; }
    const PlantParams& params() const { return params_; }
    const WatchdogState& watchdog() const { return watchdog_; }
    const TraceRow& last_row() const { return row_; }
    /// Blank while the controller is down.
    LcdFrame frame() const;

private:
    void check_invariants(const ControllerState& before, bool scanned) const;
    void maybe_persist(bool force);
    PersistedCounters current_counters() const;

    PlantParams params_;
    milliseconds tick_;
    ControllerState controller_;
    ControllerOutputs outputs_{};
    PlantState plant_;
    WatchdogState watchdog_{};
    TraceRow row_{};
    CounterStore* store_;
    std::optional<PersistedCounters> persisted_;
    std::optional<Settings> committed_settings_;
    bool runtime_reset_ = false;
};

/// Builds a simulation for a scenario. With a store, persisted settings sit
/// under the scenario overrides and the persisted runtime seeds the
/// service-hour counter. Throws ScenarioError on invalid combinations.
Simulation make_simulation(const Scenario& scenario, CounterStore* store = nullptr);

struct AppliedEvent {
    ScenarioEvent event;
    std::optional<std::int64_t> applied_at_ms;
    std::string note;
};

struct RunOptions {
    std::optional<milliseconds> until;
    CounterStore* store = nullptr;
};

struct RunSummary {
    std::size_t ticks = 0;
    std::vector<AppliedEvent> events;
};

using RowSink = std::function<void(const TraceRow&)>;

RunSummary run_scenario(const Scenario& scenario, const RunOptions& options, const RowSink& sink);

struct RunResult {
    std::vector<TraceRow> rows;
    std::vector<AppliedEvent> events;
};

RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

}  // namespace vtms
