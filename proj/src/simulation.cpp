#include "vtms/simulation.hpp"

#include <algorithm>

#include "vtms/log.hpp"

namespace vtms {

namespace {

constexpr milliseconds kPersistGranularity{60000};

}  // namespace

Simulation::Simulation(const Settings& settings, const PlantParams& params, const PersistedCounters& persisted,
                       CounterStore* store)
    : params_(params),
      tick_(settings.scan_period_ms),
      controller_(controller_init(settings, persisted.service_runtime)),
      plant_(plant_initial_state(params)),
      store_(store),
      committed_settings_(persisted.settings) {
    validate(params_);
    row_.battery_display = controller_.last_battery.text;
    row_.soc = plant_.soc;
    row_.fuel_l = plant_.fuel_l;
    row_.room_temp_c = plant_.room_temp_c;
    if (store_) persisted_ = persisted;
}

EventOutcome Simulation::apply(const ScenarioEvent& event) {
    EventOutcome outcome;
    if (auto plant_kind = as_plant_event(event.kind)) {
        const PlantState before = plant_;
        plant_ = apply_event(plant_, params_, PlantEvent{*plant_kind, event.value});
        outcome.changed = !(before == plant_);
    } else if (event.kind == EventKind::PressButton) {
        if (plant_.controller_hung) {
            outcome.note = "controller is down; button ignored";
        } else {
            const ControllerState before = controller_;
            controller_ = apply_button(controller_, event.button);
            outcome.changed = !(before == controller_);
            if (before.settings != controller_.settings) {
                committed_settings_ = controller_.settings;
                maybe_persist(true);
            }
        }
    } else if (event.kind == EventKind::ResetServiceHours) {
        outcome.changed = controller_.genset_runtime_total.count() != 0;
        controller_ = reset_service_hours(controller_);
        runtime_reset_ = true;
        maybe_persist(true);
    }
    if (!outcome.changed && outcome.note.empty()) outcome.note = "no-op";
    if (!outcome.changed) {
        log_notice(std::string(to_string(event.kind)) + " at t=" + std::to_string(now_ms()) + " ms: " +
                   outcome.note);
    }
    return outcome;
}

const TraceRow& Simulation::step() {
    const bool bypass = watchdog_.bypass_active;
    const bool genset_cmd = outputs_.genset_start || bypass;

    auto [plant, inputs] = plant_step(plant_, params_, genset_cmd, tick_);
    plant_ = std::move(plant);

    const ControllerState before = controller_;
    const bool scanned = !plant_.controller_hung;
    if (scanned) {
        auto result = controller_scan(std::move(controller_), inputs, tick_);
        controller_ = std::move(result.state);
        outputs_ = result.outputs;
    } else {
        // Controller is down: every relay drops out, no heartbeat.
        outputs_ = ControllerOutputs{};
    }
    watchdog_ = watchdog_step(watchdog_, outputs_.heartbeat, tick_);
    plant_.bypass_active = watchdog_.bypass_active;

    check_invariants(before, scanned);

    row_.t_ms = plant_.t_ms;
    row_.mode = controller_.mode;
    row_.mains_fail = inputs.mains_fail;
    row_.low_fuel = inputs.low_fuel;
    row_.genset_cmd = genset_cmd;
    row_.genset_supply = inputs.genset_supply_present;
    row_.bypass_active = watchdog_.bypass_active;
    row_.battery_display = controller_.last_battery.text;
    row_.temperature_c = controller_.last_temperature.celsius;
    row_.soc = plant_.soc;
    row_.fuel_l = plant_.fuel_l;
    row_.room_temp_c = plant_.room_temp_c;
    row_.alarms = outputs_.alarms;

    maybe_persist(false);
    return row_;
}

void Simulation::check_invariants(const ControllerState& before, bool scanned) const {
    if (!scanned) return;
    const Settings& cfg = controller_.settings;
    if (!outputs_.heartbeat) throw InvariantViolation("completed scan without heartbeat");
    if (outputs_.leds.alarms != outputs_.alarms) throw InvariantViolation("alarm LEDs disagree with alarm relays");
    const milliseconds phase_cap = std::max<milliseconds>(cfg.battery_phase_s, cfg.genset_phase_s) + tick_;
    if (controller_.phase_elapsed > phase_cap) throw InvariantViolation("phase timer overran its bound");
    if (controller_.crank_attempt > cfg.crank_attempts_max) throw InvariantViolation("crank attempts overran");
    if (controller_.genset_runtime_total < before.genset_runtime_total) {
        throw InvariantViolation("service runtime decreased without a reset");
    }
    if (plant_.genset.status == GensetStatus::Running && !(plant_.fuel_l > 0.0)) {
        throw InvariantViolation("genset running on an empty tank");
    }
}

LcdFrame Simulation::frame() const {
    if (plant_.controller_hung) return LcdFrame{{std::string(kLcdCols, ' '), std::string(kLcdCols, ' '),
                                                 std::string(kLcdCols, ' '), std::string(kLcdCols, ' ')}};
    return render(controller_);
}

PersistedCounters Simulation::current_counters() const {
    return {controller_.genset_runtime_total, committed_settings_};
}

void Simulation::maybe_persist(bool force) {
    if (!store_ || !persisted_) return;
    const PersistedCounters now = current_counters();
    const bool due = force || runtime_reset_ || now.settings != persisted_->settings ||
                     now.service_runtime / kPersistGranularity !=
                         persisted_->service_runtime / kPersistGranularity;
    if (!due) return;
    store_->persist(now);
    persisted_ = now;
    runtime_reset_ = false;
}

void Simulation::flush_counters() {
    if (!store_ || !persisted_) return;
    if (current_counters() != *persisted_) maybe_persist(true);
}

Simulation make_simulation(const Scenario& scenario, CounterStore* store) {
    PersistedCounters persisted;
    if (store) persisted = store->restore();
    const Settings settings = scenario.settings_overrides.applied_to(persisted.settings.value_or(Settings{}));
    validate(scenario, settings);
    return Simulation(settings, scenario.plant, persisted, store);
}

RunSummary run_scenario(const Scenario& scenario, const RunOptions& options, const RowSink& sink) {
    Simulation sim = make_simulation(scenario, options.store);
    const std::int64_t end_ms = options.until ? std::min(options.until->count(), scenario.duration.count())
                                              : scenario.duration.count();

    RunSummary summary;
    summary.events.reserve(scenario.events.size());
    std::size_t next = 0;
    while (sim.now_ms() + sim.tick().count() <= end_ms) {
        while (next < scenario.events.size() && scenario.events[next].t.count() <= sim.now_ms()) {
            const auto& ev = scenario.events[next++];
            auto outcome = sim.apply(ev);
            summary.events.push_back({ev, sim.now_ms(), std::move(outcome.note)});
        }
        sink(sim.step());
        ++summary.ticks;
    }
    for (; next < scenario.events.size(); ++next) {
        summary.events.push_back({scenario.events[next], std::nullopt, "not applied: run ended first"});
    }
    sim.flush_counters();
    return summary;
}

RunResult run_scenario(const Scenario& scenario, const RunOptions& options) {
    RunResult result;
    result.rows.reserve(static_cast<std::size_t>(scenario.duration / scenario.tick));
    auto summary = run_scenario(scenario, options, [&](const TraceRow& row) { result.rows.push_back(row); });
    result.events = std::move(summary.events);
    return result;
}

}  // namespace vtms
