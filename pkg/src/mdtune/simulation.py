"""The simulation loop: tuning-driven force backend selection around a
velocity-Verlet integrator, with per-iteration timing records.

Loop order per iteration: positions drift with the previous forces,
boundaries apply, the tuning controller picks the configuration (running
trials at phase starts), the container rebuilds when due, forces are
computed and timed, velocities close the step, thermostat on its
interval. Initial forces are zero, so iteration 0 drifts ballistically.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .configuration import enumerate_configurations
from .containers import ForceCalculator, Workforce
from .integrator import (BlowUpError, apply_boundaries, apply_gravity,
                         apply_thermostat, current_temperature,
                         drift_with_force, finish_kick)
from .livestats import LiveStatistics, compute_live_stats
from .params import SimulationParams
from .particles import ParticleSet
from .scenarios import ScenarioSpec, generate_scenario
from .tuning import (FixedStrategy, FullSearchStrategy, PredictiveStrategy,
                     Strategy, TUNING_LOG_COLUMNS, TuningController)

REPORT_COLUMNS = ("iteration", "phaseIndex", "configurationId",
                  "forceTimeNanos", "buildTimeNanos")


@dataclass
class IterationRecord:
    iteration: int
    phase_index: int
    configuration_id: str
    force_ns: int
    build_ns: int


@dataclass
class SimulationReport:
    name: str = "simulation"
    records: list[IterationRecord] = field(default_factory=list)
    tuning_log: list = field(default_factory=list)
    phase_selections: list = field(default_factory=list)
    stats_snapshots: list = field(default_factory=list)
    trial_iterations: int = 0
    strategy_name: str = ""
    model_file: str | None = None
    final_temperature: float | None = None
    error: str | None = None

    @property
    def total_force_ns(self) -> int:
        return sum(r.force_ns for r in self.records)

    @property
    def total_build_ns(self) -> int:
        return sum(r.build_ns for r in self.records)

    def selections_by_phase(self) -> dict[int, str]:
        return dict(self.phase_selections)

    def summary(self) -> dict:
        doc = {
            "name": self.name,
            "strategy": self.strategy_name,
            "iterations": len(self.records),
            "totalForceTimeNanos": int(self.total_force_ns),
            "totalBuildTimeNanos": int(self.total_build_ns),
            "trialIterations": self.trial_iterations,
            "phaseSelections": [
                {"phaseIndex": p, "configurationId": c}
                for p, c in self.phase_selections],
            "liveStatistics": [
                {"phaseIndex": p, **_stats_dict(s)}
                for p, s in self.stats_snapshots],
        }
        if self.model_file:
            doc["modelFile"] = self.model_file
        if self.final_temperature is not None:
            doc["finalTemperature"] = self.final_temperature
        if self.error is not None:
            doc["error"] = self.error
        return doc


def _stats_dict(stats: LiveStatistics) -> dict:
    from .livestats import FEATURE_NAMES
    return dict(zip(FEATURE_NAMES, (float(v)
                                    for v in stats.feature_vector())))


def write_report_csv(report: SimulationReport, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_COLUMNS)
        for r in report.records:
            writer.writerow([r.iteration, r.phase_index,
                             r.configuration_id, r.force_ns, r.build_ns])


def write_report_json(report: SimulationReport, path):
    with open(path, "w") as fh:
        json.dump(report.summary(), fh, indent=2)
        fh.write("\n")


def write_tuning_log_csv(report: SimulationReport, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TUNING_LOG_COLUMNS)
        for row in report.tuning_log:
            writer.writerow([row.phase_index, row.configuration_id,
                             row.sample_index, row.force_time_nanos,
                             row.build_time_nanos,
                             row.aggregated_cost_nanos,
                             row.selected, row.blacklisted])


def simulate(particles: ParticleSet, params: SimulationParams,
             strategy: Strategy, *, tuning_interval: int = 1000,
             samples_per_config: int = 3, space=None,
             timer=time.perf_counter_ns, name: str = "simulation",
             raise_errors: bool = False) -> SimulationReport:
    """Run ``params.total_iterations`` iterations; returns the report
    (partial if an error interrupted the run)."""
    space = space if space is not None else enumerate_configurations()
    report = SimulationReport(name=name, strategy_name=strategy.name)
    controller = TuningController(
        space, strategy, samples_per_config=samples_per_config,
        tuning_interval=tuning_interval,
        rebuild_interval=params.rebuild_interval,
        total_iterations=params.total_iterations,
        stats_provider=lambda: compute_live_stats(particles, params))
    report.tuning_log = controller.log
    report.phase_selections = controller.phase_selections
    report.stats_snapshots = controller.stats_snapshots
    calc = ForceCalculator(particles, params)
    thermo = params.thermostat
    active_id = None
    since_rebuild = 0
    try:
        with Workforce(params.thread_count) as wf:
            for it in range(params.total_iterations):
                drift_with_force(particles, params.delta_t)
                apply_boundaries(particles, params)
                np.copyto(particles.view("old_force"),
                          particles.view("force"))
                while True:
                    config, forced = controller.configuration_for_iteration(
                        it)
                    rebuild = (forced or active_id != config.id
                               or since_rebuild >= params.rebuild_interval)
                    try:
                        t0 = timer()
                        if particles.layout != config.layout:
                            particles.convert_layout(config.layout)
                        if rebuild:
                            calc.rebuild(particles, config)
                        calc.refresh(particles, config)
                        t1 = timer()
                        calc.compute(particles, config, wf)
                        t2 = timer()
                        break
                    except (BlowUpError, KeyboardInterrupt):
                        raise
                    except Exception as exc:
                        if not controller.record_failure(exc):
                            raise
                        active_id = None
                apply_gravity(particles, params.gravity)
                active_id = config.id
                since_rebuild = 0 if rebuild else since_rebuild + 1
                force_ns, build_ns = t2 - t1, t1 - t0
                controller.record_timings(force_ns, build_ns)
                report.records.append(IterationRecord(
                    it, it // tuning_interval, config.id,
                    force_ns, build_ns))
                finish_kick(particles, params.delta_t)
                if thermo and (it + 1) % thermo.interval_iterations == 0:
                    apply_thermostat(particles, thermo.target_temperature,
                                     thermo.max_delta_t)
        report.trial_iterations = controller.trial_iterations
        if particles.n:
            report.final_temperature = current_temperature(particles)
    except Exception as exc:
        report.trial_iterations = controller.trial_iterations
        report.error = f"{type(exc).__name__}: {exc}"
        if raise_errors:
            raise
    return report


def make_strategy(spec: dict, space=None) -> Strategy:
    """Build a strategy from its scenario/CLI description.

    Kinds: full, predictive, fixed (needs config), expert (needs rules
    path), random-forest (needs model path).
    """
    kind = spec.get("kind", "full")
    if kind in ("full", "full-search"):
        return FullSearchStrategy()
    if kind == "predictive":
        retrial = spec.get("retrialInterval")
        return PredictiveStrategy(retrial_interval=(
            int(retrial) if retrial is not None else None))
    if kind == "fixed":
        from .configuration import parse_configuration
        return FixedStrategy(parse_configuration(spec["config"]))
    if kind == "expert":
        from .fuzzy import ExpertStrategy, parse_rule_file
        from .rules import default_rules_text
        path = spec.get("rules")
        if path:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        else:
            text = default_rules_text()
        return ExpertStrategy(parse_rule_file(text, space))
    if kind in ("random-forest", "rf", "forest"):
        from .forest import RandomForestStrategy, load_forest
        strategy = RandomForestStrategy(load_forest(spec["model"]),
                                        k=int(spec.get("k", 3)))
        strategy.model_file = str(spec["model"])
        return strategy
    raise ValueError(f"unknown strategy kind {kind!r}")


def run_simulation(scenario: ScenarioSpec,
                   strategy: Strategy | None = None,
                   timer=time.perf_counter_ns) -> SimulationReport:
    """Generate the scenario's particles and run it."""
    particles = generate_scenario(scenario)
    if strategy is None:
        strategy = make_strategy(scenario.strategy)
    tuning = scenario.tuning
    report = simulate(
        particles, scenario.params, strategy,
        tuning_interval=int(tuning.get("interval", 1000)),
        samples_per_config=int(tuning.get("samplesPerConfig", 3)),
        timer=timer, name=scenario.name)
    report.model_file = getattr(strategy, "model_file", None)
    return report
