"""Desk-scale versions of the three benchmark experiments and the
strategy-comparison harness.

Scaling convention: particle counts and iteration counts shrink
proportionally to ``scale``, domain edges by ``scale**(1/3)``, so
per-bin densities (the live-statistics features) stay in the regime the
selection strategies were trained on.  Lattice spacings are physical
constants and are never scaled.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .configuration import enumerate_configurations
from .params import (PERIODIC, REFLECTIVE, SimulationParams,
                     ThermostatParams)
from .particles import ParticleTypeInfo
from .scenarios import GeneratorSpec, ScenarioSpec
from .simulation import SimulationReport, make_strategy, run_simulation
from .tuning import FixedStrategy, FullSearchStrategy, Strategy

EXPERIMENTS = ("heating-sphere", "exploding-liquid", "rayleigh-taylor")

# Sphere of 5497 molecules on a cubic lattice at the LJ equilibrium
# spacing: radius = 1.1225 * (3 * 5497 / 4pi)**(1/3).
_HS_RADIUS = 12.289
_HS_SPACING = 1.1225
_HS_DOMAIN = 200.0
_HS_ITERATIONS = 150_000

_EL_SPACING = 1.0            # 120x21x147 HCP points = 370440 at full scale
_EL_DOMAIN = (120.0, 480.0, 120.0)
_EL_SLAB_THICKNESS = 18.0
_EL_GAS_PER_SIDE = 100

_RT_DOMAIN = (60.0, 60.0, 60.0)
_RT_LAYER_HEIGHT = 30.0
_RT_SPACING_BOTTOM = 1.122
_RT_SPACING_TOP = 0.6
_RT_GRAVITY = -12.44
_RT_MAX_SCALE = 0.05

_LATTICE_MARGIN = 0.5        # keeps periodic wrap gaps >= one spacing


def _desk_iterations(scale: float, iterations: int | None) -> int:
    if iterations is not None:
        return int(iterations)
    return max(1, round(_HS_ITERATIONS * scale))


def heating_sphere_spec(scale: float = 0.1, *, iterations: int | None = None,
                        threads: int = 1) -> ScenarioSpec:
    """Compact sphere heated from T=0.1 to T=100 in a large reflective
    box; it slowly evaporates into a domain-filling gas."""
    c = scale ** (1 / 3)
    edge = _HS_DOMAIN * c
    # Time step stretched with the shortened run so the sphere still
    # evaporates; capped for collision stability at T=100.
    delta_t = min(1e-3, 1e-4 / scale)
    params = SimulationParams(
        domain_size=(edge, edge, edge), cutoff=3.0, skin=0.5,
        rebuild_interval=10, delta_t=delta_t,
        total_iterations=_desk_iterations(scale, iterations),
        boundary=(REFLECTIVE,) * 3,
        thermostat=ThermostatParams(
            target_temperature=100.0, max_delta_t=0.1,
            interval_iterations=max(1, round(100 * scale))),
        thread_count=threads)
    return ScenarioSpec(
        name=f"heating-sphere-{scale:g}", params=params,
        types=[ParticleTypeInfo(0, epsilon=1.0, sigma=1.0, mass=1.0)],
        generators=[GeneratorSpec(family="gridSphere",
                                  spacing=_HS_SPACING,
                                  radius=_HS_RADIUS * c)],
        seed=61, initial_temperature=0.1)


def exploding_liquid_spec(scale: float = 0.05, *,
                          iterations: int | None = None,
                          threads: int = 1) -> ScenarioSpec:
    """Over-compressed liquid slab (spacing 1.0 < LJ equilibrium) that
    bursts along y into two dense waves through a periodic domain."""
    c = scale ** (1 / 3)
    dx, dy, dz = (v * c for v in _EL_DOMAIN)
    half = _EL_SLAB_THICKNESS * c / 2
    y_lo, y_hi = dy / 2 - half, dy / 2 + half
    m = _LATTICE_MARGIN
    gas = max(1, round(_EL_GAS_PER_SIDE * scale))
    params = SimulationParams(
        domain_size=(dx, dy, dz), cutoff=3.0, skin=0.6,
        rebuild_interval=10, delta_t=5e-4,
        total_iterations=_desk_iterations(scale, iterations),
        boundary=(PERIODIC,) * 3, thread_count=threads)
    return ScenarioSpec(
        name=f"exploding-liquid-{scale:g}", params=params,
        types=[ParticleTypeInfo(0, epsilon=1.0, sigma=1.0, mass=1.0)],
        generators=[
            GeneratorSpec(family="hexSlab", spacing=_EL_SPACING,
                          region=((m, y_lo, m), (dx - m, y_hi, dz - m))),
            GeneratorSpec(family="uniform", count=gas,
                          region=((0.0, 0.0, 0.0), (dx, y_lo - 2.0, dz))),
            GeneratorSpec(family="uniform", count=gas,
                          region=((0.0, y_hi + 2.0, 0.0), (dx, dy, dz))),
        ],
        seed=62, initial_temperature=0.0)


def rayleigh_taylor_spec(scale: float = 0.02, *,
                         iterations: int | None = None,
                         threads: int = 1) -> ScenarioSpec:
    """Light molecules under a layer of half-size double-mass molecules,
    destabilised by gravity; periodic sideways, reflective floor and
    ceiling."""
    c = scale ** (1 / 3)
    dx, dy, dz = (v * c for v in _RT_DOMAIN)
    z_split = _RT_LAYER_HEIGHT * c
    mb = _RT_SPACING_BOTTOM / 2
    mt = _RT_SPACING_TOP / 2
    # Equilibrium gap for the mixed pair (sigma 0.75) between the layers.
    gap = 0.85
    params = SimulationParams(
        domain_size=(dx, dy, dz), cutoff=3.0, skin=0.3,
        rebuild_interval=30, delta_t=5e-4,
        total_iterations=_desk_iterations(scale, iterations),
        boundary=(PERIODIC, PERIODIC, REFLECTIVE),
        gravity=_RT_GRAVITY, thread_count=threads)
    return ScenarioSpec(
        name=f"rayleigh-taylor-{scale:g}", params=params,
        types=[ParticleTypeInfo(0, epsilon=1.0, sigma=1.0, mass=1.0),
               ParticleTypeInfo(1, epsilon=1.0, sigma=0.5, mass=2.0)],
        generators=[
            GeneratorSpec(family="hexSlab", type_id=0,
                          spacing=_RT_SPACING_BOTTOM,
                          region=((mb, mb, 0.0),
                                  (dx - mb, dy - mb, z_split))),
            GeneratorSpec(family="hexSlab", type_id=1,
                          spacing=_RT_SPACING_TOP,
                          region=((mt, mt, z_split + gap),
                                  (dx - mt, dy - mt, dz))),
        ],
        seed=63, initial_temperature=0.1)


def experiment_spec(name: str, scale: float, *,
                    iterations: int | None = None,
                    threads: int = 1,
                    allow_large: bool = False) -> ScenarioSpec:
    if name == "heating-sphere":
        return heating_sphere_spec(scale, iterations=iterations,
                                   threads=threads)
    if name == "exploding-liquid":
        return exploding_liquid_spec(scale, iterations=iterations,
                                     threads=threads)
    if name == "rayleigh-taylor":
        if scale > _RT_MAX_SCALE and not allow_large:
            raise ValueError(
                f"rayleigh-taylor runs at scale <= {_RT_MAX_SCALE} by "
                f"default ({scale:g} requested); pass allow_large to "
                f"override")
        return rayleigh_taylor_spec(scale, iterations=iterations,
                                    threads=threads)
    raise ValueError(f"unknown experiment {name!r}; "
                     f"choose from {', '.join(EXPERIMENTS)}")


class _DeadlineTimer:
    """perf_counter_ns lookalike that raises once a wall-clock budget is
    spent; used to cut off hopeless baseline configurations."""

    def __init__(self, timeout_s: float):
        self.timeout_s = timeout_s
        self._deadline = time.monotonic() + timeout_s
        self.expired = False

    def __call__(self) -> int:
        if time.monotonic() > self._deadline:
            self.expired = True
            raise TimeoutError(
                f"exceeded the {self.timeout_s:.0f}s per-configuration "
                f"budget")
        return time.perf_counter_ns()


@dataclass
class BaselineRow:
    configuration_id: str
    total_force_ns: int
    total_build_ns: int
    iterations_completed: int
    timed_out: bool = False
    error: str | None = None
    speedup: float | None = None    # this config's time / strategy's time


@dataclass
class ExperimentResult:
    name: str
    scale: float
    report: SimulationReport
    baselines: list[BaselineRow] = field(default_factory=list)
    best_single_id: str | None = None
    best_single_force_ns: int | None = None
    speedup: float | None = None    # best single config / strategy

    def summary(self) -> dict:
        doc = {"experiment": self.name, "scale": self.scale,
               "run": self.report.summary()}
        if self.baselines:
            doc["bestSingleConfiguration"] = self.best_single_id
            doc["bestSingleForceTimeNanos"] = self.best_single_force_ns
            doc["speedupVsBestSingle"] = self.speedup
        return doc


def _total_force(report: SimulationReport) -> int:
    return report.total_force_ns


def run_baseline_sweep(scenario: ScenarioSpec, strategy_report=None,
                       strategy_config_id: str | None = None,
                       timeout_s: float | None = None,
                       space=None) -> list[BaselineRow]:
    """Run every configuration as a fixed choice on identical initial
    conditions (same scenario seed).  ``strategy_config_id`` lets a
    fixed-strategy run stand in for its own configuration so its
    comparison row is exact."""
    space = space if space is not None else enumerate_configurations()
    rows = []
    for config in space:
        if strategy_config_id == config.id and strategy_report is not None:
            rows.append(BaselineRow(
                config.id, strategy_report.total_force_ns,
                strategy_report.total_build_ns,
                len(strategy_report.records)))
            continue
        timer = (_DeadlineTimer(timeout_s) if timeout_s is not None
                 else time.perf_counter_ns)
        report = run_simulation(scenario, FixedStrategy(config),
                                timer=timer)
        timed_out = getattr(timer, "expired", False)
        rows.append(BaselineRow(
            config.id, report.total_force_ns, report.total_build_ns,
            len(report.records), timed_out=timed_out,
            error=None if timed_out else report.error))
    return rows


def run_experiment(name: str, scale: float = 0.1,
                   strategy: Strategy | dict | None = None, *,
                   iterations: int | None = None, threads: int = 1,
                   baseline_sweep: bool = False,
                   baseline_timeout_s: float | None = None,
                   allow_large: bool = False) -> ExperimentResult:
    """Run one experiment under a selection strategy; optionally sweep
    every configuration as a fixed baseline and report the speedup
    against the best single configuration."""
    scenario = experiment_spec(name, scale, iterations=iterations,
                               threads=threads, allow_large=allow_large)
    if strategy is None:
        strategy = FullSearchStrategy()
    elif isinstance(strategy, dict):
        strategy = make_strategy(strategy)
    t0 = time.monotonic()
    report = run_simulation(scenario, strategy)
    wall_s = time.monotonic() - t0
    result = ExperimentResult(name=name, scale=scale, report=report)
    if not baseline_sweep:
        return result
    if baseline_timeout_s is None:
        # A configuration this much slower than the whole tuned run is
        # hopeless; the sweep cuts it off like a batch-queue wall limit.
        baseline_timeout_s = max(60.0, 10.0 * wall_s)
    fixed_id = (strategy.config.id if isinstance(strategy, FixedStrategy)
                else None)
    result.baselines = run_baseline_sweep(
        scenario, strategy_report=report, strategy_config_id=fixed_id,
        timeout_s=baseline_timeout_s)
    strategy_total = report.total_force_ns
    complete = [r for r in result.baselines
                if r.error is None and not r.timed_out]
    if complete and strategy_total > 0:
        best = min(complete, key=lambda r: r.total_force_ns)
        result.best_single_id = best.configuration_id
        result.best_single_force_ns = best.total_force_ns
        result.speedup = best.total_force_ns / strategy_total
        for row in result.baselines:
            if row.error is None and not row.timed_out:
                row.speedup = row.total_force_ns / strategy_total
    return result


COMPARISON_COLUMNS = ("configurationId", "totalForceTimeNanos",
                      "totalBuildTimeNanos", "iterationsCompleted",
                      "timedOut", "speedupOverStrategy", "error")


def comparison_table(result: ExperimentResult) -> list[dict]:
    """Baseline rows as plain dicts, fastest first, failures last."""
    def key(row):
        ok = row.error is None and not row.timed_out
        return (not ok, row.total_force_ns if ok else 0)

    table = []
    for row in sorted(result.baselines, key=key):
        table.append({
            "configurationId": row.configuration_id,
            "totalForceTimeNanos": row.total_force_ns,
            "totalBuildTimeNanos": row.total_build_ns,
            "iterationsCompleted": row.iterations_completed,
            "timedOut": row.timed_out,
            "speedupOverStrategy": ("" if row.speedup is None
                                    else f"{row.speedup:.6g}"),
            "error": row.error or "",
        })
    return table


def write_comparison_csv(result: ExperimentResult, path):
    import csv
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=COMPARISON_COLUMNS)
        writer.writeheader()
        for row in comparison_table(result):
            writer.writerow(row)
