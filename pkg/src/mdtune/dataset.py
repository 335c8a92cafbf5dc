"""Training-dataset production: sweep the scenario families over skin
and thread counts, trial every configuration on a static snapshot, label
each sweep point with the measured-cheapest configuration.

Row layout: the eight live-statistics features, one audit column
``cost:<configId>`` per configuration, and the winning configuration id
in the final ``label`` column.
"""

from __future__ import annotations

import csv
import logging
import math
import statistics
import time

import numpy as np

from .configuration import enumerate_configurations
from .containers import ForceCalculator, Workforce
from .livestats import FEATURE_NAMES, compute_live_stats
from .params import PERIODIC, SimulationParams
from .particles import ParticleSet, ParticleTypeInfo
from .scenarios import GeneratorSpec, ScenarioSpec, generate_scenario
from .tuning import evidence_cost

log = logging.getLogger(__name__)

DATASET_CUTOFF = 3.0
DATASET_SKINS = (0.1, 0.2, 0.3, 0.4, 0.5)
DESK_THREADS = (1, 2, 4, 8)
TRIAL_ITERATIONS = 10
REBUILD_INTERVAL = 10
SCENARIO_CAP = 10_000

_TYPES = [ParticleTypeInfo(0, epsilon=1.0, sigma=1.0, mass=1.0)]


def _spec(name, domain, generators, seed) -> ScenarioSpec:
    params = SimulationParams(
        domain_size=domain, cutoff=DATASET_CUTOFF, skin=0.5,
        rebuild_interval=REBUILD_INTERVAL, boundary=(PERIODIC,) * 3)
    return ScenarioSpec(name=name, params=params, types=_TYPES,
                        generators=generators, seed=seed,
                        particle_cap=SCENARIO_CAP)


def dataset_scenarios(scale: float = 0.1,
                      cap: int = SCENARIO_CAP) -> list[ScenarioSpec]:
    """The training roster: uniform fills, Gaussian clusters, a hex slab
    in a dilute gas, lattice spheres in a mostly empty (desk-scaled)
    domain, and an empty box. Variants that would exceed ``cap``
    particles are dropped."""
    out = []
    seed = 1000
    # uniform fills, particle counts doubling
    count = 100
    while count <= cap:
        out.append(_spec(f"uniform-{count}", (20.0, 20.0, 20.0),
                         [GeneratorSpec("uniform", count=count)], seed))
        seed += 1
        count *= 2
    # clusters of gaussians; centres keep a 0.5 buffer to the borders
    clusters = 10
    while clusters <= 160:
        points = 50
        if clusters * points <= cap:
            out.append(_spec(
                f"gaussians-{clusters}", (17.0, 17.0, 17.0),
                [GeneratorSpec("gaussians", clusters=clusters,
                               points_per_cluster=points, stddev=2.0,
                               region=((0.5, 0.5, 0.5),
                                       (16.5, 16.5, 16.5)))], seed))
        seed += 1
        clusters *= 2
    # hexagonal slab inside a dilute gas
    edge = 24.0
    gas = 864
    for x in (3.0, 6.0, 9.0, 12.0):
        slab = GeneratorSpec(
            "hexSlab", spacing=1.225,
            region=(((edge - x) / 2.0, 0.0, 0.0),
                    ((edge + x) / 2.0, edge, edge)))
        out.append(_spec(f"hexSlab-{x:g}", (edge,) * 3,
                         [GeneratorSpec("uniform", count=gas), slab], seed))
        seed += 1
    # lattice spheres in a large sparse domain (desk-scaled edge)
    sphere_edge = 200.0 * scale ** (1.0 / 3.0)
    for radius in (5.0, 10.0, 15.0, 20.0):
        for spacing in (0.5, 1.0, 1.5, 2.0):
            expected = 4.0 / 3.0 * math.pi * radius ** 3 / spacing ** 3
            if expected > cap or 2.0 * radius >= sphere_edge:
                continue
            out.append(_spec(
                f"gridSphere-r{radius:g}-a{spacing:g}", (sphere_edge,) * 3,
                [GeneratorSpec("gridSphere", radius=radius,
                               spacing=spacing)], seed))
            seed += 1
    out.append(_spec("empty", (40.0, 40.0, 40.0), [], seed))
    return out


def measure_configuration_costs(particles: ParticleSet,
                                params: SimulationParams, *,
                                trial_iterations: int = TRIAL_ITERATIONS,
                                space=None,
                                timer=time.perf_counter_ns) -> dict[str, float]:
    """Static-snapshot trial of every configuration: one rebuild plus
    ``trial_iterations`` force evaluations, aggregated like the tuning
    controller (median force, slowest build, amortized by the rebuild
    interval)."""
    space = space if space is not None else enumerate_configurations()
    calc = ForceCalculator(particles, params)
    costs = {}
    with Workforce(params.thread_count) as wf:
        for config in space:
            try:
                forces = []
                builds = []
                for i in range(trial_iterations):
                    t0 = timer()
                    if particles.layout != config.layout:
                        particles.convert_layout(config.layout)
                    if i == 0:
                        calc.rebuild(particles, config)
                    calc.refresh(particles, config)
                    t1 = timer()
                    calc.compute(particles, config, wf)
                    t2 = timer()
                    forces.append(t2 - t1)
                    builds.append(t1 - t0)
                costs[config.id] = evidence_cost(
                    statistics.median(forces), max(builds),
                    params.rebuild_interval)
            except Exception as exc:
                log.warning("configuration %s failed during trial: %s",
                            config.id, exc)
                costs[config.id] = float("inf")
    return costs


def dataset_columns(space=None) -> list[str]:
    space = space if space is not None else enumerate_configurations()
    return (list(FEATURE_NAMES)
            + [f"cost:{c.id}" for c in space] + ["label"])


def generate_training_dataset(out_path, *, scale: float = 0.1,
                              cap: int = SCENARIO_CAP,
                              skins=DATASET_SKINS, threads=DESK_THREADS,
                              trial_iterations: int = TRIAL_ITERATIONS,
                              timer=time.perf_counter_ns,
                              progress=None) -> int:
    """Write the training CSV; returns the number of rows. Scenario
    failures are logged and skipped."""
    space = enumerate_configurations()
    rows = 0
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(dataset_columns(space))
        for spec in dataset_scenarios(scale, cap):
            try:
                base_particles = generate_scenario(spec)
            except Exception as exc:
                log.warning("scenario %s failed to generate: %s",
                            spec.name, exc)
                continue
            for skin in skins:
                for thread_count in threads:
                    params = SimulationParams(
                        domain_size=spec.params.domain_size,
                        cutoff=spec.params.cutoff, skin=skin,
                        rebuild_interval=spec.params.rebuild_interval,
                        boundary=spec.params.boundary,
                        thread_count=thread_count)
                    particles = base_particles.copy()
                    try:
                        stats = compute_live_stats(particles, params)
                        costs = measure_configuration_costs(
                            particles, params,
                            trial_iterations=trial_iterations,
                            space=space, timer=timer)
                    except Exception as exc:
                        log.warning("sweep point (%s, skin=%g, t=%d) "
                                    "failed: %s", spec.name, skin,
                                    thread_count, exc)
                        continue
                    if not math.isfinite(min(costs.values())):
                        log.warning("sweep point (%s, skin=%g, t=%d): "
                                    "every configuration failed",
                                    spec.name, skin, thread_count)
                        continue
                    label = min(space, key=lambda c: costs[c.id]).id
                    row = ([f"{v!r}" for v in
                            stats.feature_vector().tolist()]
                           + [repr(costs[c.id]) for c in space] + [label])
                    writer.writerow(row)
                    rows += 1
                    if progress:
                        progress(spec.name, skin, thread_count, label)
    return rows


def load_training_csv(path):
    """Features (by header name, live-stats order) and labels (final
    column) from a dataset CSV."""
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[-1] != "label":
            raise ValueError(
                f"{path}: final column must be 'label', got {header[-1]!r}")
        try:
            feat_idx = [header.index(name) for name in FEATURE_NAMES]
        except ValueError as exc:
            raise ValueError(f"{path}: missing feature column ({exc})")
        features = []
        labels = []
        for line in reader:
            if not line:
                continue
            features.append([float(line[i]) for i in feat_idx])
            labels.append(line[-1])
    if not features:
        raise ValueError(f"{path}: dataset is empty")
    return np.asarray(features), labels


def train_forest_from_csv(csv_path, n_estimators: int = 100,
                          seed: int = 0):
    from .forest import train_forest
    features, labels = load_training_csv(csv_path)
    return train_forest(features, labels, n_estimators=n_estimators,
                        seed=seed)
