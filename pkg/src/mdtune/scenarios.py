"""Scenario specifications and particle generators.

Families: uniform random fills, collections of Gaussian clusters,
hexagonally close-packed slabs inside a dilute gas, spheres carved from a
cubic lattice, and the empty domain. Generation is deterministic per
seed, and every generated particle lies inside the domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from .params import (PERIODIC, REFLECTIVE, SimulationParams,
                     ThermostatParams)
from .particles import AOS, ParticleSet, ParticleTypeInfo

PARTICLE_CAP = 2_000_000

FAMILIES = ("uniform", "gaussians", "hexSlab", "gridSphere", "empty")


class ScenarioError(ValueError):
    pass


@dataclass
class GeneratorSpec:
    family: str
    type_id: int = 0
    count: int = 0
    region: tuple | None = None        # ((lo3), (hi3)); default whole domain
    spacing: float = 1.0
    stddev: float = 2.0
    clusters: int = 1
    points_per_cluster: int = 50
    radius: float = 1.0
    center: tuple | None = None        # default domain centre

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ScenarioError(f"unknown generator family {self.family!r}")
        if self.spacing <= 0:
            raise ScenarioError("spacing must be positive")


@dataclass
class ScenarioSpec:
    name: str
    params: SimulationParams
    types: list[ParticleTypeInfo]
    generators: list[GeneratorSpec]
    seed: int = 0
    initial_temperature: float = 0.0
    particle_cap: int = PARTICLE_CAP
    tuning: dict = field(default_factory=dict)
    strategy: dict = field(default_factory=lambda: {"kind": "full"})


def _region(spec: GeneratorSpec, domain) -> tuple[np.ndarray, np.ndarray]:
    if spec.region is None:
        return np.zeros(3), np.asarray(domain, dtype=float)
    lo = np.asarray(spec.region[0], dtype=float)
    hi = np.asarray(spec.region[1], dtype=float)
    if np.any(lo >= hi):
        raise ScenarioError("generator region is empty")
    return lo, hi


def _inside(points: np.ndarray, domain) -> np.ndarray:
    """Clamp onto [0, L) so cell binning and wrapping stay in range."""
    limit = np.nextafter(np.asarray(domain, dtype=float), 0.0)
    return np.clip(points, 0.0, limit)


def _uniform(rng, spec: GeneratorSpec, domain) -> np.ndarray:
    lo, hi = _region(spec, domain)
    return rng.uniform(lo, hi, size=(spec.count, 3))


def _gaussians(rng, spec: GeneratorSpec, domain) -> np.ndarray:
    lo, hi = _region(spec, domain)
    dom = np.asarray(domain, dtype=float)
    centers = rng.uniform(lo, hi, size=(spec.clusters, 3))
    points = centers[:, None, :] + rng.normal(
        0.0, spec.stddev, size=(spec.clusters, spec.points_per_cluster, 3))
    points = points.reshape(-1, 3)
    owner = np.repeat(np.arange(spec.clusters), spec.points_per_cluster)
    # redraw points that fell outside (truncated clusters, no wall pile-up)
    for _ in range(100):
        bad = np.nonzero(np.any((points < 0.0) | (points >= dom),
                                axis=1))[0]
        if bad.size == 0:
            break
        points[bad] = centers[owner[bad]] + rng.normal(
            0.0, spec.stddev, size=(bad.size, 3))
    return points


def _hex_slab(spec: GeneratorSpec, domain) -> np.ndarray:
    """Hexagonal close packing filling the region box."""
    lo, hi = _region(spec, domain)
    a = spec.spacing
    dy = a * math.sqrt(3.0) / 2.0
    dz = a * math.sqrt(6.0) / 3.0
    extent = hi - lo
    n_layers = int(extent[2] / dz) + 1
    n_rows = int(extent[1] / dy) + 1
    n_cols = int(extent[0] / a) + 1
    if n_layers * n_rows * n_cols > PARTICLE_CAP * 2:
        raise ScenarioError("hexSlab spacing too small for the region")
    out = []
    for k in range(n_layers):
        z = lo[2] + k * dz
        if z > hi[2]:
            break
        layer_x = (k % 2) * (a / 2.0)
        layer_y = (k % 2) * (dy / 3.0)
        for j in range(n_rows):
            y = lo[1] + j * dy + layer_y
            if y > hi[1]:
                break
            x0 = lo[0] + (j % 2) * (a / 2.0) + layer_x
            xs = np.arange(x0, hi[0] + 1e-12, a)
            xs = xs[xs <= hi[0]]
            if xs.size:
                row = np.empty((xs.size, 3))
                row[:, 0] = xs
                row[:, 1] = y
                row[:, 2] = z
                out.append(row)
    if not out:
        return np.zeros((0, 3))
    return np.concatenate(out)


def _grid_sphere(spec: GeneratorSpec, domain) -> np.ndarray:
    """Cubic lattice centred on the sphere centre, kept within radius."""
    dom = np.asarray(domain, dtype=float)
    center = (np.asarray(spec.center, dtype=float)
              if spec.center is not None else dom / 2.0)
    a = spec.spacing
    r = spec.radius
    m = int(math.floor(r / a))
    if (2 * m + 1) ** 3 > PARTICLE_CAP * 8:
        raise ScenarioError("gridSphere spacing too small for the radius")
    idx = np.arange(-m, m + 1)
    ii, jj, kk = np.meshgrid(idx, idx, idx, indexing="ij")
    offsets = np.stack([ii, jj, kk], axis=-1).reshape(-1, 3).astype(float)
    keep = np.sum(offsets * offsets, axis=1) * (a * a) <= r * r
    return center + offsets[keep] * a


def generate_scenario(spec: ScenarioSpec) -> ParticleSet:
    """Build the particle set: run every generator, clamp into the domain,
    then draw Maxwell-Boltzmann velocities if an initial temperature is
    set (centre-of-mass motion removed, exact rescale)."""
    rng = np.random.default_rng(spec.seed)
    domain = spec.params.domain_size
    chunks = []
    type_ids = []
    for gen in spec.generators:
        if gen.family == "uniform":
            pts = _uniform(rng, gen, domain)
        elif gen.family == "gaussians":
            pts = _gaussians(rng, gen, domain)
        elif gen.family == "hexSlab":
            pts = _hex_slab(gen, domain)
        elif gen.family == "gridSphere":
            pts = _grid_sphere(gen, domain)
        else:
            pts = np.zeros((0, 3))
        chunks.append(_inside(pts, domain))
        type_ids.append(np.full(len(pts), gen.type_id, dtype=np.int64))
    positions = (np.concatenate(chunks) if chunks else np.zeros((0, 3)))
    tids = (np.concatenate(type_ids) if type_ids
            else np.zeros(0, dtype=np.int64))
    if len(positions) > spec.particle_cap:
        raise ScenarioError(
            f"scenario {spec.name!r} generates {len(positions)} particles, "
            f"above the cap of {spec.particle_cap}")
    particles = ParticleSet(positions, type_ids=tids, types=spec.types,
                            layout=AOS)
    if spec.initial_temperature > 0.0 and particles.n > 0:
        _thermal_velocities(rng, particles, spec.initial_temperature)
    return particles


def _thermal_velocities(rng, particles: ParticleSet, temperature: float):
    m = particles.masses
    v = rng.normal(0.0, 1.0, size=(particles.n, 3))
    v *= np.sqrt(temperature / m)[:, None]
    # remove centre-of-mass drift, then rescale onto the exact target
    v -= np.average(v, axis=0, weights=m)
    t_now = float(np.sum(m * np.sum(v * v, axis=1)) / (3.0 * particles.n))
    if t_now > 0.0:
        v *= math.sqrt(temperature / t_now)
    particles.view("vel")[:] = v


# -- YAML loading ------------------------------------------------------------

_BOUNDARY = {"reflective": REFLECTIVE, "periodic": PERIODIC}


def scenario_from_dict(doc: dict, name: str = "scenario") -> ScenarioSpec:
    try:
        domain = tuple(float(v) for v in doc["domain"])
        boundary = tuple(_BOUNDARY[b] for b in doc.get(
            "boundary", ["periodic"] * 3))
        thermo = None
        if doc.get("thermostat"):
            t = doc["thermostat"]
            thermo = ThermostatParams(
                target_temperature=float(t["target"]),
                max_delta_t=float(t["maxDeltaT"]),
                interval_iterations=int(t["interval"]))
        params = SimulationParams(
            domain_size=domain,
            cutoff=float(doc.get("cutoff", 3.0)),
            skin=float(doc.get("skin", 0.0)),
            rebuild_interval=int(doc.get("rebuildInterval", 1)),
            delta_t=float(doc.get("deltaT", 1e-3)),
            total_iterations=int(doc.get("iterations", 0)),
            boundary=boundary,
            gravity=(float(doc["gravity"])
                     if doc.get("gravity") is not None else None),
            thermostat=thermo,
            thread_count=int(doc.get("threads", 1)))
        types = [ParticleTypeInfo(int(t.get("id", i)),
                                  epsilon=float(t.get("epsilon", 1.0)),
                                  sigma=float(t.get("sigma", 1.0)),
                                  mass=float(t.get("mass", 1.0)))
                 for i, t in enumerate(doc.get(
                     "types", [{"id": 0}]))]
        generators = []
        for g in doc.get("generators", []):
            kwargs = {"family": g["family"]}
            if "type" in g:
                kwargs["type_id"] = int(g["type"])
            for key, conv in (("count", int), ("spacing", float),
                              ("stddev", float), ("clusters", int),
                              ("pointsPerCluster", int), ("radius", float)):
                if key in g:
                    field_name = {"pointsPerCluster": "points_per_cluster"}
                    kwargs[field_name.get(key, key)] = conv(g[key])
            if "region" in g:
                kwargs["region"] = (tuple(g["region"]["lo"]),
                                    tuple(g["region"]["hi"]))
            if "center" in g:
                kwargs["center"] = tuple(g["center"])
            generators.append(GeneratorSpec(**kwargs))
        return ScenarioSpec(
            name=str(doc.get("name", name)),
            params=params,
            types=types,
            generators=generators,
            seed=int(doc.get("seed", 0)),
            initial_temperature=float(doc.get("initialTemperature", 0.0)),
            particle_cap=int(doc.get("particleCap", PARTICLE_CAP)),
            tuning=dict(doc.get("tuning", {})),
            strategy=dict(doc.get("strategy", {"kind": "full"})))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"invalid scenario document: {exc}") from exc


def load_scenario(path) -> ScenarioSpec:
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ScenarioError(f"{path}: expected a mapping at top level")
    return scenario_from_dict(doc, name=str(path))
