import math

import numpy as np
import pytest

from mdtune.params import PERIODIC, REFLECTIVE, SimulationParams
from mdtune.particles import ParticleTypeInfo
from mdtune.scenarios import (FAMILIES, GeneratorSpec, ScenarioError,
                              ScenarioSpec, generate_scenario, load_scenario,
                              scenario_from_dict)


def make_spec(generators, domain=(12.0, 12.0, 12.0), seed=0, **kwargs):
    params = SimulationParams(domain_size=domain, cutoff=2.5,
                              boundary=(REFLECTIVE,) * 3)
    types = [ParticleTypeInfo(0, 1.0, 1.0, 1.0),
             ParticleTypeInfo(1, 1.0, 1.0, 1.0)]
    return ScenarioSpec(name="t", params=params, types=types,
                        generators=generators, seed=seed, **kwargs)


# -- individual families ------------------------------------------------------

def test_uniform_count_and_region():
    region = ((2.0, 3.0, 4.0), (5.0, 6.0, 7.0))
    spec = make_spec([GeneratorSpec("uniform", count=400, region=region)])
    p = generate_scenario(spec)
    assert p.n == 400
    pos = p.positions
    assert np.all(pos >= np.array(region[0]))
    assert np.all(pos < np.array(region[1]))


def test_gaussians_count_and_containment():
    spec = make_spec([GeneratorSpec("gaussians", clusters=4,
                                    points_per_cluster=30, stddev=1.5)])
    p = generate_scenario(spec)
    assert p.n == 120
    assert np.all(p.positions >= 0.0)
    assert np.all(p.positions < 12.0)


def test_gaussians_cluster_more_than_uniform():
    # same particle count: cluster generator should produce a visibly
    # smaller mean nearest-neighbour distance than a uniform fill
    def mean_nn(p):
        pos = p.positions
        d = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
        np.fill_diagonal(d, np.inf)
        return float(d.min(axis=1).mean())

    clustered = generate_scenario(make_spec(
        [GeneratorSpec("gaussians", clusters=3, points_per_cluster=60,
                       stddev=0.8)]))
    flat = generate_scenario(make_spec(
        [GeneratorSpec("uniform", count=180)]))
    assert mean_nn(clustered) < 0.6 * mean_nn(flat)


def test_grid_sphere_lattice_point_count():
    # integer lattice points within radius 5 of the origin: 515
    spec = make_spec([GeneratorSpec("gridSphere", spacing=1.0, radius=5.0)],
                     domain=(16.0, 16.0, 16.0))
    p = generate_scenario(spec)
    assert p.n == 515
    center = np.array([8.0, 8.0, 8.0])
    r = np.linalg.norm(p.positions - center, axis=1)
    assert np.all(r <= 5.0 + 1e-12)
    # the centre particle itself is part of the lattice
    assert np.any(np.all(p.positions == center, axis=1))


def test_grid_sphere_respects_explicit_center():
    spec = make_spec([GeneratorSpec("gridSphere", spacing=1.0, radius=2.0,
                                    center=(3.0, 4.0, 5.0))])
    p = generate_scenario(spec)
    r = np.linalg.norm(p.positions - np.array([3.0, 4.0, 5.0]), axis=1)
    assert np.all(r <= 2.0 + 1e-12)
    assert p.n == 33            # radius-2 lattice ball


def test_hex_slab_nearest_neighbour_distance_is_spacing():
    region = ((1.0, 1.0, 1.0), (7.0, 7.0, 4.0))
    spec = make_spec([GeneratorSpec("hexSlab", spacing=1.1, region=region)])
    p = generate_scenario(spec)
    assert p.n > 100
    pos = p.positions
    d = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
    np.fill_diagonal(d, np.inf)
    nn = d.min(axis=1)
    assert nn.min() == pytest.approx(1.1, rel=1e-9)
    assert nn.max() == pytest.approx(1.1, rel=1e-9)
    # interior particles touch 12 neighbours at exactly the spacing
    contact = np.sum(np.isclose(d, 1.1, rtol=1e-9), axis=1)
    assert contact.max() == 12


def test_hex_slab_fills_region_box():
    region = ((1.0, 1.0, 1.0), (7.0, 7.0, 4.0))
    spec = make_spec([GeneratorSpec("hexSlab", spacing=1.1, region=region)])
    pos = generate_scenario(spec).positions
    assert np.all(pos >= np.array(region[0]) - 1e-12)
    assert np.all(pos <= np.array(region[1]) + 1e-12)


def test_empty_family_and_empty_scenario():
    spec = make_spec([GeneratorSpec("empty")])
    assert generate_scenario(spec).n == 0
    assert generate_scenario(make_spec([])).n == 0


def test_generators_concatenate_with_type_ids():
    spec = make_spec([
        GeneratorSpec("uniform", count=10, type_id=0),
        GeneratorSpec("uniform", count=5, type_id=1),
    ])
    p = generate_scenario(spec)
    assert p.n == 15
    assert np.bincount(p.type_id).tolist() == [10, 5]


# -- properties over random specs ---------------------------------------------

def test_all_points_inside_domain_for_random_specs():
    rng = np.random.default_rng(99)
    for trial in range(100):
        domain = tuple(rng.uniform(8.0, 20.0, 3))
        family = FAMILIES[trial % len(FAMILIES)]
        if family == "uniform":
            gen = GeneratorSpec(family, count=int(rng.integers(1, 300)))
        elif family == "gaussians":
            gen = GeneratorSpec(family, clusters=int(rng.integers(1, 5)),
                                points_per_cluster=int(rng.integers(1, 60)),
                                stddev=float(rng.uniform(0.5, 6.0)))
        elif family == "hexSlab":
            gen = GeneratorSpec(family,
                                spacing=float(rng.uniform(0.8, 2.0)))
        elif family == "gridSphere":
            gen = GeneratorSpec(family,
                                spacing=float(rng.uniform(0.8, 2.0)),
                                radius=float(rng.uniform(1.0, 12.0)))
        else:
            gen = GeneratorSpec(family)
        spec = make_spec([gen], domain=domain, seed=trial)
        pos = generate_scenario(spec).positions
        assert np.all(pos >= 0.0)
        assert np.all(pos < np.asarray(domain))


def test_generation_is_deterministic():
    def build():
        spec = make_spec([GeneratorSpec("gaussians", clusters=3,
                                        points_per_cluster=40)],
                         seed=7, initial_temperature=1.2)
        return generate_scenario(spec)

    a, b = build(), build()
    assert np.array_equal(a.positions, b.positions)
    assert np.array_equal(a.velocities, b.velocities)


def test_different_seeds_differ():
    gens = [GeneratorSpec("uniform", count=50)]
    a = generate_scenario(make_spec(gens, seed=1))
    b = generate_scenario(make_spec(gens, seed=2))
    assert not np.array_equal(a.positions, b.positions)


# -- caps and validation ------------------------------------------------------

def test_particle_cap_enforced():
    spec = make_spec([GeneratorSpec("uniform", count=100)],
                     particle_cap=50)
    with pytest.raises(ScenarioError, match="cap"):
        generate_scenario(spec)


def test_unknown_family_rejected():
    with pytest.raises(ScenarioError, match="family"):
        GeneratorSpec("spiral")


def test_nonpositive_spacing_rejected():
    with pytest.raises(ScenarioError, match="spacing"):
        GeneratorSpec("hexSlab", spacing=0.0)


def test_empty_region_rejected():
    spec = make_spec([GeneratorSpec(
        "uniform", count=5, region=((4.0, 4.0, 4.0), (4.0, 6.0, 6.0)))])
    with pytest.raises(ScenarioError, match="region"):
        generate_scenario(spec)


# -- thermal velocities -------------------------------------------------------

def test_initial_temperature_is_exact():
    spec = make_spec([GeneratorSpec("uniform", count=200, type_id=0),
                      GeneratorSpec("uniform", count=100, type_id=1)],
                     initial_temperature=1.7)
    spec.types = [ParticleTypeInfo(0, 1.0, 1.0, 1.0),
                  ParticleTypeInfo(1, 1.0, 1.0, 4.0)]
    p = generate_scenario(spec)
    m = p.masses
    v = p.velocities
    t_now = float(np.sum(m * np.sum(v * v, axis=1)) / (3.0 * p.n))
    assert t_now == pytest.approx(1.7, rel=1e-12)
    momentum = np.sum(m[:, None] * v, axis=0)
    assert np.linalg.norm(momentum) < 1e-9


def test_zero_temperature_means_zero_velocities():
    spec = make_spec([GeneratorSpec("uniform", count=40)])
    p = generate_scenario(spec)
    assert np.all(p.velocities == 0.0)


# -- YAML documents -----------------------------------------------------------

DOC = {
    "name": "demo",
    "domain": [10, 12, 14],
    "boundary": ["periodic", "reflective", "periodic"],
    "cutoff": 2.5,
    "skin": 0.4,
    "rebuildInterval": 6,
    "deltaT": 0.002,
    "iterations": 500,
    "gravity": -9.81,
    "threads": 4,
    "seed": 11,
    "initialTemperature": 0.8,
    "thermostat": {"target": 1.0, "maxDeltaT": 0.05, "interval": 10},
    "types": [{"id": 0, "epsilon": 1.0, "sigma": 1.0, "mass": 1.0},
              {"id": 1, "epsilon": 0.5, "sigma": 1.2, "mass": 2.0}],
    "generators": [
        {"family": "uniform", "count": 64, "type": 1,
         "region": {"lo": [0, 0, 0], "hi": [5, 5, 5]}},
        {"family": "gridSphere", "spacing": 1.0, "radius": 3.0,
         "center": [5, 6, 7]},
    ],
    "tuning": {"interval": 800, "samples": 3},
    "strategy": {"kind": "expert"},
}


def test_scenario_from_dict_full_document():
    spec = scenario_from_dict(DOC)
    assert spec.name == "demo"
    assert spec.params.domain_size.tolist() == [10.0, 12.0, 14.0]
    assert spec.params.boundary == (PERIODIC, REFLECTIVE, PERIODIC)
    assert spec.params.skin == 0.4
    assert spec.params.rebuild_interval == 6
    assert spec.params.gravity == -9.81
    assert spec.params.thread_count == 4
    assert spec.params.thermostat.target_temperature == 1.0
    assert spec.initial_temperature == 0.8
    assert len(spec.types) == 2
    assert spec.types[1].mass == 2.0
    assert spec.generators[0].type_id == 1
    assert spec.generators[0].region == ((0, 0, 0), (5, 5, 5))
    assert spec.generators[1].center == (5, 6, 7)
    assert spec.strategy == {"kind": "expert"}
    assert spec.tuning["interval"] == 800
    p = generate_scenario(spec)
    assert p.n == 64 + 123          # radius-3 lattice ball has 123 points


def test_scenario_from_dict_defaults():
    spec = scenario_from_dict({"domain": [9, 9, 9]})
    assert spec.params.boundary == (PERIODIC,) * 3
    assert spec.params.cutoff == 3.0
    assert spec.strategy == {"kind": "full"}
    assert spec.generators == []


@pytest.mark.parametrize("doc", [
    {},                                             # missing domain
    {"domain": [9, 9]},                             # not 3 components
    {"domain": [9, 9, 9], "boundary": ["open"] * 3},
    {"domain": [9, 9, 9], "generators": [{"family": "nope"}]},
    {"domain": [9, 9, 9], "generators": [{"count": 5}]},
    {"domain": [9, 9, 9], "deltaT": "fast"},
    {"domain": [9, 9, 9],
     "thermostat": {"target": 1.0, "interval": 10}},  # missing maxDeltaT
])
def test_scenario_from_dict_rejects_malformed(doc):
    with pytest.raises(ScenarioError):
        scenario_from_dict(doc)


def test_load_scenario_yaml_file(tmp_path):
    path = tmp_path / "scene.yaml"
    path.write_text(
        "domain: [9, 9, 9]\n"
        "cutoff: 2.5\n"
        "generators:\n"
        "  - family: uniform\n"
        "    count: 12\n")
    spec = load_scenario(path)
    assert generate_scenario(spec).n == 12


def test_load_scenario_rejects_non_mapping(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("- just\n- a\n- list\n")
    with pytest.raises(ScenarioError):
        load_scenario(path)
