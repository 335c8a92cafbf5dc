import numpy as np
import pytest

from mdtune.experiments import (COMPARISON_COLUMNS, BaselineRow,
                                ExperimentResult, comparison_table,
                                exploding_liquid_spec, experiment_spec,
                                heating_sphere_spec, rayleigh_taylor_spec,
                                run_baseline_sweep, run_experiment,
                                write_comparison_csv)
from mdtune.params import PERIODIC, REFLECTIVE
from mdtune.scenarios import generate_scenario
from mdtune.simulation import SimulationReport
from mdtune.tuning import FixedStrategy


def pick(space, config_id):
    return next(c for c in space if c.id == config_id)


# -- desk-scaled specs --------------------------------------------------------

def test_heating_sphere_desk_shape():
    spec = heating_sphere_spec(0.1)
    edge = 200.0 * 0.1 ** (1 / 3)
    assert spec.params.domain_size[0] == pytest.approx(edge)
    assert spec.params.boundary == (REFLECTIVE,) * 3
    assert spec.params.total_iterations == 15_000
    assert spec.params.thermostat.target_temperature == 100.0
    assert spec.params.thermostat.interval_iterations == 10
    assert spec.initial_temperature == pytest.approx(0.1)
    particles = generate_scenario(spec)
    # the molecule count scales with the volume: ~5497 at full scale
    assert particles.n == pytest.approx(549.7, rel=0.10)


def test_particle_count_scales_linearly_with_scale():
    # small spheres feel the lattice granularity, so compare two scales
    # that are both comfortably in the continuum regime
    n_small = generate_scenario(heating_sphere_spec(0.05)).n
    n_large = generate_scenario(heating_sphere_spec(0.4)).n
    assert n_large / n_small == pytest.approx(8.0, rel=0.15)


def test_heating_sphere_time_step_stretches_only_so_far():
    assert heating_sphere_spec(0.1).params.delta_t == pytest.approx(1e-3)
    assert heating_sphere_spec(0.02).params.delta_t == pytest.approx(1e-3)
    assert heating_sphere_spec(0.5).params.delta_t == pytest.approx(2e-4)


def test_exploding_liquid_desk_shape():
    spec = exploding_liquid_spec(0.05)
    c = 0.05 ** (1 / 3)
    assert spec.params.boundary == (PERIODIC,) * 3
    assert spec.params.domain_size.tolist() == pytest.approx(
        [120.0 * c, 480.0 * c, 120.0 * c])
    particles = generate_scenario(spec)
    # slab of 370440 HCP points at full scale plus a handful of gas
    assert particles.n == pytest.approx(370_440 * 0.05, rel=0.08)
    # the dense slab occupies a thin band around the y midpoint
    y = particles.positions[:, 1]
    dy = spec.params.domain_size[1]
    band = 18.0 * c / 2 + 1e-9
    slab_fraction = np.mean(np.abs(y - dy / 2) <= band)
    assert slab_fraction > 0.99


def test_rayleigh_taylor_desk_shape():
    spec = rayleigh_taylor_spec(0.02)
    c = 0.02 ** (1 / 3)
    assert spec.params.boundary == (PERIODIC, PERIODIC, REFLECTIVE)
    assert spec.params.gravity == pytest.approx(-12.44)
    assert len(spec.types) == 2
    assert spec.types[1].sigma == pytest.approx(0.5)
    assert spec.types[1].mass == pytest.approx(2.0)
    particles = generate_scenario(spec)
    z = particles.positions[:, 2]
    heavy = particles.type_id == 1
    z_split = 30.0 * c
    assert np.all(z[~heavy] <= z_split + 1e-9)
    assert np.all(z[heavy] >= z_split)
    # the heavy lattice is finer, so it outnumbers the light one
    assert heavy.sum() > (~heavy).sum()


def test_experiment_spec_guard_rails():
    assert experiment_spec("heating-sphere", 0.05).name.startswith(
        "heating-sphere")
    with pytest.raises(ValueError, match="allow_large"):
        experiment_spec("rayleigh-taylor", 0.2)
    spec = experiment_spec("rayleigh-taylor", 0.06, allow_large=True,
                           iterations=3)
    assert spec.params.total_iterations == 3
    with pytest.raises(ValueError, match="unknown experiment"):
        experiment_spec("quenched-glass", 0.1)


def test_iterations_override():
    assert heating_sphere_spec(0.1, iterations=42).params.total_iterations \
        == 42
    assert exploding_liquid_spec(0.05, iterations=7).params.total_iterations \
        == 7


@pytest.mark.parametrize("name,scale", [("heating-sphere", 0.01),
                                        ("exploding-liquid", 0.005),
                                        ("rayleigh-taylor", 0.004)])
def test_short_runs_stay_stable(name, scale, space):
    fast = pick(space, "LC-SLI-N3L-SoA-CSF1")
    result = run_experiment(name, scale, FixedStrategy(fast), iterations=5)
    assert result.report.error is None
    assert len(result.report.records) == 5
    assert result.report.final_temperature is not None
    assert np.isfinite(result.report.final_temperature)


# -- baseline sweeps ----------------------------------------------------------

def test_fixed_strategy_reuses_its_own_baseline_row(space):
    fast = pick(space, "LC-SLI-N3L-SoA-CSF1")
    result = run_experiment("heating-sphere", 0.005,
                            {"kind": "fixed", "config": fast.id},
                            iterations=4, baseline_sweep=True)
    assert result.report.error is None
    rows = {r.configuration_id: r for r in result.baselines}
    assert set(rows) == {c.id for c in space}
    own = rows[fast.id]
    assert own.total_force_ns == result.report.total_force_ns
    assert own.speedup == 1.0
    assert own.iterations_completed == 4
    assert result.best_single_id is not None
    best = rows[result.best_single_id]
    assert best.total_force_ns == result.best_single_force_ns
    assert result.speedup == pytest.approx(
        best.total_force_ns / result.report.total_force_ns)
    assert all(r.speedup is None or r.speedup >= result.speedup - 1e-12
               for r in result.baselines)
    summary = result.summary()
    assert summary["bestSingleConfiguration"] == result.best_single_id
    assert summary["speedupVsBestSingle"] == result.speedup


def test_deadline_timer_marks_rows_timed_out(space):
    scenario = heating_sphere_spec(0.005, iterations=50)
    strategy_report = SimulationReport(name="stub")
    rows = run_baseline_sweep(scenario, strategy_report=strategy_report,
                              strategy_config_id=space[0].id,
                              timeout_s=1e-9, space=space[:3])
    assert len(rows) == 3
    assert not rows[0].timed_out          # reused, never simulated
    for row in rows[1:]:
        assert row.timed_out
        assert row.error is None
        assert row.iterations_completed < 50


# -- comparison table ---------------------------------------------------------

def make_result():
    report = SimulationReport(name="x")
    result = ExperimentResult(name="demo", scale=0.01, report=report)
    result.baselines = [
        BaselineRow("slow", 500, 50, 10, speedup=5.0),
        BaselineRow("broken", 0, 0, 2, error="RuntimeError: nope"),
        BaselineRow("fast", 100, 10, 10, speedup=1.0),
        BaselineRow("late", 0, 0, 3, timed_out=True),
        BaselineRow("mid", 300, 30, 10, speedup=3.0),
    ]
    return result


def test_comparison_table_orders_and_formats():
    table = comparison_table(make_result())
    assert [r["configurationId"] for r in table] == [
        "fast", "mid", "slow", "broken", "late"]
    assert table[0]["speedupOverStrategy"] == "1"
    assert table[2]["speedupOverStrategy"] == "5"
    assert table[3]["error"] == "RuntimeError: nope"
    assert table[4]["timedOut"] is True
    assert table[4]["speedupOverStrategy"] == ""


def test_comparison_csv(tmp_path):
    path = tmp_path / "comparison.csv"
    write_comparison_csv(make_result(), path)
    import csv
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == COMPARISON_COLUMNS
    assert len(rows) == 6
    assert rows[1][0] == "fast"
