import csv
import json
import os

import pytest

import mdtune.dataset as ds
import mdtune.experiments as exp
from mdtune.cli import main
from mdtune.forest import load_forest
from mdtune.rules import default_rules_text
from mdtune.scenarios import GeneratorSpec

FIXED_ID = "LC-SLI-N3L-SoA-CSF1"

SCENARIO_YAML = """\
name: cli-smoke
domain: [9, 9, 9]
boundary: [reflective, reflective, reflective]
cutoff: 2.5
iterations: 12
seed: 4
generators:
  - family: uniform
    count: 40
"""


def tiny_roster(scale=0.1, cap=10_000):
    return [ds._spec("cli-tiny", (12.0, 12.0, 12.0),
                     [GeneratorSpec("uniform", count=50)], seed=2)]


@pytest.fixture
def tiny_dataset(tmp_path, monkeypatch):
    monkeypatch.setattr(ds, "dataset_scenarios", tiny_roster)
    out = tmp_path / "tiny.csv"
    ds.generate_training_dataset(out, skins=(0.1, 0.2), threads=(1,),
                                 trial_iterations=1)
    return out


# -- usage errors -------------------------------------------------------------

def test_no_command_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as err:
        main([])
    assert err.value.code == 2


def test_unknown_experiment_name_is_a_usage_error():
    with pytest.raises(SystemExit) as err:
        main(["experiment", "quenched-glass"])
    assert err.value.code == 2


def test_missing_scenario_file_is_a_usage_error(tmp_path):
    with pytest.raises(SystemExit) as err:
        main(["run", str(tmp_path / "nope.yaml")])
    assert err.value.code == 2


def test_fixed_strategy_requires_config(tmp_path):
    scenario = tmp_path / "s.yaml"
    scenario.write_text(SCENARIO_YAML)
    with pytest.raises(SystemExit) as err:
        main(["run", str(scenario), "--strategy", "fixed"])
    assert "--config" in str(err.value.code)


def test_forest_strategy_requires_model(tmp_path):
    scenario = tmp_path / "s.yaml"
    scenario.write_text(SCENARIO_YAML)
    with pytest.raises(SystemExit) as err:
        main(["run", str(scenario), "--strategy", "random-forest"])
    assert "--model" in str(err.value.code)


def test_bad_skin_list_is_a_usage_error(tmp_path):
    with pytest.raises(SystemExit) as err:
        main(["gen-data", "--out", str(tmp_path / "x.csv"),
              "--skins", "a,b"])
    assert err.value.code == 2


# -- validate-rules -----------------------------------------------------------

def test_validate_rules_accepts_the_shipped_file(tmp_path, capsys):
    path = tmp_path / "rules.txt"
    path.write_text(default_rules_text())
    assert main(["validate-rules", str(path)]) == 0
    out = capsys.readouterr().out
    assert "2 variables" in out
    assert "37 rules" in out
    assert "30 configurations covered" in out


def test_validate_rules_reports_broken_files(tmp_path, capsys):
    path = tmp_path / "broken.txt"
    path.write_text("var skin 0 1\nrule if skin == then Bad\n")
    assert main(["validate-rules", str(path)]) == 1
    err = capsys.readouterr().err
    assert str(path) in err
    assert "mdtune" in err


# -- run ----------------------------------------------------------------------

def test_run_writes_reports_and_figures(tmp_path, capsys):
    scenario = tmp_path / "s.yaml"
    scenario.write_text(SCENARIO_YAML)
    outdir = tmp_path / "out"
    code = main(["run", str(scenario), "--strategy", "fixed",
                 "--config", FIXED_ID, "--out", str(outdir)])
    assert code == 0
    produced = {p.name for p in outdir.iterdir()}
    assert "cli-smoke.report.csv" in produced
    assert "cli-smoke.tuning.csv" in produced
    assert "cli-smoke.report.json" in produced
    assert "cli-smoke.force-times.png" in produced
    assert "cli-smoke.selections.png" in produced
    with open(outdir / "cli-smoke.report.csv") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 13
    assert all(r[2] == FIXED_ID for r in rows[1:])
    doc = json.loads((outdir / "cli-smoke.report.json").read_text())
    assert doc["iterations"] == 12
    stdout = capsys.readouterr().out
    assert "cli-smoke: 12 iterations" in stdout
    assert str(outdir / "cli-smoke.report.csv") in stdout
    assert (outdir / "cli-smoke.force-times.png").stat().st_size > 0


def test_run_honours_mdtune_out_env(tmp_path, monkeypatch):
    scenario = tmp_path / "s.yaml"
    scenario.write_text(SCENARIO_YAML)
    envdir = tmp_path / "envout"
    monkeypatch.setenv("MDTUNE_OUT", str(envdir))
    assert main(["run", str(scenario), "--strategy", "fixed",
                 "--config", FIXED_ID]) == 0
    assert (envdir / "cli-smoke.report.csv").is_file()


def test_run_reports_runtime_failure(tmp_path, capsys):
    scenario = tmp_path / "explode.yaml"
    scenario.write_text(
        "name: overlap\n"
        "domain: [9, 9, 9]\n"
        "boundary: [reflective, reflective, reflective]\n"
        "cutoff: 2.5\n"
        "iterations: 5\n"
        "generators:\n"
        "  - family: uniform\n"
        "    count: 2\n"
        "    region:\n"
        "      lo: [4, 4, 4]\n"
        "      hi: [4.01, 4.01, 4.01]\n")
    outdir = tmp_path / "out"
    code = main(["run", str(scenario), "--strategy", "fixed",
                 "--config", FIXED_ID, "--out", str(outdir)])
    assert code == 1
    assert "ended early" in capsys.readouterr().err
    assert (outdir / "overlap.report.csv").is_file()


# -- experiment ---------------------------------------------------------------

def test_experiment_with_baseline_sweep(tmp_path, monkeypatch, space,
                                        capsys):
    monkeypatch.setattr(exp, "enumerate_configurations",
                        lambda: space[:3])
    outdir = tmp_path / "out"
    code = main(["experiment", "heating-sphere", "--scale", "0.005",
                 "--iterations", "4", "--strategy", "fixed",
                 "--config", space[0].id, "--baseline-sweep",
                 "--out", str(outdir)])
    assert code == 0
    produced = {p.name for p in outdir.iterdir()}
    prefix = "heating-sphere-0.005"
    assert f"{prefix}.report.csv" in produced
    assert f"{prefix}.comparison.csv" in produced
    assert f"{prefix}.comparison.png" in produced
    assert f"{prefix}.report.json" in produced
    doc = json.loads((outdir / f"{prefix}.report.json").read_text())
    assert doc["experiment"] == "heating-sphere"
    assert "speedupVsBestSingle" in doc
    with open(outdir / f"{prefix}.comparison.csv") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 4
    assert "speedup" in capsys.readouterr().out


def test_experiment_scale_guard_fails_cleanly(tmp_path, capsys):
    code = main(["experiment", "rayleigh-taylor", "--scale", "0.2",
                 "--iterations", "2", "--out", str(tmp_path)])
    assert code == 1
    assert "allow_large" in capsys.readouterr().err


# -- gen-data and train-forest ------------------------------------------------

def test_gen_data_writes_csv(tmp_path, monkeypatch, capsys):
    monkeypatch.setattr(ds, "dataset_scenarios", tiny_roster)
    out = tmp_path / "data.csv"
    code = main(["gen-data", "--out", str(out), "--skins", "0.1,0.2",
                 "--threads", "1", "--trial-iterations", "1"])
    assert code == 0
    stdout = capsys.readouterr().out
    assert "wrote 2 rows" in stdout
    assert "cli-tiny" in stdout          # progress lines
    with open(out) as fh:
        assert len(list(csv.reader(fh))) == 3


def test_gen_data_empty_roster_exits_nonzero(tmp_path, monkeypatch):
    monkeypatch.setattr(ds, "dataset_scenarios",
                        lambda scale=0.1, cap=10_000: [])
    out = tmp_path / "none.csv"
    assert main(["gen-data", "--out", str(out), "--quiet"]) == 1


def test_train_forest_round_trip(tmp_path, tiny_dataset, capsys):
    model = tmp_path / "model.json"
    code = main(["train-forest", "--data", str(tiny_dataset),
                 "--out", str(model), "--trees", "3", "--seed", "1"])
    assert code == 0
    assert "trained 3 trees" in capsys.readouterr().out
    forest = load_forest(model)
    assert forest.seed == 1
    assert len(forest.trees) == 3


def test_train_forest_missing_dataset(tmp_path):
    with pytest.raises(SystemExit) as err:
        main(["train-forest", "--data", str(tmp_path / "no.csv"),
              "--out", str(tmp_path / "m.json")])
    assert err.value.code == 2
