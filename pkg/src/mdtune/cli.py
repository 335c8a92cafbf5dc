"""Command-line interface.

Subcommands: run, experiment, gen-data, train-forest, validate-rules.
Exit codes: 0 on success, 1 on runtime errors, 2 on usage errors
(argparse convention).  ``MDTUNE_OUT`` sets the default output
directory for report files.
"""

from __future__ import annotations

import argparse
import os
import sys

from .configuration import enumerate_configurations

STRATEGY_KINDS = ("full", "predictive", "expert", "random-forest", "fixed")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdtune",
        description="Short-range MD simulator with runtime algorithm "
                    "selection (linked cells / Verlet lists, five "
                    "traversals, AoS/SoA, Newton-3, cell size factors).")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_strategy_flags(p, default=None):
        p.add_argument("--strategy", choices=STRATEGY_KINDS,
                       default=default,
                       help="selection strategy (default: %(default)s)")
        p.add_argument("--model", help="forest model JSON "
                                       "(random-forest strategy)")
        p.add_argument("--rules", help="fuzzy rule file "
                                       "(expert strategy)")
        p.add_argument("--config", help="configuration id "
                                        "(fixed strategy)")

    def add_out_flag(p):
        p.add_argument("--out", help="output directory (default: "
                                     "$MDTUNE_OUT or current directory)")

    p_run = sub.add_parser("run", help="run a scenario YAML file")
    p_run.add_argument("scenario", help="scenario YAML path")
    p_run.add_argument("--seed", type=int, help="override scenario seed")
    add_strategy_flags(p_run)
    add_out_flag(p_run)

    p_exp = sub.add_parser("experiment",
                           help="run a named desk-scale experiment")
    p_exp.add_argument("name", choices=("heating-sphere",
                                        "exploding-liquid",
                                        "rayleigh-taylor"))
    p_exp.add_argument("--scale", type=float, default=0.1,
                       help="desk scale in (0, 1] (default %(default)s)")
    p_exp.add_argument("--iterations", type=int,
                       help="override the scaled iteration count")
    p_exp.add_argument("--threads", type=int, default=1)
    p_exp.add_argument("--baseline-sweep", action="store_true",
                       help="also run every configuration as a fixed "
                            "baseline and report speedups")
    p_exp.add_argument("--timeout", type=float,
                       help="per-configuration wall budget for the "
                            "baseline sweep, seconds")
    p_exp.add_argument("--allow-large", action="store_true",
                       help="lift the rayleigh-taylor scale guard")
    add_strategy_flags(p_exp, default="full")
    add_out_flag(p_exp)

    p_gen = sub.add_parser("gen-data",
                           help="generate the training dataset CSV")
    p_gen.add_argument("--out", required=True, help="output CSV path")
    p_gen.add_argument("--scale", type=float, default=0.1)
    p_gen.add_argument("--cap", type=int, default=10_000,
                       help="per-scenario particle cap")
    p_gen.add_argument("--skins", default="0.1,0.2,0.3,0.4,0.5",
                       help="comma-separated skin sweep")
    p_gen.add_argument("--threads", default="1,2,4,8",
                       help="comma-separated thread-count sweep")
    p_gen.add_argument("--trial-iterations", type=int, default=10)
    p_gen.add_argument("--quiet", action="store_true")

    p_train = sub.add_parser("train-forest",
                             help="train a random forest from a dataset")
    p_train.add_argument("--data", required=True, help="training CSV")
    p_train.add_argument("--out", required=True, help="model JSON path")
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--trees", type=int, default=100)

    p_val = sub.add_parser("validate-rules",
                           help="check a fuzzy rule file")
    p_val.add_argument("rules", help="rule file path")
    return parser


def _require_file(parser, path, what):
    if not os.path.isfile(path):
        parser.error(f"{what} not found: {path}")


def _strategy_dict(args) -> dict | None:
    if args.strategy is None:
        return None
    spec = {"kind": args.strategy}
    if args.model:
        spec["model"] = args.model
    if args.rules:
        spec["rules"] = args.rules
    if args.config:
        spec["config"] = args.config
    if args.strategy == "random-forest" and not args.model:
        raise SystemExit("mdtune: --strategy random-forest needs --model")
    if args.strategy == "fixed" and not args.config:
        raise SystemExit("mdtune: --strategy fixed needs --config")
    return spec


def _outdir(args) -> str:
    outdir = args.out or os.environ.get("MDTUNE_OUT") or "."
    os.makedirs(outdir, exist_ok=True)
    return outdir


def _write_run_outputs(report, outdir, prefix, result=None) -> list[str]:
    from .experiments import write_comparison_csv
    from .plotting import render_comparison_figure, render_report_figures
    from .simulation import (write_report_csv, write_report_json,
                             write_tuning_log_csv)
    paths = []

    def out(name):
        p = os.path.join(outdir, f"{prefix}.{name}")
        paths.append(p)
        return p

    write_report_csv(report, out("report.csv"))
    write_tuning_log_csv(report, out("tuning.csv"))
    if result is not None:
        import json
        with open(out("report.json"), "w") as fh:
            json.dump(result.summary(), fh, indent=2)
            fh.write("\n")
        if result.baselines:
            write_comparison_csv(result, out("comparison.csv"))
    else:
        write_report_json(report, out("report.json"))
    paths.extend(render_report_figures(report, outdir, prefix))
    if result is not None:
        paths.extend(render_comparison_figure(result, outdir, prefix))
    return paths


def _cmd_run(parser, args) -> int:
    from .scenarios import load_scenario
    from .simulation import make_strategy, run_simulation
    _require_file(parser, args.scenario, "scenario file")
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario.seed = args.seed
    spec = _strategy_dict(args)
    strategy = make_strategy(spec) if spec is not None else None
    report = run_simulation(scenario, strategy)
    outdir = _outdir(args)
    for p in _write_run_outputs(report, outdir, scenario.name):
        print(p)
    if report.error:
        print(f"mdtune: run ended early: {report.error}",
              file=sys.stderr)
        return 1
    print(f"{scenario.name}: {len(report.records)} iterations, "
          f"force {report.total_force_ns / 1e9:.3f}s, "
          f"build {report.total_build_ns / 1e9:.3f}s")
    return 0


def _cmd_experiment(parser, args) -> int:
    from .experiments import run_experiment
    result = run_experiment(
        args.name, args.scale, _strategy_dict(args),
        iterations=args.iterations, threads=args.threads,
        baseline_sweep=args.baseline_sweep,
        baseline_timeout_s=args.timeout,
        allow_large=args.allow_large)
    outdir = _outdir(args)
    prefix = f"{args.name}-{args.scale:g}"
    for p in _write_run_outputs(result.report, outdir, prefix,
                                result=result):
        print(p)
    if result.report.error:
        print(f"mdtune: experiment ended early: {result.report.error}",
              file=sys.stderr)
        return 1
    line = (f"{args.name} @ scale {args.scale:g}: "
            f"{len(result.report.records)} iterations, force "
            f"{result.report.total_force_ns / 1e9:.3f}s")
    if result.speedup is not None:
        line += (f"; best single {result.best_single_id} "
                 f"-> speedup {result.speedup:.3f}")
    print(line)
    return 0


def _parse_float_list(parser, text, flag):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        parser.error(f"{flag} expects a comma-separated number list")


def _cmd_gen_data(parser, args) -> int:
    from .dataset import generate_training_dataset
    skins = _parse_float_list(parser, args.skins, "--skins")
    threads = tuple(int(v) for v in
                    _parse_float_list(parser, args.threads, "--threads"))
    progress = None
    if not args.quiet:
        def progress(name, skin, thread_count, label):
            print(f"  {name} skin={skin:g} threads={thread_count} "
                  f"-> {label}")
    rows = generate_training_dataset(
        args.out, scale=args.scale, cap=args.cap, skins=skins,
        threads=threads, trial_iterations=args.trial_iterations,
        progress=progress)
    print(f"wrote {rows} rows to {args.out}")
    return 0 if rows else 1


def _cmd_train_forest(parser, args) -> int:
    from .dataset import load_training_csv
    from .forest import save_forest, train_forest
    _require_file(parser, args.data, "dataset")
    features, labels = load_training_csv(args.data)
    forest = train_forest(features, labels, n_estimators=args.trees,
                          seed=args.seed)
    save_forest(forest, args.out)
    print(f"trained {args.trees} trees on {len(labels)} rows "
          f"({len(forest.classes)} distinct configurations) "
          f"-> {args.out}")
    return 0


def _cmd_validate_rules(parser, args) -> int:
    from .fuzzy import RuleFileError, parse_rule_file
    _require_file(parser, args.rules, "rule file")
    with open(args.rules, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        base = parse_rule_file(text, enumerate_configurations())
    except RuleFileError as exc:
        print(f"mdtune: {args.rules}: {exc}", file=sys.stderr)
        return 1
    covered = len(base.rules_by_config)
    print(f"{args.rules}: {len(base.variables)} variables, "
          f"{len(base.rules)} rules, {covered} configurations covered")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "experiment": _cmd_experiment,
        "gen-data": _cmd_gen_data,
        "train-forest": _cmd_train_forest,
        "validate-rules": _cmd_validate_rules,
    }
    try:
        return handlers[args.command](parser, args)
    except SystemExit:
        raise
    except KeyboardInterrupt:
        print("mdtune: interrupted", file=sys.stderr)
        return 130
    except Exception as exc:
        print(f"mdtune: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
