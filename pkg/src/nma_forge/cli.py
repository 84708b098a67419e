"""Command-line interface.

Subcommands: geometry, simulate, suite, plan, report.  Exit codes are part
of the contract: 0 success, 2 input/validation error, 3 statistical runtime
failure (an unhealthy chain or a failed suite member).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .harness import (config_from_dict, load_experiment_record, run_experiment,
                      run_suite, write_experiment_outputs)
from .network import geometry_summary, load_network, treatment_label
from .planner import (ALLOCATION_ANY, ALLOCATION_SINGLE, enumerate_plans,
                      evaluate_plans)
from .quality import SUITE_CSV_COLUMNS, suite_csv_row
from .sampler import ChainError, dump_samples
from .validation import InputError, require

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_STATISTICAL = 3

WORKERS_ENV = "NMA_FORGE_WORKERS"


def _default_workers() -> int | None:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return None
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"{WORKERS_ENV} must be an integer, got {raw!r}")
    require(value >= 1, f"{WORKERS_ENV} must be >= 1")
    return value


def _resolve_workers(flag_value, config_value: int) -> int:
    if flag_value is not None:
        require(flag_value >= 1, "--workers must be >= 1")
        return flag_value
    env_value = _default_workers()
    if env_value is not None:
        return env_value
    return config_value


def _geometry_quantities(network) -> dict:
    geo = geometry_summary(network)
    n = network.n_treatments
    out = {}
    for a in range(n):
        for b in range(a + 1, n):
            out[f"K_{treatment_label(a)}{treatment_label(b)}"] = int(geo.K[a, b])
    for a in range(n):
        out[f"degree_{treatment_label(a)}"] = int(geo.degrees[a])
    out["h2"] = geo.irregularity
    out["h2_over_k2"] = geo.normalised_irregularity
    out["m_trials"] = len(network.trials)
    out["mean_degree"] = geo.mean_degree
    out["n_treatments"] = n
    return out


def _format_value(value) -> str:
    if isinstance(value, int):
        return str(value)
    return "%.17g" % value


def _cmd_geometry(args) -> int:
    network = load_network(args.network)
    quantities = _geometry_quantities(network)
    if args.format == "csv":
        print("quantity,value")
        for key in sorted(quantities):
            print(f"{key},{_format_value(quantities[key])}")
        return EXIT_OK
    geo = geometry_summary(network)
    n = network.n_treatments
    print(f"n_treatments = {n}")
    print(f"m_trials = {len(network.trials)}")
    k_bits = " ".join(
        f"{treatment_label(a)}-{treatment_label(b)}={int(geo.K[a, b])}"
        for a in range(n) for b in range(a + 1, n))
    print(f"K: {k_bits}")
    deg_bits = " ".join(f"{treatment_label(a)}={int(geo.degrees[a])}"
                        for a in range(n))
    print(f"degrees: {deg_bits}")
    print(f"mean degree = {geo.mean_degree:.4f}")
    print(f"h2 = {geo.irregularity:.4f}")
    print(f"h2/k2 = {geo.normalised_irregularity:.2f}")
    return EXIT_OK


def _load_config(path: str, workers_flag):
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InputError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise InputError(f"config file {path} is not valid JSON: {exc}")
    config = config_from_dict(obj, base_dir=path.parent)
    workers = _resolve_workers(workers_flag, config.worker_count)
    if workers != config.worker_count:
        from dataclasses import replace
        config = replace(config, worker_count=workers)
    return config


def _experiment_summary_line(name, record) -> str:
    return ("%s: h2/k2=%.4f SDbar=%.4f |dP|bar=%.4f"
            % (name, record.geometry.normalised_irregularity,
               record.aggregate.sd_bar, record.aggregate.abs_dP_bar))


def _cmd_simulate(args) -> int:
    config = _load_config(args.config, args.workers)
    out_dir = Path(args.out)
    sink = None
    if config.dump_samples:
        samples_dir = out_dir / config.name / "samples"
        samples_dir.mkdir(parents=True, exist_ok=True)

        def sink(rep_index, samples):
            dump_samples(samples, samples_dir / f"rep_{rep_index:05d}.csv",
                         thin=config.chain.thin)

    record = run_experiment(config, sample_sink=sink)
    write_experiment_outputs(record, out_dir)
    print(_experiment_summary_line(config.name, record))
    return EXIT_OK


def _cmd_suite(args) -> int:
    config_dir = Path(args.configs)
    require(config_dir.is_dir(), f"--configs {config_dir} is not a directory")
    paths = sorted(config_dir.glob("*.json"))
    require(bool(paths), f"no *.json config files in {config_dir}")
    configs = [_load_config(str(p), args.workers) for p in paths]
    result = run_suite(configs, args.out)
    for name, record in result.records.items():
        print(_experiment_summary_line(name, record))
    if result.failures:
        for name, message in result.failures.items():
            print(f"FAILED {name}: {message}", file=sys.stderr)
        return EXIT_STATISTICAL
    return EXIT_OK


def _cmd_plan(args) -> int:
    network = load_network(args.network)
    candidates = enumerate_plans(network, args.budget, allocation=args.allocation)
    top = candidates[:args.top]
    if args.format == "csv":
        print("rank,comparisons,h2_over_k2,delta_h2_over_k2")
        for i, cand in enumerate(top, start=1):
            print("%d,%s,%.17g,%.17g" % (i, cand.label().replace(",", ";"),
                                         cand.resulting_irregularity,
                                         cand.delta_irregularity))
    else:
        print(f"{'rank':>4}  {'comparisons':<28} {'h2/k2':>8} {'delta':>9}")
        for i, cand in enumerate(top, start=1):
            print(f"{i:>4}  {cand.label():<28} {cand.resulting_irregularity:>8.4f}"
                  f" {cand.delta_irregularity:>+9.4f}")

    if not args.simulate:
        return EXIT_OK
    require(args.config is not None, "--simulate requires --config")
    base = _load_config(args.config, args.workers)
    from dataclasses import replace
    require(base.network.n_treatments == network.n_treatments,
            "config and --network disagree on the number of treatments")
    base = replace(base, network=network)
    rows, records = evaluate_plans(top, base)
    print()
    if args.format == "csv":
        print("name,M,h2_over_k2,sd_bar,abs_dP_bar")
        for row in rows:
            print("%s,%d,%.17g,%.17g,%.17g" % (row.name, row.m_trials,
                                               row.h2_over_k2, row.sd_bar,
                                               row.abs_dP_bar))
    else:
        print(f"{'name':<28} {'M':>4} {'h2/k2':>8} {'SDbar':>8} {'|dP|bar':>8}")
        for row in rows:
            print(f"{row.name:<28} {row.m_trials:>4} {row.h2_over_k2:>8.4f}"
                  f" {row.sd_bar:>8.4f} {row.abs_dP_bar:>8.4f}")
    if args.out is not None:
        for record in records.values():
            write_experiment_outputs(record, args.out)
    return EXIT_OK


def _cmd_report(args) -> int:
    root = Path(args.results)
    require(root.is_dir(), f"{root} is not a directory")
    agg_paths = sorted(root.glob("*/aggregate.json"))
    require(bool(agg_paths),
            f"no <experiment>/aggregate.json files under {root}")
    rows = []
    for path in agg_paths:
        record = load_experiment_record(path.parent)
        rows.append((path.parent.name, record))
    if args.format == "csv":
        print(",".join(SUITE_CSV_COLUMNS))
        for name, record in rows:
            print(suite_csv_row(name, len(record.config.network.trials),
                                record.geometry.normalised_irregularity,
                                record.aggregate))
    else:
        header = (f"{'network':<24} {'M':>4} {'h2/k2':>7} {'SDbar':>8} "
                  f"{'|dP|bar':>8} {'|dS|bar':>8} {'|dd|bar':>8} {'tau':>7}")
        print(header)
        for name, record in rows:
            agg = record.aggregate
            print(f"{name:<24} {len(record.config.network.trials):>4} "
                  f"{record.geometry.normalised_irregularity:>7.4f} "
                  f"{agg.sd_bar:>8.4f} {agg.abs_dP_bar:>8.4f} "
                  f"{agg.abs_dSUCRA_bar:>8.4f} {agg.abs_dd_bar:>8.4f} "
                  f"{agg.mean_tau:>7.4f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nma-forge",
        description="Simulation toolkit for ranking quality in network "
                    "meta-analysis: geometry metrics, synthetic data, "
                    "Bayesian model fitting, and trial planning.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("geometry", help="print geometry metrics of a network file")
    p.add_argument("--network", required=True, help="network JSON file")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.set_defaults(func=_cmd_geometry)

    p = sub.add_parser("simulate", help="run one experiment from a config file")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--workers", type=int, default=None,
                   help=f"worker processes (default: ${WORKERS_ENV} or config)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("suite", help="run every config in a directory")
    p.add_argument("--configs", required=True, help="directory of config JSONs")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=_cmd_suite)

    p = sub.add_parser("plan", help="rank candidate trial additions")
    p.add_argument("--network", required=True, help="network JSON file")
    p.add_argument("--budget", required=True, type=int,
                   help="number of new two-arm trials")
    p.add_argument("--allocation", choices=(ALLOCATION_SINGLE, ALLOCATION_ANY),
                   default=ALLOCATION_SINGLE)
    p.add_argument("--top", type=int, default=10,
                   help="how many candidates to show / simulate")
    p.add_argument("--simulate", action="store_true",
                   help="also simulate the top candidates")
    p.add_argument("--config", default=None,
                   help="base experiment config (required with --simulate)")
    p.add_argument("--out", default=None,
                   help="directory for simulation outputs (optional)")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("report", help="tabulate stored experiment outputs")
    p.add_argument("--results", required=True,
                   help="directory containing <experiment>/aggregate.json")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ChainError as exc:
        print(f"chain failure: {exc}", file=sys.stderr)
        return EXIT_STATISTICAL


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
