"""Simulation harness: replicate generate -> fit -> score, then aggregate.

Each replication nu gets its own seed derived from the experiment's master
seed by a counter-based mixing function, and that seed is split again into
independent data and chain substreams.  Workers therefore never share RNG
state, and the fold over results is ordered by replication index, so the
output is bit-identical for any worker count.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from .generate import DgmKind, ModelParams, generate_dataset
from .network import (EvidenceNetwork, GeometrySummary, geometry_summary,
                      network_from_dict, network_to_dict)
from .quality import (AggregateReport, ReplicationResult,
                      aggregate, aggregate_from_dict, aggregate_to_dict,
                      replication_csv_header, replication_csv_row,
                      replication_result, suite_csv_row, SUITE_CSV_COLUMNS,
                      true_rank_probabilities)
from .rng import (RandomSource, STREAM_CHAIN, STREAM_DATA, derive_seed,
                  substream_seed)
from .sampler import ChainConfig, ChainError, ensure_compiled, run_chain
from .validation import InputError, require

DEFAULT_TAU = 0.1
DEFAULT_OMEGA = 1000

__all__ = [
    "ExperimentConfig", "ExperimentRecord", "SuiteResult",
    "run_experiment", "run_suite", "derive_seed",
    "write_experiment_outputs", "load_experiment_record",
    "records_equivalent", "config_to_dict", "config_from_dict",
]


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one experiment bit-for-bit."""

    name: str
    network: EvidenceNetwork
    params: ModelParams
    master_seed: int
    dgm: DgmKind = DgmKind.NORMAL
    omega: int = DEFAULT_OMEGA
    chain: ChainConfig = field(default_factory=ChainConfig)
    worker_count: int = 1
    dump_samples: bool = False

    def __post_init__(self):
        require(bool(self.name) and "," not in self.name and "\n" not in self.name
                and "/" not in self.name,
                "experiment name must be non-empty without ',', '/' or newlines")
        require(self.params.n_treatments == self.network.n_treatments,
                "params and network disagree on the number of treatments")
        require(self.omega >= 2, "omega must be >= 2")
        require(self.worker_count >= 1, "worker_count must be >= 1")
        require(0 <= int(self.master_seed) < 2 ** 64,
                "master_seed must fit in 64 bits")
        require(isinstance(self.dgm, DgmKind), "dgm must be a DgmKind")


@dataclass(frozen=True, eq=False)
class ExperimentRecord:
    """One experiment's full output: per-replication results plus aggregate."""

    config: ExperimentConfig
    geometry: GeometrySummary
    results: tuple
    aggregate: AggregateReport
    mean_acceptance: dict
    wall_seconds: float

    def __post_init__(self):
        require(len(self.results) == self.config.omega,
                "replication count must equal omega")


@dataclass(frozen=True, eq=False)
class SuiteResult:
    records: dict      # name -> ExperimentRecord
    failures: dict     # name -> error message
    suite_csv_path: Path


def _replicate(task):
    config, truth, rep_index = task
    rep_seed = derive_seed(config.master_seed, rep_index)
    data_rng = RandomSource(substream_seed(rep_seed, STREAM_DATA))
    dataset, _ = generate_dataset(config.network, config.params,
                                  config.dgm, data_rng)
    chain_cfg = replace(config.chain, seed=substream_seed(rep_seed, STREAM_CHAIN))
    try:
        samples = run_chain(config.network, dataset, chain_cfg)
    except ChainError as exc:
        raise ChainError(f"replication {rep_index}: {exc}") from exc
    result = replication_result(samples, truth, config.params,
                                rep_index=rep_index)
    acc = samples.acceptance
    acc_means = {
        "b": float(np.mean(acc["b"])),
        "delta": float(np.mean(acc["delta"])) if acc["delta"].size else float("nan"),
        "d": float(np.mean(acc["d"])),
        "tau": float(acc["tau"]),
    }
    return rep_index, result, acc_means, (samples if config.dump_samples else None)


def run_experiment(config: ExperimentConfig, sample_sink=None) -> ExperimentRecord:
    """Run omega independent replications and aggregate them.

    sample_sink, if given, is called as sample_sink(rep_index, samples) in
    replication order (requires config.dump_samples).
    """
    if sample_sink is not None:
        require(config.dump_samples,
                "sample_sink requires dump_samples=True in the config")
    truth = true_rank_probabilities(config.params)
    tasks = [(config, truth, nu) for nu in range(1, config.omega + 1)]

    started = time.perf_counter()
    outputs = []
    if config.worker_count == 1:
        for task in tasks:
            outputs.append(_replicate(task))
    else:
        ensure_compiled()  # compile before forking so workers reuse the JIT cache
        workers = min(config.worker_count, config.omega)
        with get_context("fork").Pool(processes=workers) as pool:
            for out in pool.imap_unordered(_replicate, tasks, chunksize=1):
                outputs.append(out)
    outputs.sort(key=lambda t: t[0])
    wall = time.perf_counter() - started

    results = tuple(out[1] for out in outputs)
    acc_keys = ("b", "delta", "d", "tau")
    mean_acceptance = {
        k: float(np.mean([out[2][k] for out in outputs])) for k in acc_keys}
    if sample_sink is not None:
        for rep_index, _, _, samples in outputs:
            sample_sink(rep_index, samples)

    report = aggregate(results, truth, config.params)
    return ExperimentRecord(config=config, geometry=geometry_summary(config.network),
                            results=results, aggregate=report,
                            mean_acceptance=mean_acceptance, wall_seconds=wall)


# ---------------------------------------------------------------------------
# serialization

def config_to_dict(config: ExperimentConfig) -> dict:
    return {
        "name": config.name,
        "network": network_to_dict(config.network),
        "d": list(config.params.d),
        "tau": config.params.tau,
        "dgm": config.dgm.value,
        "omega": config.omega,
        "chain": {
            "burn_in": config.chain.burn_in,
            "iterations_after_burn_in": config.chain.iterations_after_burn_in,
            "thin": config.chain.thin,
            "target_acceptance": config.chain.target_acceptance,
        },
        "master_seed": config.master_seed,
        "workers": config.worker_count,
        "dump_samples": config.dump_samples,
    }


_CONFIG_KEYS = {"name", "network", "network_file", "d", "tau", "dgm", "omega",
                "n_per_arm", "chain", "master_seed", "workers", "dump_samples"}
_CHAIN_KEYS = {"burn_in", "iterations_after_burn_in", "thin", "target_acceptance"}


def config_from_dict(obj: dict, base_dir: Path | None = None) -> ExperimentConfig:
    """Parse the JSON config mirror; unknown keys are rejected."""
    require(isinstance(obj, dict), "config must be a JSON object")
    unknown = set(obj) - _CONFIG_KEYS
    require(not unknown, f"unknown config keys: {sorted(unknown)}")
    require("name" in obj, "config key 'name' is required")
    require("master_seed" in obj,
            "config key 'master_seed' is required (reproducibility is mandatory)")
    require("d" in obj, "config key 'd' is required")
    require(("network" in obj) != ("network_file" in obj),
            "config needs exactly one of 'network' or 'network_file'")

    n_per_arm = obj.get("n_per_arm")
    if n_per_arm is not None:
        require(isinstance(n_per_arm, int) and n_per_arm >= 1,
                "n_per_arm must be a positive integer")
    if "network" in obj:
        network = network_from_dict(obj["network"], default_n_per_arm=n_per_arm)
    else:
        path = Path(obj["network_file"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        try:
            loaded = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise InputError(f"network file not found: {path}")
        except json.JSONDecodeError as exc:
            raise InputError(f"network file {path} is not valid JSON: {exc}")
        network = network_from_dict(loaded, default_n_per_arm=n_per_arm)

    d = obj["d"]
    require(isinstance(d, list) and all(isinstance(v, (int, float)) for v in d),
            "'d' must be a list of numbers")
    tau = obj.get("tau", DEFAULT_TAU)
    require(isinstance(tau, (int, float)), "'tau' must be a number")
    params = ModelParams(d=tuple(float(v) for v in d), tau=float(tau))

    dgm_raw = obj.get("dgm", DgmKind.NORMAL.value)
    try:
        dgm = DgmKind(dgm_raw)
    except ValueError:
        raise InputError(
            f"unknown dgm {dgm_raw!r}; choose from "
            f"{[k.value for k in DgmKind]}")

    chain_obj = obj.get("chain", {})
    require(isinstance(chain_obj, dict), "'chain' must be an object")
    unknown = set(chain_obj) - _CHAIN_KEYS
    require(not unknown, f"unknown chain keys: {sorted(unknown)}")
    chain = ChainConfig(**{k: chain_obj[k] for k in _CHAIN_KEYS if k in chain_obj})

    omega = obj.get("omega", DEFAULT_OMEGA)
    require(isinstance(omega, int), "'omega' must be an integer")
    workers = obj.get("workers", 1)
    require(isinstance(workers, int), "'workers' must be an integer")
    master_seed = obj["master_seed"]
    require(isinstance(master_seed, int), "'master_seed' must be an integer")

    return ExperimentConfig(
        name=str(obj["name"]), network=network, params=params,
        master_seed=master_seed, dgm=dgm, omega=omega, chain=chain,
        worker_count=workers, dump_samples=bool(obj.get("dump_samples", False)),
    )


def _geometry_to_dict(geo: GeometrySummary) -> dict:
    return {
        "K": np.asarray(geo.K).tolist(),
        "degrees": list(geo.degrees),
        "mean_degree": geo.mean_degree,
        "irregularity": geo.irregularity,
        "normalised_irregularity": geo.normalised_irregularity,
    }


def write_experiment_outputs(record: ExperimentRecord, out_dir) -> Path:
    """Write <out_dir>/<name>/replications.csv and aggregate.json."""
    exp_dir = Path(out_dir) / record.config.name
    exp_dir.mkdir(parents=True, exist_ok=True)
    n = record.config.network.n_treatments

    lines = [replication_csv_header(n)]
    lines += [replication_csv_row(res) for res in record.results]
    (exp_dir / "replications.csv").write_text("\n".join(lines) + "\n",
                                              encoding="utf-8")

    payload = {
        "config": config_to_dict(record.config),
        "geometry": _geometry_to_dict(record.geometry),
        "aggregate": aggregate_to_dict(record.aggregate),
        "mean_acceptance": record.mean_acceptance,
        "wall_seconds": record.wall_seconds,
    }
    (exp_dir / "aggregate.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return exp_dir


def load_experiment_record(exp_dir) -> ExperimentRecord:
    """Rebuild an ExperimentRecord from its on-disk form."""
    exp_dir = Path(exp_dir)
    payload = json.loads((exp_dir / "aggregate.json").read_text(encoding="utf-8"))
    config = config_from_dict(payload["config"])
    n = config.network.n_treatments

    text = (exp_dir / "replications.csv").read_text(encoding="utf-8")
    rows = text.strip().split("\n")
    require(rows[0] == replication_csv_header(n),
            "replications.csv header does not match the network")
    results = []
    for row in rows[1:]:
        cells = row.split(",")
        rep = int(cells[0])
        pos = 1
        d_hat = np.array([float(v) for v in cells[pos:pos + n - 1]])
        pos += n - 1
        tau_hat = float(cells[pos])
        pos += 1
        p_hat = np.array([float(v) for v in cells[pos:pos + n * n]]).reshape(n, n)
        pos += n * n
        delta_p = np.array([float(v) for v in cells[pos:pos + n * n]]).reshape(n, n)
        pos += n * n
        sucra_hat = np.array([float(v) for v in cells[pos:pos + n]])
        results.append(ReplicationResult(rep_index=rep, d_hat=d_hat,
                                         tau_hat=tau_hat, P_hat=p_hat,
                                         delta_P=delta_p, sucra_hat=sucra_hat))

    return ExperimentRecord(
        config=config, geometry=geometry_summary(config.network),
        results=tuple(results),
        aggregate=aggregate_from_dict(payload["aggregate"]),
        mean_acceptance=payload["mean_acceptance"],
        wall_seconds=payload["wall_seconds"],
    )


def _arrays_equal(a, b) -> bool:
    return np.array_equal(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def records_equivalent(a: ExperimentRecord, b: ExperimentRecord) -> bool:
    """Field-by-field equality ignoring timing."""
    if a.config != b.config:
        return False
    ga, gb = a.geometry, b.geometry
    if not (_arrays_equal(ga.K, gb.K) and _arrays_equal(ga.degrees, gb.degrees)
            and ga.mean_degree == gb.mean_degree
            and ga.irregularity == gb.irregularity
            and ga.normalised_irregularity == gb.normalised_irregularity):
        return False
    if len(a.results) != len(b.results):
        return False
    for ra, rb in zip(a.results, b.results):
        if ra.rep_index != rb.rep_index or ra.tau_hat != rb.tau_hat:
            return False
        if not (_arrays_equal(ra.d_hat, rb.d_hat)
                and _arrays_equal(ra.P_hat, rb.P_hat)
                and _arrays_equal(ra.delta_P, rb.delta_P)
                and _arrays_equal(ra.sucra_hat, rb.sucra_hat)):
            return False
    fa, fb = a.aggregate, b.aggregate
    scalar = ("n_replications", "mean_tau", "sd_tau", "abs_dP_bar",
              "abs_dP_bar_norm", "abs_dSUCRA_bar", "abs_dSUCRA_bar_norm",
              "sd_bar", "abs_dd_bar")
    if any(getattr(fa, k) != getattr(fb, k) for k in scalar):
        return False
    arrays = ("mean_d", "sd_d", "mean_delta_P", "sd_delta_P", "mean_dd_alpha",
              "sd_dd_alpha", "sd_d_alpha", "mean_dsucra_alpha", "sd_dsucra_alpha")
    return all(_arrays_equal(getattr(fa, k), getattr(fb, k)) for k in arrays)


def run_suite(configs, output_dir) -> SuiteResult:
    """Run several experiments, writing per-experiment outputs and suite.csv."""
    configs = list(configs)
    require(len(configs) >= 1, "suite needs at least one experiment config")
    names = [c.name for c in configs]
    dupes = {n for n in names if names.count(n) > 1}
    require(not dupes, f"duplicate experiment names: {sorted(dupes)}")

    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    records: dict = {}
    failures: dict = {}
    rows = [",".join(SUITE_CSV_COLUMNS)]
    for config in configs:
        try:
            record = run_experiment(config)
        except (ChainError, InputError) as exc:
            failures[config.name] = str(exc)
            continue
        records[config.name] = record
        write_experiment_outputs(record, out)
        rows.append(suite_csv_row(
            config.name, len(config.network.trials),
            record.geometry.normalised_irregularity, record.aggregate))
    suite_path = out / "suite.csv"
    suite_path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    if failures:
        (out / "failures.txt").write_text(
            "".join(f"{name}: {msg}\n" for name, msg in failures.items()),
            encoding="utf-8")
    return SuiteResult(records=records, failures=failures,
                       suite_csv_path=suite_path)
