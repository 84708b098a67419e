"""Estimation-quality metrics over repeated simulated analyses.

Given the generating parameters, the true rank structure is known exactly,
so each fitted replication yields bias terms: rank-probability bias,
SUCRA bias, and contrast bias.  `aggregate` folds a list of replications
into per-treatment and whole-network indicators: the total magnitude of
rank-probability bias, total SUCRA bias, total contrast standard
deviation, and total contrast bias (raw and normalised by their analytic
maxima, 2N and N).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ranks
from .generate import ModelParams
from .network import treatment_label
from .validation import InputError, require

IDENTITY_TOL = 1e-12

SUITE_CSV_COLUMNS = (
    "network_id", "M", "h2_over_k2", "sd_bar",
    "abs_dP_bar", "abs_dP_bar_norm",
    "abs_dSUCRA_bar", "abs_dSUCRA_bar_norm",
    "abs_dd_bar", "mean_tau", "sd_tau",
)


@dataclass(frozen=True, eq=False)
class TruthSummary:
    """Exact rank probabilities and SUCRA implied by known parameters."""

    P_true: np.ndarray
    sucra_true: np.ndarray

    @property
    def n_treatments(self) -> int:
        return self.P_true.shape[0]


@dataclass(frozen=True, eq=False)
class ReplicationResult:
    """Point estimates and rank biases from one fitted replication."""

    rep_index: int
    d_hat: np.ndarray      # posterior means of the basic contrasts
    tau_hat: float
    P_hat: np.ndarray      # estimated rank probability matrix
    delta_P: np.ndarray    # P_hat - P_true
    sucra_hat: np.ndarray

    def __post_init__(self):
        require(bool(np.all(np.abs(self.delta_P.sum(axis=1)) <= IDENTITY_TOL)),
                "rank-bias rows must sum to zero")

    @property
    def n_treatments(self) -> int:
        return self.P_hat.shape[0]


@dataclass(frozen=True, eq=False)
class AggregateReport:
    """Replication-averaged estimates, biases, and quality totals."""

    n_replications: int
    mean_d: np.ndarray          # N x N, pairwise contrast means over reps
    sd_d: np.ndarray            # N x N, pairwise contrast SDs over reps
    mean_tau: float
    sd_tau: float
    mean_delta_P: np.ndarray    # N x N
    sd_delta_P: np.ndarray      # N x N, SDs of the rank biases over reps
    mean_dd_alpha: np.ndarray   # per-treatment mean contrast bias
    sd_dd_alpha: np.ndarray     # SD over reps of the per-rep treatment bias
    sd_d_alpha: np.ndarray      # per-treatment mean contrast SD
    mean_dsucra_alpha: np.ndarray
    sd_dsucra_alpha: np.ndarray
    abs_dP_bar: float
    abs_dP_bar_norm: float
    abs_dSUCRA_bar: float
    abs_dSUCRA_bar_norm: float
    sd_bar: float
    abs_dd_bar: float

    @property
    def n_treatments(self) -> int:
        return self.mean_d.shape[0]


def true_rank_probabilities(params: ModelParams) -> TruthSummary:
    """Rank structure implied by the generating contrasts, ties split."""
    effects = np.concatenate([[0.0], np.asarray(params.d, dtype=float)])
    p_true = ranks.rank_indicator(effects)
    sucra_true = ranks.sucra(ranks.RankProbabilityMatrix(p_true)).values
    return TruthSummary(P_true=p_true, sucra_true=sucra_true)


def replication_result(samples, truth: TruthSummary, params: ModelParams,
                       rep_index: int = 0) -> ReplicationResult:
    """Point estimates and rank biases for one posterior sample set."""
    n = truth.n_treatments
    require(samples.n_treatments == n, "samples and truth disagree on N")
    require(params.n_treatments == n, "params and truth disagree on N")
    p_hat = ranks.rank_probabilities(samples)
    sucra_hat = ranks.sucra(p_hat).values
    return ReplicationResult(
        rep_index=rep_index,
        d_hat=samples.d_samples.mean(axis=0),
        tau_hat=float(samples.tau_samples.mean()),
        P_hat=p_hat.P,
        delta_P=p_hat.P - truth.P_true,
        sucra_hat=sucra_hat,
    )


def _pairwise_contrasts(d_hat: np.ndarray) -> np.ndarray:
    """All-pairs matrix C[a, b] = effect of b relative to a."""
    full = np.concatenate([[0.0], d_hat])
    return full[None, :] - full[:, None]


def aggregate(results, truth: TruthSummary, params: ModelParams) -> AggregateReport:
    """Fold replication results into the quality indicators."""
    results = list(results)
    omega = len(results)
    if omega < 2:
        raise InputError("aggregation needs at least 2 replications")
    n = truth.n_treatments
    for res in results:
        require(res.n_treatments == n, "replication with mismatched N")

    d_pair = np.stack([_pairwise_contrasts(res.d_hat) for res in results])
    d_pair_true = _pairwise_contrasts(np.asarray(params.d, dtype=float))
    delta_p = np.stack([res.delta_P for res in results])
    dsucra = np.stack([res.sucra_hat - truth.sucra_true for res in results])
    taus = np.array([res.tau_hat for res in results])

    mean_d = d_pair.mean(axis=0)
    sd_d = d_pair.std(axis=0, ddof=1)
    mean_delta_p = delta_p.mean(axis=0)
    sd_delta_p = delta_p.std(axis=0, ddof=1)

    bias_pair = d_pair - d_pair_true[None, :, :]
    off_diag = ~np.eye(n, dtype=bool)
    # per-rep, per-treatment bias averaged over the N-1 contrasts with alpha first
    bias_alpha_rep = bias_pair[:, off_diag].reshape(omega, n, n - 1).mean(axis=2)
    mean_dd_alpha = bias_alpha_rep.mean(axis=0)
    sd_dd_alpha = bias_alpha_rep.std(axis=0, ddof=1)
    sd_d_alpha = sd_d[off_diag].reshape(n, n - 1).mean(axis=1)

    mean_dsucra_alpha = dsucra.mean(axis=0)
    sd_dsucra_alpha = dsucra.std(axis=0, ddof=1)

    abs_dp_bar = float(np.abs(mean_delta_p).sum())
    abs_dsucra_bar = float(np.abs(mean_dsucra_alpha).sum())
    sd_bar = float(sd_d_alpha.sum())
    abs_dd_bar = float(np.abs(mean_dd_alpha).sum())

    return AggregateReport(
        n_replications=omega,
        mean_d=mean_d, sd_d=sd_d,
        mean_tau=float(taus.mean()), sd_tau=float(taus.std(ddof=1)),
        mean_delta_P=mean_delta_p, sd_delta_P=sd_delta_p,
        mean_dd_alpha=mean_dd_alpha, sd_dd_alpha=sd_dd_alpha,
        sd_d_alpha=sd_d_alpha,
        mean_dsucra_alpha=mean_dsucra_alpha, sd_dsucra_alpha=sd_dsucra_alpha,
        abs_dP_bar=abs_dp_bar, abs_dP_bar_norm=abs_dp_bar / (2.0 * n),
        abs_dSUCRA_bar=abs_dsucra_bar, abs_dSUCRA_bar_norm=abs_dsucra_bar / n,
        sd_bar=sd_bar, abs_dd_bar=abs_dd_bar,
    )


def aggregate_to_dict(report: AggregateReport) -> dict:
    """JSON-ready representation; lossless for round-tripping."""
    def tolist(a):
        return np.asarray(a).tolist()
    return {
        "n_replications": report.n_replications,
        "mean_d": tolist(report.mean_d),
        "sd_d": tolist(report.sd_d),
        "mean_tau": report.mean_tau,
        "sd_tau": report.sd_tau,
        "mean_delta_P": tolist(report.mean_delta_P),
        "sd_delta_P": tolist(report.sd_delta_P),
        "mean_dd_alpha": tolist(report.mean_dd_alpha),
        "sd_dd_alpha": tolist(report.sd_dd_alpha),
        "sd_d_alpha": tolist(report.sd_d_alpha),
        "mean_dsucra_alpha": tolist(report.mean_dsucra_alpha),
        "sd_dsucra_alpha": tolist(report.sd_dsucra_alpha),
        "totals": {
            "abs_dP_bar": report.abs_dP_bar,
            "abs_dP_bar_norm": report.abs_dP_bar_norm,
            "abs_dSUCRA_bar": report.abs_dSUCRA_bar,
            "abs_dSUCRA_bar_norm": report.abs_dSUCRA_bar_norm,
            "sd_bar": report.sd_bar,
            "abs_dd_bar": report.abs_dd_bar,
        },
        "normalisation": {
            "abs_dP_bar_max": 2.0 * report.n_treatments,
            "abs_dSUCRA_bar_max": float(report.n_treatments),
            "note": "normalised totals divide by the analytic maxima above",
        },
    }


def aggregate_from_dict(obj: dict) -> AggregateReport:
    totals = obj["totals"]
    return AggregateReport(
        n_replications=int(obj["n_replications"]),
        mean_d=np.asarray(obj["mean_d"], dtype=float),
        sd_d=np.asarray(obj["sd_d"], dtype=float),
        mean_tau=float(obj["mean_tau"]),
        sd_tau=float(obj["sd_tau"]),
        mean_delta_P=np.asarray(obj["mean_delta_P"], dtype=float),
        sd_delta_P=np.asarray(obj["sd_delta_P"], dtype=float),
        mean_dd_alpha=np.asarray(obj["mean_dd_alpha"], dtype=float),
        sd_dd_alpha=np.asarray(obj["sd_dd_alpha"], dtype=float),
        sd_d_alpha=np.asarray(obj["sd_d_alpha"], dtype=float),
        mean_dsucra_alpha=np.asarray(obj["mean_dsucra_alpha"], dtype=float),
        sd_dsucra_alpha=np.asarray(obj["sd_dsucra_alpha"], dtype=float),
        abs_dP_bar=float(totals["abs_dP_bar"]),
        abs_dP_bar_norm=float(totals["abs_dP_bar_norm"]),
        abs_dSUCRA_bar=float(totals["abs_dSUCRA_bar"]),
        abs_dSUCRA_bar_norm=float(totals["abs_dSUCRA_bar_norm"]),
        sd_bar=float(totals["sd_bar"]),
        abs_dd_bar=float(totals["abs_dd_bar"]),
    )


def suite_csv_row(network_id: str, m_trials: int, h2_over_k2: float,
                  report: AggregateReport) -> str:
    """One suite-CSV line in SUITE_CSV_COLUMNS order (17 sig. digits)."""
    cells = [network_id, str(m_trials), "%.17g" % h2_over_k2]
    cells += ["%.17g" % v for v in (
        report.sd_bar, report.abs_dP_bar, report.abs_dP_bar_norm,
        report.abs_dSUCRA_bar, report.abs_dSUCRA_bar_norm,
        report.abs_dd_bar, report.mean_tau, report.sd_tau)]
    return ",".join(cells)


def replication_csv_header(n_treatments: int) -> str:
    """Header for the per-replication CSV (one row per fitted realisation)."""
    n = n_treatments
    cols = ["rep"]
    cols += [f"d_hat_T1{treatment_label(a)}" for a in range(1, n)]
    cols.append("tau_hat")
    cols += [f"P_hat_{treatment_label(a)}_r{r}"
             for a in range(n) for r in range(1, n + 1)]
    cols += [f"delta_P_{treatment_label(a)}_r{r}"
             for a in range(n) for r in range(1, n + 1)]
    cols += [f"sucra_{treatment_label(a)}" for a in range(n)]
    return ",".join(cols)


def replication_csv_row(res: ReplicationResult) -> str:
    cells = [str(res.rep_index)]
    cells += ["%.17g" % v for v in res.d_hat]
    cells.append("%.17g" % res.tau_hat)
    cells += ["%.17g" % v for v in res.P_hat.ravel()]
    cells += ["%.17g" % v for v in res.delta_P.ravel()]
    cells += ["%.17g" % v for v in res.sucra_hat]
    return ",".join(cells)
