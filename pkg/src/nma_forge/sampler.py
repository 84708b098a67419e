"""Posterior sampling for the binomial random-effects network model.

`run_chain` draws from the joint posterior of (b, delta, d, tau) with a
single-site Metropolis-in-Gibbs sampler (see `_kernel` for the sweep loop)
and returns the thinned post-burn-in draws of the basic contrasts and tau.
`NetworkMetaAnalysis` wraps the same machinery in a scikit-learn style
estimator for interactive use.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from . import ranks
from ._kernel import run_sweeps
from .generate import Dataset
from .model import empirical_log_odds
from .network import EvidenceNetwork, Trial, treatment_label
from .rng import RandomSource
from .validation import InputError, require

DEFAULT_BURN_IN = 5_000
DEFAULT_ITERATIONS = 20_000
DEFAULT_THIN = 10
TARGET_ACCEPTANCE = 0.44
ACCEPTANCE_BOUNDS = (0.05, 0.95)


class ChainError(RuntimeError):
    """A chain finished but failed its own health checks."""


@dataclass(frozen=True)
class ChainConfig:
    """Length and tuning knobs for one sampler run."""

    burn_in: int = DEFAULT_BURN_IN
    iterations_after_burn_in: int = DEFAULT_ITERATIONS
    thin: int = DEFAULT_THIN
    seed: int = 0
    target_acceptance: float = TARGET_ACCEPTANCE

    def __post_init__(self):
        require(self.burn_in >= 0, "burn_in must be >= 0")
        require(self.iterations_after_burn_in >= 1,
                "iterations_after_burn_in must be >= 1")
        require(self.thin >= 1, "thin must be >= 1")
        require(self.iterations_after_burn_in % self.thin == 0,
                "iterations_after_burn_in must be a multiple of thin")
        require(0.0 < self.target_acceptance < 1.0,
                "target_acceptance must lie in (0, 1)")
        require(0 <= int(self.seed) < 2 ** 64, "seed must fit in 64 bits")

    @property
    def n_retained(self) -> int:
        return self.iterations_after_burn_in // self.thin


@dataclass(frozen=True, eq=False)
class PosteriorSamples:
    """Thinned posterior draws plus acceptance diagnostics.

    d_samples has one column per non-reference treatment, in treatment
    order, holding the basic contrasts against T1.
    """

    d_samples: np.ndarray
    tau_samples: np.ndarray
    acceptance: dict = field(compare=False)

    @property
    def n_draws(self) -> int:
        return self.d_samples.shape[0]

    @property
    def n_treatments(self) -> int:
        return self.d_samples.shape[1] + 1

    def d_mean(self) -> np.ndarray:
        return self.d_samples.mean(axis=0)

    def tau_mean(self) -> float:
        return float(self.tau_samples.mean())


def contrast_samples(samples: PosteriorSamples, alpha: int, beta: int) -> np.ndarray:
    """Draws of the relative effect of beta versus alpha (0-based ids).

    Computed from the basic contrasts as d[beta] - d[alpha] with the
    reference treatment fixed at zero, so transitivity holds exactly.
    """
    n = samples.n_treatments
    require(0 <= alpha < n, f"alpha out of range for {n} treatments")
    require(0 <= beta < n, f"beta out of range for {n} treatments")
    require(alpha != beta, "alpha and beta must differ")
    col_a = np.zeros(samples.n_draws) if alpha == 0 else samples.d_samples[:, alpha - 1]
    col_b = np.zeros(samples.n_draws) if beta == 0 else samples.d_samples[:, beta - 1]
    return col_b - col_a


def _pack(network: EvidenceNetwork, dataset: Dataset):
    """Flatten trials into the arm-major arrays the kernel consumes."""
    arms_total = sum(t.n_arms for t in network.trials)
    m_trials = len(network.trials)
    arm_off = np.zeros(m_trials + 1, dtype=np.int64)
    arm_t = np.zeros(arms_total, dtype=np.int64)
    arm_n = np.zeros(arms_total, dtype=np.float64)
    arm_r = np.zeros(arms_total, dtype=np.float64)
    pos = 0
    for i, trial in enumerate(network.trials):
        arm_off[i] = pos
        for k, treatment in enumerate(trial.arms):
            arm_t[pos] = treatment
            arm_n[pos] = trial.participants[k]
            arm_r[pos] = dataset.events[i][k]
            pos += 1
    arm_off[m_trials] = pos

    # trials touching each treatment, CSR-style
    touched = [[] for _ in range(network.n_treatments)]
    for i, trial in enumerate(network.trials):
        for treatment in trial.arms:
            touched[treatment].append(i)
    tr_of_off = np.zeros(network.n_treatments + 1, dtype=np.int64)
    for a in range(network.n_treatments):
        tr_of_off[a + 1] = tr_of_off[a] + len(touched[a])
    tr_of = np.array([i for lst in touched for i in lst] or [0], dtype=np.int64)
    return arm_off, arm_t, arm_n, arm_r, tr_of_off, tr_of


def run_chain(network: EvidenceNetwork, dataset: Dataset,
              config: ChainConfig | None = None) -> PosteriorSamples:
    """Run one sampler chain on a dataset; deterministic given config.seed."""
    config = config or ChainConfig()
    require(dataset.network == network, "dataset was generated for a different network")
    arm_off, arm_t, arm_n, arm_r, tr_of_off, tr_of = _pack(network, dataset)

    b = np.array([empirical_log_odds(dataset.events[i][0], trial.participants[0])
                  for i, trial in enumerate(network.trials)], dtype=np.float64)
    delta = np.zeros(arm_t.shape[0], dtype=np.float64)
    dfull = np.zeros(network.n_treatments, dtype=np.float64)
    tau0 = 0.5

    gen = RandomSource(config.seed).generator
    d_samples, tau_samples, acc_b, acc_delta, acc_d, acc_tau, _ = run_sweeps(
        arm_off, arm_t, arm_n, arm_r, tr_of_off, tr_of,
        b, delta, dfull, tau0,
        config.burn_in, config.iterations_after_burn_in, config.thin,
        config.target_acceptance, gen)

    denom = config.iterations_after_burn_in
    rate_b = acc_b / denom
    rate_d = acc_d[1:] / denom
    rate_tau = acc_tau / denom
    rate_delta = []
    for i in range(len(network.trials)):
        for j in range(arm_off[i] + 1, arm_off[i + 1]):
            rate_delta.append((i, int(arm_t[j]), acc_delta[j] / denom))

    acceptance = {
        "b": rate_b,
        "delta": np.array([r for _, _, r in rate_delta]),
        "d": rate_d,
        "tau": rate_tau,
    }

    # Health check on the per-block acceptance rates: a block drifting out
    # of [0.05, 0.95] means the frozen proposal scales no longer match the
    # region the chain is exploring, and the draws cannot be trusted.
    lo, hi = ACCEPTANCE_BOUNDS
    block_rates = {
        "trial baselines": float(np.mean(rate_b)),
        "relative effects": float(np.mean(acceptance["delta"]))
        if acceptance["delta"].size else 0.5,
        "basic contrasts": float(np.mean(rate_d)) if rate_d.size else 0.5,
        "heterogeneity tau": rate_tau,
    }
    problems = [f"{label}: {rate:.3f}" for label, rate in block_rates.items()
                if not lo <= rate <= hi]
    if problems:
        raise ChainError(
            "block acceptance rate outside [%.2f, %.2f] for: %s"
            % (lo, hi, "; ".join(problems)))

    return PosteriorSamples(d_samples=d_samples, tau_samples=tau_samples,
                            acceptance=acceptance)


def dump_samples(samples: PosteriorSamples, path, thin: int = DEFAULT_THIN) -> None:
    """Write retained draws to CSV: iter, d_T1T2..d_T1TN, tau."""
    n = samples.n_treatments
    header = "iter," + ",".join(
        f"d_T1{treatment_label(a)}" for a in range(1, n)) + ",tau"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for k in range(samples.n_draws):
            cells = [str((k + 1) * thin)]
            cells += ["%.17g" % v for v in samples.d_samples[k]]
            cells.append("%.17g" % samples.tau_samples[k])
            fh.write(",".join(cells) + "\n")


def ensure_compiled() -> None:
    """Force JIT compilation of the sweep kernel (e.g. before forking workers)."""
    net = EvidenceNetwork(2, (Trial((0, 1), (4, 4)),))
    data = Dataset(events=((2, 2),), network=net)
    cfg = ChainConfig(burn_in=2, iterations_after_burn_in=10, thin=1, seed=1)
    try:
        run_chain(net, data, cfg)
    except ChainError:
        pass  # health checks are meaningless on a 12-sweep chain


class NetworkMetaAnalysis(BaseEstimator):
    """Scikit-learn style front end for the posterior sampler.

    Parameters mirror ChainConfig; `fit` accepts a Dataset (which carries
    its network) and exposes the usual trailing-underscore attributes.
    """

    def __init__(self, burn_in=DEFAULT_BURN_IN,
                 iterations_after_burn_in=DEFAULT_ITERATIONS,
                 thin=DEFAULT_THIN, seed=0,
                 target_acceptance=TARGET_ACCEPTANCE):
        self.burn_in = burn_in
        self.iterations_after_burn_in = iterations_after_burn_in
        self.thin = thin
        self.seed = seed
        self.target_acceptance = target_acceptance

    def _config(self) -> ChainConfig:
        return ChainConfig(burn_in=self.burn_in,
                           iterations_after_burn_in=self.iterations_after_burn_in,
                           thin=self.thin, seed=self.seed,
                           target_acceptance=self.target_acceptance)

    def fit(self, X: Dataset, y=None):
        if not isinstance(X, Dataset):
            raise InputError("fit expects a Dataset")
        self.samples_ = run_chain(X.network, X, self._config())
        self.d_mean_ = self.samples_.d_mean()
        self.tau_mean_ = self.samples_.tau_mean()
        self.n_treatments_ = self.samples_.n_treatments
        return self

    def _check_fitted(self):
        if not hasattr(self, "samples_"):
            raise InputError("estimator is not fitted; call fit first")

    def contrast(self, alpha: int, beta: int) -> np.ndarray:
        self._check_fitted()
        return contrast_samples(self.samples_, alpha, beta)

    def rank_probabilities(self) -> ranks.RankProbabilityMatrix:
        self._check_fitted()
        return ranks.rank_probabilities(self.samples_)

    def sucra(self) -> ranks.SucraVector:
        self._check_fitted()
        return ranks.sucra(self.rank_probabilities())
