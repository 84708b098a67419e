"""Posterior density pieces of the random-effects model on the log-odds scale.

The joint density over one dataset factorizes into binomial likelihoods per
arm, one multivariate-normal factor per trial linking its relative effects to
the basic contrasts through the consistency relations, vague normal priors on
trial baselines and basic contrasts, and a uniform prior on the heterogeneity
tau over (0, 5).  These functions are the reference implementation the chain
kernel is tested against; they favor clarity over speed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .generate import Dataset
from .validation import require

PRIOR_VARIANCE = 1.0e4   # variance of the N(0, .) priors on b_i and d entries
TAU_MAX = 5.0            # upper end of the uniform prior on tau
LN_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class LatentState:
    """All model parameters for one dataset: trial baselines b, per-trial
    relative effects delta, basic contrasts d, and heterogeneity tau.

    tau is meant to live strictly inside (0, 5); out-of-support values are
    representable so that the prior can report them as -inf.
    """

    b: tuple[float, ...]
    delta: tuple[tuple[float, ...], ...]   # per trial, length m_i - 1
    d: tuple[float, ...]                   # basic contrasts, length N - 1
    tau: float

    def __post_init__(self):
        object.__setattr__(self, "b", tuple(float(x) for x in self.b))
        object.__setattr__(self, "delta",
                           tuple(tuple(float(x) for x in row) for row in self.delta))
        object.__setattr__(self, "d", tuple(float(x) for x in self.d))
        object.__setattr__(self, "tau", float(self.tau))
        for name, values in (("b", self.b), ("d", self.d)):
            require(all(math.isfinite(v) for v in values),
                    f"{name} entries must be finite")
        require(all(math.isfinite(v) for row in self.delta for v in row),
                "delta entries must be finite")
        require(math.isfinite(self.tau), "tau must be finite")

    def d_full(self) -> np.ndarray:
        return np.concatenate(([0.0], np.asarray(self.d, dtype=float)))


def log_prior(state: LatentState) -> float:
    """Log prior: N(0, 1e4) on each b_i and d entry, U(0, 5) on tau.

    Returns -inf when tau is outside (0, 5).
    """
    if not (0.0 < state.tau < TAU_MAX):
        return -math.inf
    values = np.concatenate([np.asarray(state.b), np.asarray(state.d)])
    gaussians = float(np.sum(-0.5 * LN_2PI - 0.5 * math.log(PRIOR_VARIANCE)
                             - values**2 / (2.0 * PRIOR_VARIANCE)))
    return gaussians + math.log(1.0 / TAU_MAX)


def sigma_inverse(m: int, tau: float) -> np.ndarray:
    """Exact inverse of the (m-1)x(m-1) relative-effect covariance
    tau^2 (I + J)/2, namely (2/tau^2) (I - J/m)."""
    require(m >= 2, f"arm count must be >= 2, got {m}")
    require(tau > 0.0, f"tau must be > 0, got {tau!r}")
    dim = m - 1
    return (2.0 / tau**2) * (np.eye(dim) - np.ones((dim, dim)) / m)


def sigma_log_det(m: int, tau: float) -> float:
    """log det of the (m-1)x(m-1) covariance: (m-1) ln(tau^2/2) + ln m."""
    require(m >= 2, f"arm count must be >= 2, got {m}")
    require(tau > 0.0, f"tau must be > 0, got {tau!r}")
    return (m - 1) * math.log(tau**2 / 2.0) + math.log(m)


def _binomial_log_pmf(r: float, n: float, x: float) -> float:
    """log Binomial(r; n, expit(x)) via the numerically stable identity
    r*x - n*softplus(x) plus the combinatorial constant."""
    const = (math.lgamma(n + 1.0) - math.lgamma(r + 1.0)
             - math.lgamma(n - r + 1.0))
    return const + r * x - n * float(np.logaddexp(0.0, x))


def log_likelihood(dataset: Dataset, state: LatentState) -> float:
    """Log likelihood of one dataset under a latent state: binomial factors
    for every arm plus one multivariate-normal factor per multi-arm trial.

    Arm probabilities are p_1 = expit(b_i) and p_l = expit(b_i + delta_i(l));
    the normal factor's mean comes from the consistency relations and its
    covariance from `sigma_inverse`.  Trials with a single arm (diagnostic
    hook) contribute their binomial factor only.
    """
    network = dataset.network
    require(len(state.b) == network.n_trials, "state b length must match trials")
    d_full = state.d_full()
    total = 0.0
    for i, trial in enumerate(network.trials):
        b_i = state.b[i]
        deltas = np.asarray(state.delta[i], dtype=float)
        m = trial.n_arms
        require(len(deltas) == m - 1,
                f"trial {i}: delta length {len(deltas)} != m-1 = {m - 1}")
        xs = np.concatenate(([b_i], b_i + deltas))
        for r, n, x in zip(dataset.events[i], trial.participants, xs):
            total += _binomial_log_pmf(float(r), float(n), float(x))
        if m >= 2:
            mean = d_full[list(trial.arms[1:])] - d_full[trial.arms[0]]
            resid = deltas - mean
            quad = float(resid @ sigma_inverse(m, state.tau) @ resid)
            total += (-0.5 * (m - 1) * LN_2PI
                      - 0.5 * sigma_log_det(m, state.tau)
                      - 0.5 * quad)
    return total


def initial_state(dataset: Dataset) -> LatentState:
    """Data-informed start: b from continuity-corrected empirical logits of
    the baseline arms, delta and d at zero, tau at 0.5."""
    network = dataset.network
    b = []
    for events, trial in zip(dataset.events, network.trials):
        r, n = events[0], trial.participants[0]
        b.append(math.log((r + 0.5) / (n - r + 0.5)))
    delta = tuple(tuple(0.0 for _ in range(t.n_arms - 1)) for t in network.trials)
    d = tuple(0.0 for _ in range(network.n_treatments - 1))
    return LatentState(b=tuple(b), delta=delta, d=d, tau=0.5)


def empirical_log_odds(r: int, n: int) -> float:
    """Continuity-corrected log-odds ln((r+1/2)/(n-r+1/2))."""
    return math.log((r + 0.5) / (n - r + 0.5))
