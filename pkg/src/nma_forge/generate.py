"""Synthetic dichotomous trial data from known model parameters.

Generation follows the contrast-based random-effects model on the log-odds
scale: each trial draws its relative effects (vs the trial baseline arm) from
a multivariate normal whose mean comes from the consistency relations and
whose covariance has tau^2 on the diagonal and tau^2/2 off it; the baseline
event probability p_1 comes from one of three data-generating models; event
counts are then binomial per arm.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import expit, logit

from .network import EvidenceNetwork, Trial
from .rng import RandomSource
from .validation import InputError, check_finite, require

#: Probabilities are clamped to this open interval as a numerical guard.
PROB_CLAMP = 1e-12
#: The uniform and Euclidean data-generating models exclude this margin at 0/1.
EDGE_MARGIN = 1e-6
#: Golden-section search tolerance for the Euclidean baseline model.
GOLDEN_TOL = 1e-8

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1/phi
_INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0  # 1/phi^2


class DgmKind(enum.Enum):
    """Rule assigning the trial-baseline event probability."""

    EUCLIDEAN = "euclidean"
    UNIFORM = "uniform"
    NORMAL = "normal"


@dataclass(frozen=True)
class ModelParams:
    """True basic contrasts d = (d_T1T2, ..., d_T1TN) and heterogeneity tau."""

    d: tuple[float, ...]
    tau: float

    def __post_init__(self):
        object.__setattr__(self, "d", tuple(float(x) for x in self.d))
        object.__setattr__(self, "tau", float(self.tau))
        check_finite(self.d, "d")
        require(math.isfinite(self.tau) and self.tau >= 0.0,
                f"tau must be finite and >= 0, got {self.tau!r}")

    @property
    def n_treatments(self) -> int:
        return len(self.d) + 1

    def d_full(self) -> np.ndarray:
        """Length-N vector (0, d_T1T2, ..., d_T1TN): entry a is d_T1(a+1)."""
        return np.concatenate(([0.0], np.asarray(self.d, dtype=float)))

    def true_contrast(self, alpha: int, beta: int) -> float:
        """d_{alpha beta} = d_T1beta - d_T1alpha by consistency."""
        full = self.d_full()
        return float(full[beta] - full[alpha])


@dataclass(frozen=True)
class TrialEffects:
    """Latent per-trial quantities behind one generated realisation."""

    baseline_b: float                 # log-odds of the event in arm 1
    deltas: tuple[float, ...]         # relative effects of arms 2..m
    probabilities: tuple[float, ...]  # event probability per arm, length m


@dataclass(frozen=True)
class Dataset:
    """Event counts of one synthetic realisation on its owning network."""

    events: tuple[tuple[int, ...], ...]
    network: EvidenceNetwork

    def __post_init__(self):
        events = tuple(tuple(int(r) for r in row) for row in self.events)
        object.__setattr__(self, "events", events)
        require(len(events) == self.network.n_trials,
                f"events rows ({len(events)}) must match trials ({self.network.n_trials})")
        for i, (row, trial) in enumerate(zip(events, self.network.trials)):
            require(len(row) == trial.n_arms,
                    f"trial {i}: {len(row)} event counts for {trial.n_arms} arms")
            for r, n in zip(row, trial.participants):
                require(0 <= r <= n, f"trial {i}: event count {r} outside [0, {n}]")


def relative_effect_covariance(m: int, tau: float) -> np.ndarray:
    """Covariance of the m-1 relative effects of an m-arm trial:
    tau^2 on the diagonal, tau^2/2 off it."""
    require(m >= 2, f"arm count must be >= 2, got {m}")
    dim = m - 1
    return tau**2 * (np.eye(dim) + np.ones((dim, dim))) / 2.0


def trial_mean_effects(trial: Trial, params: ModelParams) -> np.ndarray:
    """Mean relative effects (vs the trial baseline) from the consistency
    relations: entry for arm l is d_T1(t_l) - d_T1(t_1)."""
    require(max(trial.arms) < params.n_treatments,
            f"trial references treatment index {max(trial.arms)} but params "
            f"describe {params.n_treatments} treatments")
    full = params.d_full()
    return full[list(trial.arms[1:])] - full[trial.arms[0]]


def sample_relative_effects(trial: Trial, params: ModelParams,
                            rng: RandomSource) -> np.ndarray:
    """Draw the trial's relative effects from their multivariate normal,
    via the exact Cholesky factor of the structured covariance."""
    mean = trial_mean_effects(trial, params)
    if params.tau == 0.0:
        return mean.copy()
    cov = relative_effect_covariance(trial.n_arms, params.tau)
    chol = np.linalg.cholesky(cov)
    z = rng.generator.standard_normal(trial.n_arms - 1)
    return mean + chol @ z


def absolute_effect(p1: float, delta: float) -> float:
    """Event probability of an arm whose log-odds ratio vs the baseline is
    ``delta``: the unique p with logit(p) = logit(p1) + delta.

    Algebraically p = p1*e^delta / (1 + p1*(e^delta - 1)); evaluated through
    the logistic function for numerical stability at large |delta|.  The
    result is clamped away from 0/1 by a tiny guard.
    """
    if not (isinstance(p1, (int, float)) and 0.0 < p1 < 1.0):
        raise InputError(f"p1 must lie strictly in (0, 1), got {p1!r}")
    require(math.isfinite(delta), f"delta must be finite, got {delta!r}")
    p = float(expit(float(logit(p1)) + delta))
    return min(max(p, PROB_CLAMP), 1.0 - PROB_CLAMP)


def _golden_section_minimize(f, a: float, b: float, tol: float) -> float:
    """Golden-section search for the minimum of a unimodal f on [a, b]."""
    h = b - a
    n = int(math.ceil(math.log(tol / h) / math.log(_INV_PHI)))
    c = a + _INV_PHI2 * h
    d = a + _INV_PHI * h
    yc, yd = f(c), f(d)
    for _ in range(n):
        if yc < yd:
            b, d, yd = d, c, yc
            h *= _INV_PHI
            c = a + _INV_PHI2 * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h *= _INV_PHI
            d = a + _INV_PHI * h
            yd = f(d)
    return (a + b) / 2.0


def euclidean_baseline_objective(q: float, trial_deltas: Sequence[float]) -> float:
    """Sum of squared distances of all arm probabilities from 1/2 when the
    baseline probability is q (the quantity the Euclidean model minimizes)."""
    total = (q - 0.5) ** 2
    for delta in trial_deltas:
        total += (absolute_effect(q, delta) - 0.5) ** 2
    return total


def baseline_probability(trial_deltas: Sequence[float], kind: DgmKind,
                         rng: RandomSource) -> float:
    """Baseline event probability p_1 for one trial under the chosen model.

    Euclidean: deterministic argmin of `euclidean_baseline_objective` (keeps
    every arm as close to p=1/2 as possible), by golden-section search.
    Uniform: U(0, 1), redrawn while outside the [1e-6, 1-1e-6] margin.
    Normal: N(0.5, sd 0.2), truncated to (0, 1) by rejection.
    """
    trial_deltas = [float(x) for x in trial_deltas]
    check_finite(trial_deltas, "trial_deltas")
    if kind is DgmKind.EUCLIDEAN:
        return _golden_section_minimize(
            lambda q: euclidean_baseline_objective(q, trial_deltas),
            EDGE_MARGIN, 1.0 - EDGE_MARGIN, GOLDEN_TOL)
    if kind is DgmKind.UNIFORM:
        while True:
            p = rng.next_uniform()
            if EDGE_MARGIN <= p <= 1.0 - EDGE_MARGIN:
                return p
    if kind is DgmKind.NORMAL:
        while True:
            p = 0.5 + 0.2 * rng.next_gaussian()
            if 0.0 < p < 1.0:
                return p
    raise InputError(f"unknown data-generating model {kind!r}")


def _binomial_events(rng: RandomSource, participants: Sequence[int],
                     probabilities: Sequence[float]) -> tuple[int, ...]:
    """Independent binomial event counts, one arm at a time (fixed order)."""
    return tuple(rng.binomial(int(n), float(p))
                 for n, p in zip(participants, probabilities))


def generate_dataset(network: EvidenceNetwork, params: ModelParams,
                     kind: DgmKind, rng: RandomSource
                     ) -> tuple[Dataset, tuple[TrialEffects, ...]]:
    """One synthetic realisation of the whole network.

    Per trial, in network order: draw relative effects, choose the baseline
    probability per the data-generating model, map to all arm probabilities,
    and draw binomial event counts.  Returns the dataset plus the latent
    per-trial effects for diagnostics.
    """
    require(params.n_treatments == network.n_treatments,
            f"params describe {params.n_treatments} treatments but the network "
            f"has {network.n_treatments}")
    all_events = []
    all_effects = []
    for trial in network.trials:
        deltas = sample_relative_effects(trial, params, rng)
        p1 = baseline_probability(deltas, kind, rng)
        probs = [min(max(p1, PROB_CLAMP), 1.0 - PROB_CLAMP)]
        probs.extend(absolute_effect(p1, float(delta)) for delta in deltas)
        events = _binomial_events(rng, trial.participants, probs)
        all_events.append(events)
        all_effects.append(TrialEffects(
            baseline_b=float(logit(probs[0])),
            deltas=tuple(float(x) for x in deltas),
            probabilities=tuple(probs)))
    return (Dataset(events=tuple(all_events), network=network),
            tuple(all_effects))
