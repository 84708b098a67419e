"""Rank probabilities, cumulative ranks, and SUCRA scores.

Treatments are ranked per posterior draw by the length-N effect vector
(0, d_T1T2, ..., d_T1TN), ascending: the smallest effect is best (rank 1).
Exact ties share the tied ranks' probability mass equally, so every
per-draw rank indicator — and therefore the averaged matrix — stays
doubly stochastic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import require

STOCHASTIC_TOL = 1e-12


@dataclass(frozen=True)
class RankProbabilityMatrix:
    """P[a, r-1] = probability that treatment a is ranked r-th."""

    P: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        require(P.ndim == 2 and P.shape[0] == P.shape[1],
                "rank matrix must be square")
        require(bool(np.all(P >= -1e-15)) and bool(np.all(P <= 1 + 1e-15)),
                "rank probabilities must lie in [0, 1]")
        require(bool(np.all(np.abs(P.sum(axis=1) - 1) <= STOCHASTIC_TOL)),
                "rank matrix rows must sum to 1")
        require(bool(np.all(np.abs(P.sum(axis=0) - 1) <= STOCHASTIC_TOL)),
                "rank matrix columns must sum to 1")
        object.__setattr__(self, "P", P)

    @property
    def n_treatments(self) -> int:
        return self.P.shape[0]


@dataclass(frozen=True)
class SucraVector:
    """SUCRA values plus the expected ranks they were computed from."""

    values: np.ndarray
    expected_ranks: np.ndarray


def rank_indicator(effects) -> np.ndarray:
    """Doubly stochastic N x N rank matrix for a single effect vector.

    Distinct values give a 0/1 permutation matrix; a group of g tied
    values spreads 1/g over each of the g ranks it spans.
    """
    values = np.asarray(effects, dtype=float)
    require(values.ndim == 1 and values.size >= 1, "effects must be a vector")
    n = values.size
    out = np.zeros((n, n))
    order = np.argsort(values, kind="stable")
    i = 0
    while i < n:
        j = i
        while j + 1 < n and values[order[j + 1]] == values[order[i]]:
            j += 1
        weight = 1.0 / (j - i + 1)
        for k in range(i, j + 1):
            out[order[k], i:j + 1] = weight
        i = j + 1
    return out


def rank_probabilities(samples) -> RankProbabilityMatrix:
    """Average per-draw rank indicators over all retained draws.

    Accepts anything exposing `d_samples` (S x (N-1) basic contrasts,
    reference treatment implicitly 0), e.g. PosteriorSamples.
    """
    d = np.asarray(getattr(samples, "d_samples", samples), dtype=float)
    require(d.ndim == 2 and d.shape[0] >= 1, "need at least one draw")
    s, n_minus_1 = d.shape
    n = n_minus_1 + 1
    full = np.hstack([np.zeros((s, 1)), d])

    sorted_rows = np.sort(full, axis=1)
    tied = np.any(np.diff(sorted_rows, axis=1) == 0.0, axis=1)

    counts = np.zeros((n, n))
    clean = full[~tied]
    if clean.shape[0]:
        order = np.argsort(clean, axis=1, kind="stable")
        ranks = np.empty_like(order)
        ranks[np.arange(clean.shape[0])[:, None], order] = np.arange(n)[None, :]
        for t in range(n):
            counts[t] += np.bincount(ranks[:, t], minlength=n)
    for row in full[tied]:
        counts += rank_indicator(row)
    return RankProbabilityMatrix(counts / s)


def cumulative_ranks(P: RankProbabilityMatrix) -> np.ndarray:
    """F[a, r-1] = probability that treatment a has rank r or better."""
    return np.cumsum(P.P, axis=1)


def sucra(P: RankProbabilityMatrix) -> SucraVector:
    """Surface under the cumulative ranking curve, one value per treatment.

    Computed two ways — the mean of the cumulative rank probabilities over
    the first N-1 ranks, and 1 minus the normalised expected-rank excess —
    which must agree; the latter is returned.
    """
    n = P.n_treatments
    expected = P.P @ np.arange(1.0, n + 1.0)
    if n == 1:
        return SucraVector(values=np.ones(1), expected_ranks=expected)
    from_rank = (n - expected) / (n - 1)
    from_surface = cumulative_ranks(P)[:, :n - 1].mean(axis=1)
    if np.max(np.abs(from_rank - from_surface)) > STOCHASTIC_TOL:
        raise RuntimeError("SUCRA computations disagree beyond tolerance")
    return SucraVector(values=from_rank, expected_ranks=expected)
