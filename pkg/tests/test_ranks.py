"""Ranking and SUCRA tests.

Core claims:
    - rank indicators are permutation matrices for distinct effects and
      split tied mass equally
    - rank_probabilities averages per-draw indicators and stays doubly
      stochastic, ties included
    - cumulative ranks are row-wise running sums ending at 1
    - the two SUCRA formulas (mean cumulative mass over the first N-1
      ranks vs normalised expected rank) agree to 1e-12 on arbitrary
      doubly stochastic matrices
    - certain-best means SUCRA 1, certain-worst means SUCRA 0
    - relabeling treatments permutes ranks and SUCRA consistently
"""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pytest import approx

from nma_forge.ranks import (
    RankProbabilityMatrix,
    SucraVector,
    cumulative_ranks,
    rank_indicator,
    rank_probabilities,
    sucra,
)
from nma_forge.validation import InputError


def random_doubly_stochastic(n: int, rng: np.random.Generator,
                             iterations: int = 200) -> np.ndarray:
    """Sinkhorn-balance a positive random matrix into near-double-stochasticity,
    then fix the residual by averaging with its transpose-normalised form."""
    M = rng.uniform(0.1, 1.0, size=(n, n))
    for _ in range(iterations):
        M /= M.sum(axis=1, keepdims=True)
        M /= M.sum(axis=0, keepdims=True)
    M /= M.sum(axis=1, keepdims=True)
    return M


# -- rank_indicator -----------------------------------------------------------

def test_rank_indicator_distinct_effects():
    # ascending effects: treatment order is already the rank order
    assert np.array_equal(rank_indicator([0.0, 0.5, 1.0, 1.4]), np.eye(4))
    # reversed: T1 is worst
    expected = np.fliplr(np.eye(3))
    assert np.array_equal(rank_indicator([2.0, 1.0, 0.0]), expected)


def test_rank_indicator_pair_tie():
    out = rank_indicator([1.0, 1.0, 2.0])
    assert out[0].tolist() == [0.5, 0.5, 0.0]
    assert out[1].tolist() == [0.5, 0.5, 0.0]
    assert out[2].tolist() == [0.0, 0.0, 1.0]


def test_rank_indicator_all_tied():
    out = rank_indicator([3.0, 3.0, 3.0])
    assert np.allclose(out, 1.0 / 3.0)


def test_rank_indicator_mixed_tie_groups():
    out = rank_indicator([0.0, 1.0, 1.0, 2.0])
    assert out[0].tolist() == [1.0, 0.0, 0.0, 0.0]
    assert out[1].tolist() == [0.0, 0.5, 0.5, 0.0]
    assert out[2].tolist() == [0.0, 0.5, 0.5, 0.0]
    assert out[3].tolist() == [0.0, 0.0, 0.0, 1.0]


def test_rank_indicator_shift_invariance():
    effects = np.array([0.3, -1.2, 0.3, 2.0])
    assert np.array_equal(rank_indicator(effects), rank_indicator(effects + 17.0))


def test_rank_indicator_rejects_non_vector():
    with pytest.raises(InputError):
        rank_indicator(np.zeros((2, 2)))


# -- rank_probabilities ---------------------------------------------------------

def test_rank_probabilities_two_treatments():
    # one draw each way: both treatments are best half the time
    d = np.array([[1.0], [-1.0]])
    P = rank_probabilities(d).P
    assert np.allclose(P, 0.5)


def test_rank_probabilities_hand_average():
    # three draws over N=3; implicit reference column of zeros
    d = np.array([
        [0.5, 1.0],    # order T1 < T2 < T3
        [-0.5, 1.0],   # order T2 < T1 < T3
        [0.0, 1.0],    # T1 and T2 tied, T3 last
    ])
    P = rank_probabilities(d).P
    expected = np.array([
        [1.0 + 0.0 + 0.5, 0.0 + 1.0 + 0.5, 0.0],
        [0.0 + 1.0 + 0.5, 1.0 + 0.0 + 0.5, 0.0],
        [0.0, 0.0, 3.0],
    ]) / 3.0
    assert np.allclose(P, expected, atol=1e-15)


def test_rank_probabilities_accepts_sample_objects():
    class Bag:
        d_samples = np.array([[0.2], [-0.2]])
    assert np.allclose(rank_probabilities(Bag()).P, 0.5)


def test_rank_probabilities_rejects_empty():
    with pytest.raises(InputError):
        rank_probabilities(np.empty((0, 2)))


def test_rank_probabilities_relabeling_equivariance():
    rng = np.random.default_rng(42)
    d = rng.normal(size=(500, 3))
    P = rank_probabilities(d).P
    # swap treatments 2 and 3 (columns 1 and 2 of d): their P rows swap
    swapped = d[:, [1, 0, 2]]
    P_swapped = rank_probabilities(swapped).P
    assert np.allclose(P_swapped[[0, 2, 1, 3]], P, atol=1e-15)


# -- matrix validation ------------------------------------------------------------

def test_rank_matrix_validation():
    with pytest.raises(InputError):
        RankProbabilityMatrix(np.ones((2, 3)))
    with pytest.raises(InputError):
        RankProbabilityMatrix(np.array([[1.5, -0.5], [0.0, 1.0]]))
    rows_off = np.array([[0.6, 0.3], [0.4, 0.7]])
    with pytest.raises(InputError):
        RankProbabilityMatrix(rows_off)


# -- cumulative ranks and SUCRA -----------------------------------------------------

def test_cumulative_ranks_running_sum():
    P = RankProbabilityMatrix(np.array([
        [0.5, 0.3, 0.2],
        [0.25, 0.5, 0.25],
        [0.25, 0.2, 0.55],
    ]))
    F = cumulative_ranks(P)
    assert np.allclose(F, np.cumsum(P.P, axis=1))
    assert np.allclose(F[:, -1], 1.0)


def test_sucra_certain_rankings():
    out = sucra(RankProbabilityMatrix(np.eye(4)))
    assert out.values.tolist() == approx([1.0, 2.0 / 3.0, 1.0 / 3.0, 0.0])
    assert out.expected_ranks.tolist() == approx([1.0, 2.0, 3.0, 4.0])


def test_sucra_uniform_is_half():
    P = RankProbabilityMatrix(np.full((5, 5), 0.2))
    assert np.allclose(sucra(P).values, 0.5)


def test_sucra_is_a_sucra_vector():
    out = sucra(RankProbabilityMatrix(np.eye(2)))
    assert isinstance(out, SucraVector)
    assert out.values.tolist() == approx([1.0, 0.0])


@settings(max_examples=60, deadline=None)
@given(n=st.integers(min_value=2, max_value=7),
       seed=st.integers(min_value=0, max_value=2**31 - 1))
def test_sucra_formulas_agree_on_random_matrices(n, seed):
    rng = np.random.default_rng(seed)
    P = RankProbabilityMatrix(random_doubly_stochastic(n, rng))
    out = sucra(P)  # raises RuntimeError if the dual computations disagree
    expected = (n - P.P @ np.arange(1.0, n + 1.0)) / (n - 1.0)
    assert np.allclose(out.values, expected, atol=1e-12)
    assert np.all(out.values >= -1e-12) and np.all(out.values <= 1 + 1e-12)


def test_sucra_from_posterior_average_matches_direct_formula():
    rng = np.random.default_rng(3)
    d = rng.normal(scale=0.5, size=(2000, 3))
    P = rank_probabilities(d)
    out = sucra(P)
    n = 4
    assert np.allclose(out.values,
                       (n - out.expected_ranks) / (n - 1), atol=1e-15)
