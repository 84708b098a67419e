"""Plan future two-arm trials by their effect on degree irregularity.

Candidate additions are ranked purely by the geometry of the resulting
network — cheap to enumerate — and an optional second step simulates the
top candidates to estimate the actual quality gain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np

from .harness import ExperimentConfig, run_experiment
from .network import (DEFAULT_N_PER_ARM, EvidenceNetwork, Trial,
                      comparison_counts, geometry_summary, treatment_label)
from .validation import InputError, require

MAX_CANDIDATES = 10 ** 6

ALLOCATION_SINGLE = "single-comparison"
ALLOCATION_ANY = "any-split"


@dataclass(frozen=True, eq=False)
class PlanCandidate:
    """One feasible set of trial additions and its geometric effect."""

    additions: tuple            # new Trial objects
    allocation: tuple           # ((alpha, beta), count) per touched pair
    resulting_K: np.ndarray
    resulting_irregularity: float   # h2/k2 of the augmented network
    delta_irregularity: float

    def label(self) -> str:
        parts = []
        for (a, b), count in self.allocation:
            pair = f"{treatment_label(a)}-{treatment_label(b)}"
            parts.append(pair if count == 1 else f"{pair} x{count}")
        return " + ".join(parts)


@dataclass(frozen=True, eq=False)
class PlanEvaluationRow:
    name: str
    m_trials: int
    h2_over_k2: float
    sd_bar: float
    abs_dP_bar: float


def extend_network(network: EvidenceNetwork, additions) -> EvidenceNetwork:
    """The original network plus the given extra trials (possibly none)."""
    return EvidenceNetwork(network.n_treatments,
                           tuple(network.trials) + tuple(additions))


def _compositions(total: int, bins: int):
    """Weak compositions of `total` into `bins` parts (stars and bars)."""
    for bars in combinations(range(total + bins - 1), bins - 1):
        prev = -1
        parts = []
        for bar in bars:
            parts.append(bar - prev - 1)
            prev = bar
        parts.append(total + bins - 1 - prev - 1)
        yield tuple(parts)


def enumerate_plans(network: EvidenceNetwork, budget: int,
                    allocation: str = ALLOCATION_SINGLE,
                    n_per_arm: int = DEFAULT_N_PER_ARM) -> list:
    """Rank every feasible placement of `budget` new two-arm trials.

    single-comparison mode places all new trials on one treatment pair;
    any-split mode enumerates every way of splitting the budget over the
    pairs (guarded against combinatorial blow-up).  Candidates are sorted
    ascending by the irregularity of the augmented network; ties prefer
    plans touching fewer distinct comparisons, then lexicographic pairs.
    """
    require(budget >= 1, "budget must be >= 1")
    require(allocation in (ALLOCATION_SINGLE, ALLOCATION_ANY),
            f"allocation must be '{ALLOCATION_SINGLE}' or '{ALLOCATION_ANY}'")
    n = network.n_treatments
    pairs = list(combinations(range(n), 2))
    base = geometry_summary(network).normalised_irregularity

    if allocation == ALLOCATION_SINGLE:
        splits = []
        for i in range(len(pairs)):
            counts = [0] * len(pairs)
            counts[i] = budget
            splits.append(tuple(counts))
    else:
        total = math.comb(budget + len(pairs) - 1, len(pairs) - 1)
        if total > MAX_CANDIDATES:
            raise InputError(
                f"any-split enumeration would produce {total} candidates "
                f"(limit {MAX_CANDIDATES}); use allocation="
                f"'{ALLOCATION_SINGLE}' or a smaller budget")
        splits = _compositions(budget, len(pairs))

    candidates = []
    for counts in splits:
        additions = []
        alloc = []
        for pair, count in zip(pairs, counts):
            if count == 0:
                continue
            alloc.append((pair, count))
            additions += [Trial(pair, (n_per_arm, n_per_arm))] * count
        augmented = extend_network(network, additions)
        geo = geometry_summary(augmented)
        candidates.append(PlanCandidate(
            additions=tuple(additions),
            allocation=tuple(alloc),
            resulting_K=comparison_counts(augmented),
            resulting_irregularity=geo.normalised_irregularity,
            delta_irregularity=geo.normalised_irregularity - base,
        ))
    candidates.sort(key=lambda c: (c.resulting_irregularity,
                                   len(c.allocation),
                                   tuple(p for p, _ in c.allocation)))
    return candidates


def evaluate_plans(top_k, base_config: ExperimentConfig):
    """Simulate the original network plus each candidate, identical seeds.

    Returns (rows, records): rows are the comparison-table entries with the
    original network first; records maps row name -> ExperimentRecord.
    """
    top_k = list(top_k)
    require(len(top_k) >= 1, "need at least one candidate to evaluate")

    rows = []
    records = {}

    def run_one(name: str, network: EvidenceNetwork):
        config = replace(base_config, name=name, network=network)
        record = run_experiment(config)
        records[name] = record
        rows.append(PlanEvaluationRow(
            name=name,
            m_trials=len(network.trials),
            h2_over_k2=record.geometry.normalised_irregularity,
            sd_bar=record.aggregate.sd_bar,
            abs_dP_bar=record.aggregate.abs_dP_bar,
        ))

    run_one(base_config.name, base_config.network)
    for i, candidate in enumerate(top_k, start=1):
        run_one(f"{base_config.name}_plan_{i:02d}",
                extend_network(base_config.network, candidate.additions))
    return rows, records
