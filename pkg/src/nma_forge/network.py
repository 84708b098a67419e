"""Treatment-trial networks and their degree-based geometry statistics.

A network is a set of N treatments and M trials; each trial compares m >= 2
distinct treatments (its arms) with a per-arm sample size.  The geometry
statistics summarize how evenly comparisons are distributed: the studies-per-
comparison matrix K, weighted node degrees k_alpha (an m-arm trial adds m-1
to each member's degree, i.e. K is incremented for every pair the trial
contains), their mean, and the degree irregularity h^2 = Var(k) together with
its dimensionless normalisation h^2 / mean(k)^2.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .validation import InputError, require

#: Lexicographic unordered pairs for N=4, the order used by K-vector shorthand:
#: (T1T2, T1T3, T1T4, T2T3, T2T4, T3T4) with 0-based treatment indices.
PAIRS_N4 = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))

DEFAULT_N_PER_ARM = 25


def treatment_label(index: int) -> str:
    """Human-facing name of a 0-based treatment index: 0 -> 'T1'."""
    return f"T{index + 1}"


@dataclass(frozen=True)
class Trial:
    """One trial: ordered arms (ascending treatment index) and per-arm sizes.

    The first arm is the trial-specific baseline.
    """

    arms: tuple[int, ...]
    participants: tuple[int, ...]

    def __post_init__(self):
        arms = tuple(int(a) for a in self.arms)
        n = tuple(int(x) for x in self.participants)
        object.__setattr__(self, "arms", arms)
        object.__setattr__(self, "participants", n)
        require(len(arms) >= 2, f"a trial needs at least two arms, got {arms}")
        require(len(set(arms)) == len(arms), f"trial arms must be distinct, got {arms}")
        require(arms == tuple(sorted(arms)),
                f"trial arms must be sorted ascending by treatment index, got {arms}")
        require(min(arms) >= 0, f"treatment indices must be >= 0, got {arms}")
        require(len(n) == len(arms),
                f"participants (len {len(n)}) must match arms (len {len(arms)})")
        require(all(x >= 1 for x in n), f"participants must all be >= 1, got {n}")

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    @property
    def baseline(self) -> int:
        return self.arms[0]


def _unchecked_trial(arms: Sequence[int], participants: Sequence[int]) -> Trial:
    """Construct a Trial bypassing validation (single-arm test hook)."""
    t = object.__new__(Trial)
    object.__setattr__(t, "arms", tuple(int(a) for a in arms))
    object.__setattr__(t, "participants", tuple(int(x) for x in participants))
    return t


@dataclass(frozen=True)
class EvidenceNetwork:
    """N treatments plus the list of trials comparing them.

    Construction enforces: valid treatment indices, every treatment used,
    and a connected comparison graph (meta-analysis is undefined otherwise).
    """

    n_treatments: int
    trials: tuple[Trial, ...]

    def __post_init__(self):
        object.__setattr__(self, "trials", tuple(self.trials))
        n = self.n_treatments
        require(n >= 2, f"need at least two treatments, got {n}")
        require(len(self.trials) >= 1, "need at least one trial")
        seen: set[int] = set()
        for idx, trial in enumerate(self.trials):
            require(isinstance(trial, Trial), f"trial {idx} is not a Trial")
            require(max(trial.arms) < n,
                    f"trial {idx} references treatment index {max(trial.arms)} "
                    f">= n_treatments {n}")
            seen.update(trial.arms)
        missing = sorted(set(range(n)) - seen)
        require(not missing,
                "every treatment must appear in at least one trial; missing "
                + ", ".join(treatment_label(i) for i in missing))
        require(self._connected(), "comparison graph must be connected")

    def _connected(self) -> bool:
        adjacency: dict[int, set[int]] = {i: set() for i in range(self.n_treatments)}
        for trial in self.trials:
            for a, b in itertools.combinations(trial.arms, 2):
                adjacency[a].add(b)
                adjacency[b].add(a)
        stack, visited = [0], {0}
        while stack:
            node = stack.pop()
            for nbr in adjacency[node]:
                if nbr not in visited:
                    visited.add(nbr)
                    stack.append(nbr)
        return len(visited) == self.n_treatments

    @property
    def n_trials(self) -> int:
        return len(self.trials)


def _unchecked_network(n_treatments: int, trials: Sequence[Trial]) -> EvidenceNetwork:
    """Construct an EvidenceNetwork bypassing validation (test hook)."""
    net = object.__new__(EvidenceNetwork)
    object.__setattr__(net, "n_treatments", int(n_treatments))
    object.__setattr__(net, "trials", tuple(trials))
    return net


@dataclass(frozen=True)
class GeometrySummary:
    """Comparison counts and degree statistics of one network."""

    K: np.ndarray                    # N x N symmetric, zero diagonal
    degrees: np.ndarray              # k_alpha, length N
    mean_degree: float               # k-hat
    irregularity: float              # h^2 = mean squared degree deviation
    normalised_irregularity: float   # h^2 / k-hat^2


def comparison_counts(network: EvidenceNetwork) -> np.ndarray:
    """Studies-per-comparison matrix K: K[a, b] = number of trials containing
    both a and b.  An m-arm trial increments all of its C(m, 2) pairs."""
    K = np.zeros((network.n_treatments, network.n_treatments), dtype=np.int64)
    for trial in network.trials:
        for a, b in itertools.combinations(trial.arms, 2):
            K[a, b] += 1
            K[b, a] += 1
    return K


def geometry_summary(network: EvidenceNetwork) -> GeometrySummary:
    """Degrees, mean degree, and (normalised) degree irregularity of a network."""
    K = comparison_counts(network)
    degrees = K.sum(axis=1).astype(float)
    mean_degree = float(degrees.mean())
    irregularity = float(np.mean((degrees - mean_degree) ** 2))
    return GeometrySummary(
        K=K,
        degrees=degrees,
        mean_degree=mean_degree,
        irregularity=irregularity,
        normalised_irregularity=irregularity / mean_degree**2,
    )


def k_vector(network: EvidenceNetwork) -> tuple[int, ...]:
    """The K matrix flattened in lexicographic pair order (upper triangle)."""
    K = comparison_counts(network)
    n = network.n_treatments
    return tuple(int(K[a, b]) for a, b in itertools.combinations(range(n), 2))


def network_from_k_vector(K: Sequence[int], n_per_arm: int = DEFAULT_N_PER_ARM,
                          n_treatments: int = 4) -> EvidenceNetwork:
    """Expand a studies-per-comparison vector into explicit two-arm trials.

    The vector lists unordered pairs lexicographically; for the default
    N=4 that is (T1T2, T1T3, T1T4, T2T3, T2T4, T3T4).
    """
    pairs = list(itertools.combinations(range(n_treatments), 2))
    require(len(K) == len(pairs),
            f"K must have {len(pairs)} entries for N={n_treatments}, got {len(K)}")
    require(all(int(k) >= 0 for k in K), f"K entries must be >= 0, got {tuple(K)}")
    trials = []
    for (a, b), count in zip(pairs, K):
        for _ in range(int(count)):
            trials.append(Trial((a, b), (n_per_arm, n_per_arm)))
    return EvidenceNetwork(n_treatments=n_treatments, trials=tuple(trials))


# ---------------------------------------------------------------------------
# JSON file format
# ---------------------------------------------------------------------------
#
# Full form:
#   {"n_treatments": 4,
#    "trials": [{"arms": [0, 2, 3], "n": [25, 25, 25]}, ...]}
# Trials may omit "n"; a file-level "n_per_arm" (else the loader default)
# fills it in.  Shorthand for N=4 two-arm-only networks:
#   {"K": [K12, K13, K14, K23, K24, K34], "n_per_arm": 25}

_ALLOWED_TOP_KEYS = {"name", "n_treatments", "trials", "K", "n_per_arm"}
_ALLOWED_TRIAL_KEYS = {"arms", "n"}


def network_from_dict(obj: dict, default_n_per_arm: int | None = None) -> EvidenceNetwork:
    """Parse the network-file dictionary (full or K-shorthand form)."""
    require(isinstance(obj, dict), f"network description must be an object, got {type(obj).__name__}")
    unknown = set(obj) - _ALLOWED_TOP_KEYS
    require(not unknown, f"unknown network file keys: {sorted(unknown)}")
    file_n = obj.get("n_per_arm")
    if file_n is not None:
        require(isinstance(file_n, int) and file_n >= 1,
                f"n_per_arm must be a positive integer, got {file_n!r}")
    fill_n = default_n_per_arm if default_n_per_arm is not None else file_n
    if fill_n is None:
        fill_n = DEFAULT_N_PER_ARM

    if "K" in obj:
        require("trials" not in obj and "n_treatments" not in obj,
                "shorthand 'K' form cannot be combined with explicit trials")
        K = obj["K"]
        require(isinstance(K, list) and len(K) == 6,
                f"shorthand K must be a list of 6 counts, got {K!r}")
        return network_from_k_vector(K, n_per_arm=fill_n)

    require("n_treatments" in obj and "trials" in obj,
            "network file needs 'n_treatments' and 'trials' (or shorthand 'K')")
    n = obj["n_treatments"]
    require(isinstance(n, int) and n >= 2, f"n_treatments must be an integer >= 2, got {n!r}")
    raw_trials = obj["trials"]
    require(isinstance(raw_trials, list) and raw_trials, "'trials' must be a non-empty list")
    trials = []
    for idx, raw in enumerate(raw_trials):
        require(isinstance(raw, dict), f"trial {idx}: expected an object, got {raw!r}")
        unknown = set(raw) - _ALLOWED_TRIAL_KEYS
        require(not unknown, f"trial {idx}: unknown keys {sorted(unknown)}")
        require("arms" in raw, f"trial {idx}: missing 'arms'")
        arms = raw["arms"]
        require(isinstance(arms, list) and all(isinstance(a, int) for a in arms),
                f"trial {idx}: 'arms' must be a list of integers, got {arms!r}")
        n_list = raw.get("n", [fill_n] * len(arms))
        require(isinstance(n_list, list) and all(isinstance(x, int) for x in n_list),
                f"trial {idx}: 'n' must be a list of integers, got {n_list!r}")
        require(len(n_list) == len(arms),
                f"trial {idx}: 'n' (len {len(n_list)}) must match 'arms' (len {len(arms)})")
        require(all(x >= 1 for x in n_list), f"trial {idx}: participants must be >= 1, got {n_list}")
        try:
            trials.append(Trial(tuple(arms), tuple(n_list)))
        except InputError as exc:
            raise InputError(f"trial {idx}: {exc}") from None
    return EvidenceNetwork(n_treatments=n, trials=tuple(trials))


def load_network(path: str | Path, default_n_per_arm: int | None = None) -> EvidenceNetwork:
    """Load a network description file (JSON)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read network file {path}: {exc}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc})") from None
    return network_from_dict(obj, default_n_per_arm=default_n_per_arm)


def network_to_dict(network: EvidenceNetwork, name: str | None = None) -> dict:
    """Serializable full-form description of a network."""
    obj: dict = {}
    if name is not None:
        obj["name"] = name
    obj["n_treatments"] = network.n_treatments
    obj["trials"] = [
        {"arms": list(t.arms), "n": list(t.participants)} for t in network.trials
    ]
    return obj
