"""Seed-derivation tests.

Core claims:
    - splitmix64 matches the published reference values
    - derived per-replication seeds are unique over a large index range
    - derived seeds do not depend on anything but (master_seed, rep_index)
    - sub-stream seeds for data vs chain differ from each other and the parent
    - RandomSource is deterministic per seed and stable across instances
    - adjacent replication streams are statistically uncorrelated
"""
from __future__ import annotations

import numpy as np
import pytest

from nma_forge.rng import (
    STREAM_CHAIN,
    STREAM_DATA,
    RandomSource,
    derive_seed,
    splitmix64,
    substream_seed,
)


def test_splitmix64_reference_values():
    # Reference outputs of the standard splitmix64 stream seeded with 1234567:
    # the state advances by the golden gamma before each finalize, which is
    # exactly what repeated application of splitmix64(state) reproduces.
    assert splitmix64(1234567) == 6457827717110365317
    assert splitmix64(0) == 16294208416658607535
    # 2^64-1 wraps without Python-int overflow artifacts
    assert 0 <= splitmix64(2**64 - 1) < 2**64


def test_splitmix64_is_bijective_on_samples():
    values = [splitmix64(v) for v in range(10_000)]
    assert len(set(values)) == len(values)


def test_derived_seeds_unique_over_many_replications():
    master = 20260816
    seeds = {derive_seed(master, rep) for rep in range(1, 100_001)}
    assert len(seeds) == 100_000


def test_derived_seeds_differ_across_masters():
    assert derive_seed(1, 1) != derive_seed(2, 1)
    assert derive_seed(1, 1) != derive_seed(1, 2)


def test_rep_index_must_be_positive():
    with pytest.raises(ValueError):
        derive_seed(7, 0)


def test_substreams_are_distinct():
    parent = derive_seed(42, 3)
    data = substream_seed(parent, STREAM_DATA)
    chain = substream_seed(parent, STREAM_CHAIN)
    assert len({parent, data, chain}) == 3


def test_random_source_is_deterministic():
    a = RandomSource(987654321)
    b = RandomSource(987654321)
    assert [a.next_uniform() for _ in range(5)] == [b.next_uniform() for _ in range(5)]
    assert a.next_gaussian() == b.next_gaussian()
    assert a.binomial(50, 0.3) == b.binomial(50, 0.3)


def test_adjacent_replication_streams_uncorrelated():
    master = 555
    n = 100_000
    x = RandomSource(substream_seed(derive_seed(master, 1), STREAM_DATA))
    y = RandomSource(substream_seed(derive_seed(master, 2), STREAM_DATA))
    u = x.generator.random(n)
    v = y.generator.random(n)
    rho = np.corrcoef(u, v)[0, 1]
    assert abs(rho) < 0.01
