"""Shared fixtures: small reference networks and parameter sets."""
from __future__ import annotations

import pytest

from nma_forge.generate import ModelParams
from nma_forge.network import EvidenceNetwork, Trial, network_from_k_vector


@pytest.fixture(scope="session")
def two_trial_network() -> EvidenceNetwork:
    """Three treatments, one 2-arm and one 3-arm trial."""
    return EvidenceNetwork(
        n_treatments=3,
        trials=(
            Trial((0, 1), (25, 25)),
            Trial((0, 1, 2), (30, 30, 30)),
        ),
    )


@pytest.fixture(scope="session")
def star_network() -> EvidenceNetwork:
    """Four treatments, all trials sharing T4: highly irregular geometry."""
    return network_from_k_vector((1, 5, 15, 0, 0, 0))


@pytest.fixture(scope="session")
def null_params() -> ModelParams:
    """All treatments truly equivalent, moderate heterogeneity."""
    return ModelParams(d=(0.0, 0.0, 0.0), tau=0.1)
