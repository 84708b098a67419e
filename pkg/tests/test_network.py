"""Network construction and geometry-statistics tests.

Core claims:
    - comparison counts match a brute-force pair count, multi-arm included
    - an m-arm trial adds m-1 to each member's degree
    - degree irregularity values are frozen for the reference networks
    - h^2 = 0 exactly on degree-regular networks
    - the K-vector round-trips through network_from_k_vector
    - validation rejects malformed trials and disconnected networks
    - the JSON file format round-trips and rejects unknown keys
"""
from __future__ import annotations

import itertools
import json

import numpy as np
import pytest
from pytest import approx

from nma_forge.network import (
    DEFAULT_N_PER_ARM,
    EvidenceNetwork,
    Trial,
    comparison_counts,
    geometry_summary,
    k_vector,
    load_network,
    network_from_dict,
    network_from_k_vector,
    network_to_dict,
    treatment_label,
)
from nma_forge.validation import InputError

# Reference two-arm networks as studies-per-comparison vectors
# (T1T2, T1T3, T1T4, T2T3, T2T4, T3T4) and their frozen geometry.
REFERENCE_GEOMETRY = {
    (1, 5, 15, 0, 0, 0): 0.5691609977324263,   # star around T4
    (1, 0, 0, 19, 0, 1): 0.81859410430839,     # long chain, one heavy edge
    (1, 0, 0, 29, 0, 1): 0.8751300728407908,
    (1, 10, 0, 19, 0, 1): 0.4797086368366285,
    (1, 0, 10, 19, 0, 1): 0.08428720083246619,
    (1, 0, 0, 5, 0, 15): 0.5011337868480725,   # ladder
    (1, 1, 0, 1, 0, 3): 0.16666666666666666,   # tadpole
}


def brute_force_counts(network: EvidenceNetwork) -> np.ndarray:
    K = np.zeros((network.n_treatments, network.n_treatments), dtype=int)
    for trial in network.trials:
        for a in trial.arms:
            for b in trial.arms:
                if a < b:
                    K[a, b] += 1
                    K[b, a] += 1
    return K


def test_treatment_labels_are_one_based():
    assert treatment_label(0) == "T1"
    assert treatment_label(3) == "T4"


def test_comparison_counts_match_brute_force(star_network, two_trial_network):
    for network in (star_network, two_trial_network):
        assert np.array_equal(comparison_counts(network),
                              brute_force_counts(network))


def test_three_arm_trial_counts_every_pair():
    net = EvidenceNetwork(
        n_treatments=3, trials=(Trial((0, 1, 2), (10, 10, 10)),))
    K = comparison_counts(net)
    assert K[0, 1] == K[0, 2] == K[1, 2] == 1
    assert np.all(np.diag(K) == 0)
    # each treatment's degree is m - 1 = 2 for the single 3-arm trial
    assert geometry_summary(net).degrees.tolist() == [2.0, 2.0, 2.0]


@pytest.mark.parametrize("K, expected", sorted(REFERENCE_GEOMETRY.items()))
def test_reference_irregularity_values(K, expected):
    summary = geometry_summary(network_from_k_vector(K))
    assert summary.normalised_irregularity == approx(expected, abs=1e-12)


def test_star_geometry_details(star_network):
    summary = geometry_summary(star_network)
    assert summary.degrees.tolist() == [21.0, 1.0, 5.0, 15.0]
    assert summary.mean_degree == approx(10.5)
    assert summary.irregularity == approx(62.75)


def test_regular_network_has_zero_irregularity():
    summary = geometry_summary(network_from_k_vector((2, 2, 2, 2, 2, 2)))
    assert summary.irregularity == 0.0
    assert summary.normalised_irregularity == 0.0


def test_k_vector_round_trip():
    K = (1, 0, 10, 19, 0, 1)
    net = network_from_k_vector(K)
    assert k_vector(net) == K
    assert net.n_trials == sum(K)
    assert all(t.participants == (DEFAULT_N_PER_ARM,) * 2 for t in net.trials)


def test_k_vector_order_is_lexicographic():
    net = network_from_k_vector((1, 1, 0, 0, 0, 2))
    pairs = [t.arms for t in net.trials]
    assert pairs == [(0, 1), (0, 2), (2, 3), (2, 3)]


def test_trial_validation():
    with pytest.raises(InputError):
        Trial((0,), (25,))                    # one arm
    with pytest.raises(InputError):
        Trial((0, 0), (25, 25))               # duplicate treatment
    with pytest.raises(InputError):
        Trial((1, 0), (25, 25))               # not sorted
    with pytest.raises(InputError):
        Trial((0, 1), (25,))                  # size mismatch
    with pytest.raises(InputError):
        Trial((0, 1), (25, 0))                # empty arm


def test_network_validation():
    with pytest.raises(InputError, match="missing T3"):
        EvidenceNetwork(n_treatments=3, trials=(Trial((0, 1), (5, 5)),))
    with pytest.raises(InputError, match="connected"):
        EvidenceNetwork(
            n_treatments=4,
            trials=(Trial((0, 1), (5, 5)), Trial((2, 3), (5, 5))))
    with pytest.raises(InputError, match="references treatment"):
        EvidenceNetwork(n_treatments=2, trials=(Trial((0, 2), (5, 5)),))


def test_network_to_dict_round_trip(two_trial_network):
    obj = network_to_dict(two_trial_network, name="pair-and-triple")
    clone = network_from_dict(json.loads(json.dumps(obj)))
    assert clone == two_trial_network


def test_shorthand_k_form():
    net = network_from_dict({"K": [1, 5, 15, 0, 0, 0], "n_per_arm": 40})
    assert k_vector(net) == (1, 5, 15, 0, 0, 0)
    assert net.trials[0].participants == (40, 40)


def test_trials_may_omit_sizes():
    net = network_from_dict(
        {"n_treatments": 2, "trials": [{"arms": [0, 1]}], "n_per_arm": 12})
    assert net.trials[0].participants == (12, 12)


def test_unknown_keys_rejected():
    with pytest.raises(InputError, match="unknown network file keys"):
        network_from_dict({"K": [1, 0, 0, 0, 0, 1], "frobnicate": True})
    with pytest.raises(InputError, match="trial 0"):
        network_from_dict(
            {"n_treatments": 2, "trials": [{"arms": [0, 1], "labels": []}]})


def test_malformed_trial_reports_index():
    with pytest.raises(InputError, match="trial 1"):
        network_from_dict(
            {"n_treatments": 3,
             "trials": [{"arms": [0, 1]}, {"arms": [2, 2]}]})


def test_load_network_errors(tmp_path):
    missing = tmp_path / "nope.json"
    with pytest.raises(InputError, match="cannot read"):
        load_network(missing)
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InputError, match="not valid JSON"):
        load_network(bad)


def test_every_pair_order_matches_itertools():
    n = 5
    trials = tuple(Trial((a, b), (5, 5))
                   for a, b in itertools.combinations(range(n), 2))
    net = EvidenceNetwork(n_treatments=n, trials=trials)
    assert k_vector(net) == (1,) * (n * (n - 1) // 2)
