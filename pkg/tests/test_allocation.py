import numpy as np
import pytest

from csit_sharing.allocation import (
    clustered_allocation,
    clusters,
    conventional_allocation,
    distance_based_allocation,
    distance_based_bits,
    smallest_tf_subic,
    superfeasible_heuristic_allocation,
    tightly_feasible_allocation,
    tx_bit_total,
    uniform_allocation,
)
from csit_sharing.channel import AntennaConfig, SubIc, Topology, as_config, gen_channel
from csit_sharing.csit import CsitAllocation, Precision, allocation_size, build_distributed_csit
from csit_sharing.errors import ConfigError, EnumerationLimitError, InfeasibleError
from csit_sharing.ia import ia_solve_incomplete, network_leakage
from csit_sharing.utils import db_to_linear


@pytest.mark.parametrize("distance, expected", [(0, 14), (1, 4), (2, 0), (3, 0)])
def test_distance_based_bits_half_interference(distance, expected):
    assert distance_based_bits(0, distance, 0.5, 100.0) == expected


@pytest.mark.parametrize("distance", [0, 1, 2, 5])
def test_full_interference_gets_same_bits_everywhere(distance):
    assert distance_based_bits(distance, 0, 1.0, 100.0) == 20


def test_distance_based_bits_non_increasing_and_vanishing():
    for gamma in (0.0, 0.25, 0.5, 0.75):
        bits = [distance_based_bits(0, distance, gamma, 1e4) for distance in range(8)]
        assert all(b <= a for a, b in zip(bits, bits[1:]))
        cutoff = int(np.ceil(1.0 / (1.0 - gamma)))
        assert all(value == 0 for value in bits[cutoff:])


def test_distance_based_bits_rejects_low_power():
    with pytest.raises(ConfigError):
        distance_based_bits(0, 1, 0.5, 1.0)


def test_conventional_allocation_total():
    alloc = conventional_allocation(15, 0.5, 100.0)
    assert allocation_size(alloc).bits == 3150
    assert all(alloc.precision(i, j) == Precision.of_bits(14) for i in range(15) for j in range(15))


def test_conventional_single_user():
    alloc = conventional_allocation(1, 0.5, 100.0)
    assert alloc.precision(0, 0) == Precision.of_bits(14)


def test_distance_based_total_is_sum_of_entries():
    alloc = distance_based_allocation(15, 0.5, 100.0)
    expected = sum(distance_based_bits(i, j, 0.5, 100.0) for i in range(15) for j in range(15))
    assert allocation_size(alloc).bits == expected == 15 * 14 + 28 * 4


@pytest.mark.parametrize("snr_db", [20.0, 40.0, 60.0])
def test_distance_based_is_about_a_tenth_of_conventional(snr_db):
    P = db_to_linear(snr_db)
    ratio = allocation_size(distance_based_allocation(15, 0.5, P)).bits / allocation_size(
        conventional_allocation(15, 0.5, P)
    ).bits
    assert 0.08 <= ratio <= 0.12
    if snr_db == 60.0:
        assert abs(ratio - 44.0 / 450.0) < 0.005


def test_per_tx_bits_stop_growing_with_network_size():
    totals = [tx_bit_total(distance_based_allocation(K, 0.5, 1e4), K // 2) for K in (7, 9, 15, 31)]
    assert len(set(totals)) == 1


def test_wyner_rows_only_cover_the_support():
    alloc = distance_based_allocation(6, 0.5, 100.0)
    assert alloc.known_columns(3, 3) == (2, 3, 4)
    assert alloc.known_columns(0, 1) == (0, 1)
    assert alloc.known_columns(0, 4) == ()


def test_uniform_allocation():
    alloc = uniform_allocation(225, 15)
    assert all(alloc.precision(i, j) == Precision.of_bits(1) for i in range(15) for j in range(15))
    assert allocation_size(uniform_allocation(0, 15)).bits == 0
    assert not any(p.is_known for p in uniform_allocation(0, 15).entries.values())


def test_uniform_drops_remainder():
    assert allocation_size(uniform_allocation(449, 15)).bits == 225


def test_clusters_truncate_last_block():
    assert clusters(7, 3) == (frozenset({0, 1, 2}), frozenset({3, 4, 5}), frozenset({6}))
    assert sum(len(group) ** 2 for group in clusters(15, 3)) == 45


def test_clustered_allocation_only_inside_clusters():
    alloc = clustered_allocation(450, 15, 3)
    assert alloc.precision(4, 3) == Precision.of_bits(10)
    assert alloc.precision(3, 2) == Precision.none()
    assert alloc.known_columns(4, 3) == (3, 4, 5)
    assert allocation_size(alloc).bits == 450


def test_smallest_subic_of_symmetric_network_is_full(symmetric3):
    for j in range(3):
        assert smallest_tf_subic(symmetric3, j) == SubIc.full(3)


def test_smallest_subic_of_heterogeneous_network(heterogeneous3):
    assert smallest_tf_subic(heterogeneous3, 0) == SubIc.of_users({0, 1})
    assert smallest_tf_subic(heterogeneous3, 1) == SubIc.of_users({0, 1})
    assert smallest_tf_subic(heterogeneous3, 2) == SubIc.full(3)


def test_smallest_subic_single_user():
    assert smallest_tf_subic(AntennaConfig.homogeneous(1), 0) == SubIc.of_users({0})


def test_subic_search_limit():
    with pytest.raises(EnumerationLimitError):
        smallest_tf_subic(AntennaConfig.homogeneous(6, 3), 0)


def test_tight_allocation_of_symmetric_network_is_complete(symmetric3):
    alloc = tightly_feasible_allocation(symmetric3)
    assert alloc.is_complete()
    assert allocation_size(alloc).scalars == 108


def test_tight_allocation_of_heterogeneous_network(heterogeneous3):
    alloc = tightly_feasible_allocation(heterogeneous3)
    assert not alloc.is_complete()
    assert allocation_size(alloc).scalars == 54
    assert allocation_size(alloc).scalars < allocation_size(CsitAllocation.complete(heterogeneous3)).scalars
    for j in (0, 1):
        assert alloc.known_columns(2, j) == ()
        assert alloc.known_columns(0, j) == (0, 1)
    assert alloc.known_columns(2, 2) == (0, 1, 2)


def test_tight_allocation_single_user():
    alloc = tightly_feasible_allocation(AntennaConfig.homogeneous(1, 2))
    assert alloc.known_columns(0, 0) == (0,)


def test_tight_allocation_rejects_super_feasible():
    with pytest.raises(InfeasibleError):
        tightly_feasible_allocation(AntennaConfig.homogeneous(2, 2))


def test_heuristic_without_precoding_needs_no_csit():
    alloc = superfeasible_heuristic_allocation(as_config((1, 1), (3, 3)))
    assert allocation_size(alloc).scalars == 0
    assert not any(p.is_known for p in alloc.entries.values())


def test_heuristic_on_tight_input_matches_tight_allocation(symmetric3, heterogeneous3):
    for config in (symmetric3, heterogeneous3):
        heuristic = superfeasible_heuristic_allocation(config)
        tight = tightly_feasible_allocation(config)
        assert heuristic.entries == tight.entries
        assert heuristic.columns == tight.columns


def test_heuristic_rejects_improper_setting():
    with pytest.raises(InfeasibleError):
        superfeasible_heuristic_allocation(AntennaConfig.homogeneous(3, 1))


def test_heuristic_shrinks_allocation_with_extra_rx_antenna():
    config = as_config((2, 2, 2), (3, 2, 2))
    alloc = superfeasible_heuristic_allocation(config)
    assert allocation_size(alloc).scalars < 108
    assert alloc.plan is not None


def test_heuristic_allocation_still_aligns():
    config = as_config((2, 2, 2), (3, 2, 2))
    alloc = superfeasible_heuristic_allocation(config)
    aligned = 0
    for seed in range(10):
        H = gen_channel(config, Topology(), 100.0, seed)
        csit = build_distributed_csit(H, alloc, seed=seed)
        if network_leakage(H, ia_solve_incomplete(csit, alloc)) < 1e-6:
            aligned += 1
    assert aligned >= 8


def test_tight_allocation_aligns_on_true_channel(heterogeneous3):
    alloc = tightly_feasible_allocation(heterogeneous3)
    aligned = 0
    for seed in range(10):
        H = gen_channel(heterogeneous3, Topology(), 100.0, seed)
        csit = build_distributed_csit(H, alloc, seed=seed)
        if network_leakage(H, ia_solve_incomplete(csit, alloc)) < 1e-6:
            aligned += 1
    assert aligned >= 8


@pytest.mark.slow
def test_tight_allocation_aligns_for_most_channels(heterogeneous3):
    alloc = tightly_feasible_allocation(heterogeneous3)
    aligned = 0
    for seed in range(100):
        H = gen_channel(heterogeneous3, Topology(), 100.0, seed)
        csit = build_distributed_csit(H, alloc, seed=seed)
        if network_leakage(H, ia_solve_incomplete(csit, alloc)) < 1e-6:
            aligned += 1
    assert aligned >= 95


def test_relabeled_users_permute_allocation(heterogeneous3):
    alloc = tightly_feasible_allocation(heterogeneous3)
    order = (2, 0, 1)
    swapped = tightly_feasible_allocation(
        as_config(tuple(heterogeneous3.n_tx[k] for k in order), tuple(heterogeneous3.n_rx[k] for k in order))
    )
    new_index = {old: new for new, old in enumerate(order)}
    for (i, j), precision in alloc.entries.items():
        assert swapped.precision(new_index[i], new_index[j]) == precision
        assert sorted(new_index[k] for k in alloc.known_columns(i, j)) == list(
            swapped.known_columns(new_index[i], new_index[j])
        )
