import itertools

import numpy as np
import pytest

from csit_sharing.allocation import tightly_feasible_allocation
from csit_sharing.channel import AntennaConfig, SubIc, Topology, as_config, gen_channel
from csit_sharing.csit import CsitAllocation, build_distributed_csit
from csit_sharing.errors import ConfigError, EnumerationLimitError, InsufficientCsitError
from csit_sharing.ia import (
    AlignmentPlan,
    ConstraintSystem,
    ia_solve,
    ia_solve_incomplete,
    is_proper,
    is_tightly_feasible,
    leakage,
    receive_filters,
)
from csit_sharing.utils import crandn, make_rng


def test_symmetric_network_is_proper_and_tight(symmetric3):
    assert is_proper(symmetric3)
    assert is_tightly_feasible(symmetric3)


def test_single_antenna_network_is_improper():
    config = AntennaConfig.homogeneous(3, 1)
    assert not is_proper(config)
    assert not is_tightly_feasible(config)


def test_two_user_network_has_surplus():
    config = AntennaConfig.homogeneous(2, 2)
    assert is_proper(config)
    assert not is_tightly_feasible(config)
    assert ConstraintSystem.from_config(config).surplus() == 2


def test_subic_properness(heterogeneous3):
    assert is_tightly_feasible(heterogeneous3, SubIc.of_users({0, 1}))
    assert is_proper(heterogeneous3, SubIc.of_users({1, 2}))
    assert not is_tightly_feasible(heterogeneous3, SubIc.of_users({1, 2}))


def test_properness_needs_every_subset():
    # six variables for six constraints overall, but the constraint at RX 1
    # from TX 2 only touches single-antenna nodes
    config = as_config((1, 1, 3), (1, 3, 3))
    system = ConstraintSystem.from_config(config)
    assert system.surplus() >= 0
    assert not is_proper(config)


def test_properness_is_invariant_under_relabeling(heterogeneous3):
    order = (2, 0, 1)
    relabeled = as_config(tuple(heterogeneous3.n_tx[k] for k in order), tuple(heterogeneous3.n_rx[k] for k in order))
    assert is_proper(relabeled) == is_proper(heterogeneous3)
    assert is_tightly_feasible(relabeled) == is_tightly_feasible(heterogeneous3)


def test_properness_enumeration_guard():
    with pytest.raises(EnumerationLimitError):
        is_proper(AntennaConfig.homogeneous(6, 3))


def test_solver_aligns_symmetric_network(symmetric3):
    converged = 0
    for seed in range(1, 6):
        H = gen_channel(symmetric3, Topology(), 100.0, seed)
        solution = ia_solve(H)
        if not solution.converged:
            continue
        converged += 1
        assert leakage(H, solution.precoders, solution.filters) < 1e-8
        for t in solution.precoders + solution.filters:
            assert np.linalg.norm(t[:, 0]) == pytest.approx(1.0, abs=1e-12)
    assert converged >= 4


def test_leakage_never_increases(symmetric3):
    solution = ia_solve(gen_channel(symmetric3, Topology(), 100.0, 2), seed=5)
    history = np.array(solution.history)
    assert np.all(np.diff(history) <= 1e-12 * history[:-1] + 1e-15)


def test_solver_flags_improper_network():
    config = AntennaConfig.homogeneous(3, 1)
    solution = ia_solve(gen_channel(config, Topology(), 100.0, 0), max_iter=300)
    assert not solution.converged
    assert solution.leakage > 1e-3


def test_single_user_has_no_leakage():
    config = AntennaConfig.homogeneous(1, 2)
    solution = ia_solve(gen_channel(config, Topology(), 100.0, 0))
    assert solution.leakage == 0
    assert solution.iterations == 0


def test_receiver_side_zero_forcing_removes_leakage():
    config = as_config((1, 1), (3, 3))
    H = gen_channel(config, Topology(), 100.0, 4)
    rng = make_rng(9)
    precoders = [crandn(rng, (1, 1)) / 1.0 for _ in range(2)]
    precoders = [p / np.abs(p) for p in precoders]
    assert leakage(H, precoders, receive_filters(H, precoders)) <= 1e-20


def test_random_filters_leak(symmetric3):
    H = gen_channel(symmetric3, Topology(), 100.0, 5)
    rng = make_rng(10)
    vectors = [crandn(rng, (2, 1)) for _ in range(6)]
    vectors = [v / np.linalg.norm(v) for v in vectors]
    assert leakage(H, vectors[:3], vectors[3:]) > 0


def test_leakage_checks_dimensions(symmetric3):
    H = gen_channel(symmetric3, Topology(), 100.0, 5)
    with pytest.raises(ConfigError):
        leakage(H, [np.ones((2, 1))], [np.ones((2, 1))])


def test_incomplete_solver_with_complete_csit_matches_full_solver(symmetric3):
    H = gen_channel(symmetric3, Topology(), 100.0, 6)
    alloc = CsitAllocation.complete(symmetric3)
    precoders = ia_solve_incomplete(build_distributed_csit(H, alloc), alloc)
    reference = ia_solve(H)
    for mine, theirs in zip(precoders, reference.precoders):
        np.testing.assert_allclose(mine, theirs, rtol=0, atol=1e-9)


def test_incomplete_solver_names_missing_block(heterogeneous3):
    H = gen_channel(heterogeneous3, Topology(), 100.0, 7)
    csit = build_distributed_csit(H, CsitAllocation.empty(3, heterogeneous3))
    with pytest.raises(InsufficientCsitError) as excinfo:
        ia_solve_incomplete(csit, tightly_feasible_allocation(heterogeneous3))
    assert excinfo.value.tx == 0
    assert "H[1,1]" in str(excinfo.value)


def test_incomplete_allocation_needs_plan(heterogeneous3):
    H = gen_channel(heterogeneous3, Topology(), 100.0, 7)
    alloc = CsitAllocation.empty(3, heterogeneous3)
    with pytest.raises(ConfigError):
        ia_solve_incomplete(build_distributed_csit(H, alloc), alloc)


def test_plan_orders_inner_subics_first():
    config = as_config((2, 1, 3), (2, 1, 3))
    plan = AlignmentPlan(
        system=ConstraintSystem.from_config(config),
        designs=(frozenset({0, 1}), frozenset({0, 1}), frozenset({0, 1, 2})),
    )
    assert plan.subic_order() == (frozenset({0, 1}), frozenset({0, 1, 2}))
    assert plan.required_blocks(1) == ((0, 0), (0, 1), (1, 0))


@pytest.mark.slow
def test_solver_aligns_most_symmetric_channels(symmetric3):
    aligned = sum(ia_solve(gen_channel(symmetric3, Topology(), 100.0, seed)).leakage < 1e-8 for seed in range(100))
    assert aligned >= 95


ANTENNAS = list(itertools.product((1, 2, 3), repeat=3))
PROPERNESS_GRID = list(itertools.product(ANTENNAS, ANTENNAS))


@pytest.mark.slow
@pytest.mark.parametrize("n_tx, n_rx", PROPERNESS_GRID)
def test_properness_agrees_with_solver(n_tx, n_rx):
    config = as_config(n_tx, n_rx)
    H = gen_channel(config, Topology(), 100.0, 0)
    reached = any(ia_solve(H, seed=seed).leakage < 1e-6 for seed in range(1, 6))
    assert reached == is_proper(config)
