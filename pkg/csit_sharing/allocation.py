"""CSIT allocation policies.

Feedback-driven policies (distance-based, conventional, uniform, clustered)
hand out bits per (row, TX) entry. The IA-driven policies hand out exact
channel blocks: every TX receives the CSI of the smallest tightly-feasible
sub-IC it belongs to, and super-feasible settings are first reduced to such
a structure by a greedy constraint-absorption search.
"""
from __future__ import annotations

import logging
import math
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .channel import AntennaConfig, SubIc
from .csit import CsitAllocation, Precision
from .errors import ConfigError, EnumerationLimitError, InfeasibleError
from .ia import AlignmentPlan, ConstraintSystem, system_is_proper, system_is_tight

logger = logging.getLogger(__name__)

MAX_SUBIC_USERS = 5

Key = Tuple[int, int]


def _check_power(gamma: float, P: float) -> None:
    if P <= 1.0:
        raise ConfigError(f"P must exceed 1, got {P}")
    if not 0.0 <= gamma <= 1.0:
        raise ConfigError(f"gamma must lie in [0, 1], got {gamma}")


def _bits(count: int) -> Precision:
    return Precision.of_bits(count) if count > 0 else Precision.none()


def _wyner_support(K: int, i: int) -> FrozenSet[int]:
    return frozenset(k for k in (i - 1, i, i + 1) if 0 <= k < K)


def distance_based_bits(i: int, j: int, gamma: float, P: float) -> int:
    """Bits TX ``j`` receives for row ``i``: decays with the distance ``|i - j|``.

    ``B = ceil(([1 + (gamma-1)|i-j|]^+ + 2 [gamma + (gamma-1)|i-j|]^+) log2 P)``
    """

    _check_power(gamma, P)
    distance = abs(i - j)
    exponent = max(1.0 + (gamma - 1.0) * distance, 0.0) + 2.0 * max(gamma + (gamma - 1.0) * distance, 0.0)
    # rounding keeps exact integers such as 3 * log2(2**k) from ceiling upwards
    return int(math.ceil(round(exponent * math.log2(P), 9)))


def tx_bit_total(alloc: CsitAllocation, j: int) -> int:
    """Feedback bits delivered to TX ``j``."""

    return alloc.tx_bits(j)


def _bit_allocation(
    K: int, bits: Dict[Key, int], tridiagonal: bool, restrict: Optional[Dict[Key, FrozenSet[int]]] = None
) -> CsitAllocation:
    entries = {key: _bits(count) for key, count in bits.items()}
    columns: Dict[Key, FrozenSet[int]] = {}
    for (i, j), precision in entries.items():
        if not precision.is_known:
            continue
        cols = restrict.get((i, j)) if restrict else None
        if tridiagonal:
            cols = _wyner_support(K, i) if cols is None else cols & _wyner_support(K, i)
        if cols is not None:
            columns[(i, j)] = cols
    return CsitAllocation(K=K, entries=entries, columns=columns, unit="bits")


def distance_based_allocation(K: int, gamma: float, P: float, tridiagonal: bool = True) -> CsitAllocation:
    """Every (row, TX) entry gets ``distance_based_bits``; rows cover the Wyner support only."""

    bits = {(i, j): distance_based_bits(i, j, gamma, P) for i in range(K) for j in range(K)}
    return _bit_allocation(K, bits, tridiagonal)


def conventional_allocation(K: int, gamma: float, P: float, tridiagonal: bool = True) -> CsitAllocation:
    """Best quality everywhere: the distance-0 bit count for every (row, TX) entry."""

    best = distance_based_bits(0, 0, gamma, P)
    return _bit_allocation(K, {(i, j): best for i in range(K) for j in range(K)}, tridiagonal)


def uniform_allocation(budget: int, K: int, tridiagonal: bool = False) -> CsitAllocation:
    """Share ``budget`` bits equally over all ``K**2`` entries, dropping the remainder."""

    if budget < 0:
        raise ConfigError(f"budget must be non-negative, got {budget}")
    per_entry = budget // (K * K)
    return _bit_allocation(K, {(i, j): per_entry for i in range(K) for j in range(K)}, tridiagonal)


def clusters(K: int, cluster_size: int) -> Tuple[FrozenSet[int], ...]:
    """Consecutive user clusters; the last one is truncated when ``cluster_size`` does not divide ``K``."""

    if cluster_size < 1:
        raise ConfigError(f"cluster_size must be at least 1, got {cluster_size}")
    return tuple(frozenset(range(start, min(start + cluster_size, K))) for start in range(0, K, cluster_size))


def clustered_allocation(budget: int, K: int, cluster_size: int, tridiagonal: bool = False) -> CsitAllocation:
    """Bits only inside consecutive clusters, equal per in-cluster entry."""

    if budget < 0:
        raise ConfigError(f"budget must be non-negative, got {budget}")
    groups = clusters(K, cluster_size)
    member_of = {k: group for group in groups for k in group}
    in_cluster = sum(len(group) ** 2 for group in groups)
    per_entry = budget // in_cluster
    bits = {(i, j): per_entry if member_of[i] is member_of[j] else 0 for i in range(K) for j in range(K)}
    restrict = {(i, j): member_of[i] for i in range(K) for j in range(K)}
    return _bit_allocation(K, bits, tridiagonal, restrict)


def _scalar_count(system: ConstraintSystem, blocks: Iterable[Key]) -> int:
    return sum(system.n_rx[i] * system.n_tx[k] for i, k in blocks)


def _user_blocks(users: FrozenSet[int]) -> List[Key]:
    return [(i, k) for i in sorted(users) for k in sorted(users)]


def _candidate_users(system: ConstraintSystem, j: int) -> List[FrozenSet[int]]:
    K = system.K
    if K > MAX_SUBIC_USERS:
        raise EnumerationLimitError(f"sub-IC search is limited to K <= {MAX_SUBIC_USERS}, got K={K}")
    others = [k for k in range(K) if k != j]
    found = []
    for size in range(1, K):
        for extra in combinations(others, size):
            users = frozenset((j,) + extra)
            if system.within(users, users) and system_is_tight(system, users):
                found.append(users)
    return sorted(found, key=lambda users: (_scalar_count(system, _user_blocks(users)), tuple(sorted(users))))


def _is_laminar(users: FrozenSet[int], chosen: Iterable[FrozenSet[int]]) -> bool:
    return all(not users & other or users <= other or other <= users for other in chosen)


def _laminar_designs(system: ConstraintSystem, participants: Sequence[int]) -> Tuple[FrozenSet[int], ...]:
    """Smallest tight user set per TX, kept nested or disjoint across TXs.

    Overlapping sets that are not nested would let two TXs design the same
    precoder inside different sub-ICs, so a TX whose smallest set crosses an
    earlier choice takes the next candidate instead.
    """

    everyone = frozenset(range(system.K))
    designs: List[FrozenSet[int]] = [frozenset()] * system.K
    chosen: List[FrozenSet[int]] = []
    for j in participants:
        pick = everyone
        for users in _candidate_users(system, j):
            if _is_laminar(users, chosen):
                pick = users
                break
        designs[j] = pick
        chosen.append(pick)
    return tuple(designs)


def smallest_tf_subic(config: AntennaConfig, j: int) -> SubIc:
    """Smallest tightly-feasible sub-IC containing TX ``j``, by implied scalar count.

    Candidates are user subsets with at least two users; ties are broken by
    the lexicographic order of the sorted index set. Without a candidate the
    full network is returned.
    """

    if not 0 <= j < config.K:
        raise ConfigError(f"TX index {j + 1} is outside 1..{config.K}")
    if config.K == 1:
        return SubIc.of_users({0})
    candidates = _candidate_users(ConstraintSystem.from_config(config), j)
    return SubIc.of_users(candidates[0] if candidates else range(config.K))


def tightly_feasible_allocation(config: AntennaConfig) -> CsitAllocation:
    """Exact CSI of each TX's smallest tightly-feasible sub-IC, nothing else."""

    system = ConstraintSystem.from_config(config)
    if config.K > 1 and not system_is_tight(system):
        raise InfeasibleError(f"setting n_tx={config.n_tx} n_rx={config.n_rx} d={config.d} is not tightly feasible")
    if config.K == 1:
        designs: Tuple[FrozenSet[int], ...] = (frozenset({0}),)
    else:
        designs = _laminar_designs(system, range(config.K))
    plan = AlignmentPlan(system=system, designs=designs)
    blocks = {j: _user_blocks(users) for j, users in enumerate(designs)}
    return _exact_allocation(config.K, blocks, system, plan)


def _exact_allocation(
    K: int, blocks: Dict[int, Iterable[Key]], system: ConstraintSystem, plan: AlignmentPlan
) -> CsitAllocation:
    rows: Dict[Key, set] = {}
    for j, pairs in blocks.items():
        for i, k in pairs:
            rows.setdefault((i, j), set()).add(k)
    entries = {(i, j): Precision.exact() if (i, j) in rows else Precision.none() for i in range(K) for j in range(K)}
    columns = {key: frozenset(cols) for key, cols in rows.items()}
    return CsitAllocation(
        K=K, entries=entries, columns=columns, n_rx=system.n_rx, n_tx=system.n_tx, unit="scalars", plan=plan
    )


def _uncovered(system: ConstraintSystem, designs: Sequence[FrozenSet[int]]) -> bool:
    """Whether some constraint involving a free precoder lies outside every design set."""

    for i, k in system.constraints:
        interferers = {tx for rx, tx in system.constraints if rx == i}
        if not any(system.is_free_tx(tx) for tx in interferers):
            continue
        if not any({i, k} <= users for users in designs):
            return True
    return False


def _plan_for(system: ConstraintSystem, absorbing: FrozenSet[int]) -> Tuple[AlignmentPlan, int]:
    participants = [j for j in range(system.K) if system.is_free_tx(j)]
    designs = _laminar_designs(system, participants)
    if _uncovered(system, designs):
        everyone = frozenset(range(system.K))
        maximal = [users for users in designs if users and not any(users < other for other in designs)]
        designs = tuple(everyone if users in maximal else users for users in designs)
    plan = AlignmentPlan(system=system, designs=designs, absorbing_rx=absorbing)
    size = sum(_scalar_count(system, plan.required_blocks(j)) for j in range(system.K))
    return plan, size


def _moves(system: ConstraintSystem, absorbing: FrozenSet[int]) -> Iterable[Tuple[str, ConstraintSystem, FrozenSet[int]]]:
    for i in range(system.K):
        incoming = [pair for pair in system.constraints if pair[0] == i]
        if incoming and system.n_rx[i] - system.d[i] >= sum(system.d[k] for _, k in incoming):
            n_rx = list(system.n_rx)
            n_rx[i] = system.d[i]
            reduced = system.replace(n_rx=tuple(n_rx), constraints=system.constraints - frozenset(incoming))
            yield f"RX {i + 1} absorbs its interference", reduced, absorbing | {i}
    for j in range(system.K):
        if system.n_tx[j] > system.d[j]:
            n_tx = list(system.n_tx)
            n_tx[j] -= 1
            yield f"TX {j + 1} drops an antenna dimension", system.replace(n_tx=tuple(n_tx)), absorbing
    for i in range(system.K):
        if system.n_rx[i] > system.d[i] and i not in absorbing:
            n_rx = list(system.n_rx)
            n_rx[i] -= 1
            yield f"RX {i + 1} drops an antenna dimension", system.replace(n_rx=tuple(n_rx)), absorbing


def superfeasible_heuristic_allocation(config: AntennaConfig) -> CsitAllocation:
    """Greedy reduction of a super-feasible setting to small tightly-feasible pieces.

    Each step either lets an RX zero-force all of its interference locally or
    gives up one TX/RX antenna dimension, keeping the constraint system
    proper, and keeps the step with the smallest resulting allocation. The
    search stops once no step keeps the size from growing. The returned
    allocation carries its :class:`AlignmentPlan`.
    """

    system = ConstraintSystem.from_config(config)
    if not system_is_proper(system):
        raise InfeasibleError(f"setting n_tx={config.n_tx} n_rx={config.n_rx} d={config.d} is not IA feasible")
    if system.surplus() == 0:
        return tightly_feasible_allocation(config)

    absorbing: FrozenSet[int] = frozenset()
    plan, size = _plan_for(system, absorbing)
    while size > 0:
        best = None
        for label, candidate, candidate_absorbing in _moves(system, absorbing):
            if not system_is_proper(candidate):
                continue
            candidate_plan, candidate_size = _plan_for(candidate, candidate_absorbing)
            if best is None or candidate_size < best[0]:
                best = (candidate_size, label, candidate, candidate_absorbing, candidate_plan)
        if best is None or best[0] > size:
            break
        size, label, system, absorbing, plan = best
        logger.debug("%s: allocation size %d", label, size)

    blocks = {j: plan.required_blocks(j) for j in range(config.K)}
    return _exact_allocation(config.K, blocks, system, plan)


__all__ = [
    "MAX_SUBIC_USERS",
    "clustered_allocation",
    "clusters",
    "conventional_allocation",
    "distance_based_allocation",
    "distance_based_bits",
    "smallest_tf_subic",
    "superfeasible_heuristic_allocation",
    "tightly_feasible_allocation",
    "tx_bit_total",
    "uniform_allocation",
]
