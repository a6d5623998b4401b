"""Interference alignment: feasibility counting and precoder computation.

Feasibility is decided by properness counting over the interference
constraints ``g_i^H H_ij t_j = 0``. Precoders and receive filters are found
by alternating leakage minimization: receive filters take the least
dominant eigenvectors of the received interference covariance, precoders
the least leaking directions of the reverse network. Each half-step
minimizes the same total leakage, so the leakage never increases.

Incomplete CSIT is handled through an :class:`AlignmentPlan`: every TX
designs its precoder over a sub-IC using nothing but its own channel
estimate. Sub-ICs are processed innermost first with a canonical
initialization, so TXs sharing a sub-IC and its exact CSI compute
bit-identical inner precoders.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .channel import AntennaConfig, ChannelRealization, SubIc
from .csit import CsitAllocation, DistributedCsit
from .errors import ConfigError, EnumerationLimitError, InsufficientCsitError
from .utils import (
    SeedLike,
    canonical_columns,
    crandn,
    leading_right_singular_vectors,
    least_eigvecs,
    make_rng,
)

logger = logging.getLogger(__name__)

MAX_ENUMERATED_CONSTRAINTS = 20
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 5000
STALL_WINDOW = 200
STALL_RTOL = 1e-6

Pair = Tuple[int, int]
BlockMap = Mapping[Pair, np.ndarray]


@dataclass(frozen=True)
class ConstraintSystem:
    """Effective antenna counts plus the set of interference constraints ``(rx, tx)``.

    The full system of an :class:`AntennaConfig` holds every pair ``i != j``;
    reduced systems drop constraints absorbed at the receivers and may use
    fewer antenna dimensions than physically available.
    """

    n_tx: Tuple[int, ...]
    n_rx: Tuple[int, ...]
    d: Tuple[int, ...]
    constraints: FrozenSet[Pair]

    @classmethod
    def from_config(cls, config: AntennaConfig) -> "ConstraintSystem":
        pairs = frozenset((i, j) for i in range(config.K) for j in range(config.K) if i != j)
        return cls(n_tx=config.n_tx, n_rx=config.n_rx, d=config.d, constraints=pairs)

    @property
    def K(self) -> int:
        return len(self.d)

    def tx_vars(self, j: int) -> int:
        return self.d[j] * (self.n_tx[j] - self.d[j])

    def rx_vars(self, i: int) -> int:
        return self.d[i] * (self.n_rx[i] - self.d[i])

    def demand(self, pair: Pair) -> int:
        return self.d[pair[0]] * self.d[pair[1]]

    def within(self, tx_set: Iterable[int], rx_set: Iterable[int]) -> Tuple[Pair, ...]:
        txs, rxs = frozenset(tx_set), frozenset(rx_set)
        return tuple(sorted(pair for pair in self.constraints if pair[0] in rxs and pair[1] in txs))

    def restrict(self, users: Iterable[int]) -> "ConstraintSystem":
        users = frozenset(users)
        return ConstraintSystem(
            n_tx=self.n_tx, n_rx=self.n_rx, d=self.d, constraints=frozenset(self.within(users, users))
        )

    def surplus(self, users: Optional[Iterable[int]] = None) -> int:
        """Variables minus constraint demand over ``users`` (all users by default)."""

        users = frozenset(range(self.K) if users is None else users)
        variables = sum(self.tx_vars(k) + self.rx_vars(k) for k in users)
        return variables - sum(self.demand(pair) for pair in self.within(users, users))

    def is_fixed_tx(self, j: int) -> bool:
        return self.n_tx[j] == self.d[j]

    def is_free_tx(self, j: int) -> bool:
        """TX with free variables that interferes with at least one constrained RX."""

        return not self.is_fixed_tx(j) and any(pair[1] == j for pair in self.constraints)

    def replace(self, **changes) -> "ConstraintSystem":
        values = dict(n_tx=self.n_tx, n_rx=self.n_rx, d=self.d, constraints=self.constraints)
        values.update(changes)
        return ConstraintSystem(**values)


@lru_cache(maxsize=65536)
def _proper(system: ConstraintSystem, tx_set: FrozenSet[int], rx_set: FrozenSet[int]) -> bool:
    pairs = system.within(tx_set, rx_set)
    n = len(pairs)
    if n == 0:
        return True
    if n > MAX_ENUMERATED_CONSTRAINTS:
        raise EnumerationLimitError(
            f"{n} interference constraints exceed the enumeration guard of {MAX_ENUMERATED_CONSTRAINTS}"
        )
    subsets = np.arange(1 << n, dtype=np.int64)
    demand = np.zeros(subsets.size, dtype=np.int64)
    rx_masks: Dict[int, int] = {}
    tx_masks: Dict[int, int] = {}
    for index, (i, j) in enumerate(pairs):
        demand += ((subsets >> index) & 1) * system.demand((i, j))
        rx_masks[i] = rx_masks.get(i, 0) | (1 << index)
        tx_masks[j] = tx_masks.get(j, 0) | (1 << index)
    variables = np.zeros(subsets.size, dtype=np.int64)
    for i, mask in rx_masks.items():
        variables += ((subsets & mask) != 0) * system.rx_vars(i)
    for j, mask in tx_masks.items():
        variables += ((subsets & mask) != 0) * system.tx_vars(j)
    return bool(np.all(variables >= demand))


def system_is_proper(system: ConstraintSystem, users: Optional[Iterable[int]] = None) -> bool:
    users = frozenset(range(system.K) if users is None else users)
    return _proper(system, users, users)


def system_is_tight(system: ConstraintSystem, users: Optional[Iterable[int]] = None) -> bool:
    users = frozenset(range(system.K) if users is None else users)
    return system.surplus(users) == 0 and _proper(system, users, users)


def is_proper(config: AntennaConfig, subic: Optional[SubIc] = None) -> bool:
    """Properness of the sub-IC: every constraint subset has enough free variables.

    Exhaustive over all subsets of the sub-IC's interference constraints.
    For multi-stream users the count is a necessary condition only.
    """

    subic = subic or SubIc.full(config.K)
    subic.check_within(config)
    if any(d > 1 for d in config.d):
        logger.debug("properness with multi-stream users is a necessary condition only")
    return _proper(ConstraintSystem.from_config(config), subic.tx_set, subic.rx_set)


def is_tightly_feasible(config: AntennaConfig, subic: Optional[SubIc] = None) -> bool:
    """Proper, with exactly as many variables as constraints over the sub-IC."""

    subic = subic or SubIc.full(config.K)
    if not is_proper(config, subic):
        return False
    system = ConstraintSystem.from_config(config)
    variables = sum(system.tx_vars(j) for j in subic.tx_set) + sum(system.rx_vars(i) for i in subic.rx_set)
    demand = sum(system.demand(pair) for pair in system.within(subic.tx_set, subic.rx_set))
    return variables == demand


@dataclass(frozen=True)
class IaSolution:
    """Precoders ``t_j`` and receive filters ``g_i`` with orthonormal columns."""

    precoders: Tuple[np.ndarray, ...]
    filters: Tuple[np.ndarray, ...]
    leakage: float
    iterations: int = 0
    converged: bool = True
    history: Tuple[float, ...] = field(default=(), repr=False)


def leakage(H: ChannelRealization, precoders: Sequence[np.ndarray], filters: Sequence[np.ndarray]) -> float:
    """Total interference leakage ``sum_{i != j} ||g_i^H H_ij t_j||_F^2``."""

    K = H.K
    if len(precoders) != K or len(filters) != K:
        raise ConfigError(f"expected {K} precoders and filters, got {len(precoders)} and {len(filters)}")
    total = 0.0
    for i in range(K):
        for j in range(K):
            if i != j:
                total += float(np.linalg.norm(filters[i].conj().T @ H.block(i, j) @ precoders[j]) ** 2)
    return total


def receive_filters(H: ChannelRealization, precoders: Sequence[np.ndarray]) -> Tuple[np.ndarray, ...]:
    """Receive filters computed at every RX from the true channel and the applied precoders."""

    config = H.config
    filters = []
    for i in range(config.K):
        covariance = np.zeros((config.n_rx[i], config.n_rx[i]), dtype=complex)
        for k in range(config.K):
            if k != i:
                received = H.block(i, k) @ precoders[k]
                covariance += received @ received.conj().T
        filters.append(least_eigvecs(covariance, config.d[i]))
    return tuple(filters)


def network_leakage(H: ChannelRealization, precoders: Sequence[np.ndarray]) -> float:
    """Leakage on the true channel once every RX has recomputed its filter."""

    return leakage(H, precoders, receive_filters(H, precoders))


class MinLeakageSolver:
    """Alternating leakage minimization over a :class:`ConstraintSystem`.

    ``blocks`` maps each constrained pair ``(i, k)`` to the effective
    ``n_rx[i] x n_tx[k]`` channel block. Precoders listed in ``fixed`` and
    those of TXs without free variables are never updated.
    """

    def __init__(self, system: ConstraintSystem, blocks: BlockMap, fixed: Iterable[int] = ()) -> None:
        self.system = system
        self.blocks = blocks
        users = sorted({k for pair in system.constraints for k in pair})
        self.users = users
        self.fixed = frozenset(fixed) | {k for k in users if system.is_fixed_tx(k)}
        self._interferers: Dict[int, List[int]] = {i: [] for i in users}
        self._victims: Dict[int, List[int]] = {k: [] for k in users}
        self._pairs = sorted(system.constraints)
        for i, k in self._pairs:
            self._interferers[i].append(k)
            self._victims[k].append(i)
        self._precoders: Dict[int, np.ndarray] = {}
        self._filters: Dict[int, np.ndarray] = {}

    def _update_filters(self) -> None:
        system = self.system
        for i in self.users:
            if system.n_rx[i] == system.d[i]:
                self._filters[i] = canonical_columns(system.n_rx[i], system.d[i])
                continue
            covariance = np.zeros((system.n_rx[i], system.n_rx[i]), dtype=complex)
            for k in self._interferers[i]:
                received = self.blocks[(i, k)] @ self._precoders[k]
                covariance += received @ received.conj().T
            self._filters[i] = least_eigvecs(covariance, system.d[i])

    def _update_precoders(self) -> None:
        system = self.system
        for k in self.users:
            if k in self.fixed or not self._victims[k]:
                continue
            covariance = np.zeros((system.n_tx[k], system.n_tx[k]), dtype=complex)
            for i in self._victims[k]:
                reverse = self.blocks[(i, k)].conj().T @ self._filters[i]
                covariance += reverse @ reverse.conj().T
            self._precoders[k] = least_eigvecs(covariance, system.d[k])

    def cost(self) -> float:
        total = 0.0
        for i, k in self._pairs:
            total += float(np.linalg.norm(self._filters[i].conj().T @ self.blocks[(i, k)] @ self._precoders[k]) ** 2)
        return total

    def solve(self, initial: Mapping[int, np.ndarray], tol: float, max_iter: int) -> IaSolution:
        system = self.system
        self._precoders = dict(initial)
        for k in self.users:
            if k not in self._precoders:
                self._precoders[k] = canonical_columns(system.n_tx[k], system.d[k])
        self._update_filters()
        history = [self.cost()]
        iterations = 0
        while history[-1] >= tol and iterations < max_iter:
            self._update_precoders()
            self._update_filters()
            iterations += 1
            history.append(self.cost())
            if iterations >= STALL_WINDOW:
                reference = history[-STALL_WINDOW - 1]
                if reference - history[-1] <= STALL_RTOL * reference:
                    logger.debug("leakage stalled at %.3e after %d iterations", history[-1], iterations)
                    break
        converged = history[-1] < tol
        if not converged:
            logger.debug("alignment did not converge: leakage %.3e after %d iterations", history[-1], iterations)
        return IaSolution(
            precoders=tuple(self._precoders.get(k, canonical_columns(system.n_tx[k], system.d[k])) for k in range(system.K)),
            filters=tuple(self._filters.get(i, canonical_columns(system.n_rx[i], system.d[i])) for i in range(system.K)),
            leakage=history[-1],
            iterations=iterations,
            converged=converged,
            history=tuple(history),
        )


def canonical_precoder(system: ConstraintSystem, k: int, direct: Optional[np.ndarray]) -> np.ndarray:
    """Deterministic start: leading right singular vectors of the direct block.

    TXs that are not free use the first ``d`` antenna dimensions, which
    needs no channel knowledge at all.
    """

    if not system.is_free_tx(k) or direct is None:
        return canonical_columns(system.n_tx[k], system.d[k])
    return leading_right_singular_vectors(direct, system.d[k])


def ia_solve(
    H: ChannelRealization,
    config: Optional[AntennaConfig] = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: SeedLike = None,
) -> IaSolution:
    """Full-CSIT alignment over the whole network.

    ``seed=None`` selects the canonical initialization used by every TX in
    the incomplete-CSIT scheme; any other seed draws a random orthonormal
    start. ``converged`` is ``False`` when the leakage stays above ``tol``,
    which usually signals an infeasible setting.
    """

    config = config or H.config
    system = ConstraintSystem.from_config(config)
    blocks = {pair: H.block(*pair) for pair in system.constraints}
    if seed is None:
        initial = {k: canonical_precoder(system, k, H.block(k, k)) for k in range(config.K)}
    else:
        rng = make_rng(seed)
        initial = {}
        for k in range(config.K):
            q, _ = np.linalg.qr(crandn(rng, (config.n_tx[k], config.d[k])))
            initial[k] = q
    return MinLeakageSolver(system, blocks).solve(initial, tol, max_iter)


@dataclass(frozen=True)
class AlignmentPlan:
    """Constraint-responsibility split behind an IA-driven CSIT allocation.

    ``system`` is the (possibly reduced) constraint system the TXs align
    over; ``designs[j]`` is the user set of the sub-IC TX ``j`` designs its
    precoder in (empty when the precoder is fixed and needs no CSIT);
    ``absorbing_rx`` lists the RXs that zero-force all their interference
    locally.
    """

    system: ConstraintSystem
    designs: Tuple[FrozenSet[int], ...]
    absorbing_rx: FrozenSet[int] = frozenset()

    @classmethod
    def complete(cls, config: AntennaConfig) -> "AlignmentPlan":
        everyone = frozenset(range(config.K))
        return cls(system=ConstraintSystem.from_config(config), designs=(everyone,) * config.K)

    def subic_order(self) -> Tuple[FrozenSet[int], ...]:
        """Distinct design sub-ICs, inner ones first, ties in lexicographic order."""

        distinct = {users for users in self.designs if users}
        return tuple(sorted(distinct, key=lambda users: (len(users), tuple(sorted(users)))))

    def required_blocks(self, j: int) -> Tuple[Pair, ...]:
        """Blocks TX ``j`` reads: constrained pairs inside its sub-IC and direct blocks of free TXs."""

        users = self.designs[j]
        if not users:
            return ()
        needed = set(self.system.within(users, users))
        needed.update((k, k) for k in users if self.system.is_free_tx(k))
        return tuple(sorted(needed))


def ia_solve_incomplete(
    csit: DistributedCsit,
    alloc: CsitAllocation,
    config: Optional[AntennaConfig] = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> Tuple[np.ndarray, ...]:
    """Every TX computes its own precoder from its own estimate only.

    Returns the per-TX ``n_tx[j] x d[j]`` precoders. Raises
    :class:`InsufficientCsitError` when a TX needs a block its allocation
    does not cover.
    """

    config = config or csit.config
    plan = alloc.plan
    if plan is None:
        if not alloc.is_complete():
            raise ConfigError("an incomplete allocation must carry the alignment plan it was built with")
        plan = AlignmentPlan.complete(config)
    return tuple(_design_at_tx(csit, plan, config, j, tol, max_iter) for j in range(config.K))


def _design_at_tx(
    csit: DistributedCsit, plan: AlignmentPlan, config: AntennaConfig, j: int, tol: float, max_iter: int
) -> np.ndarray:
    system = plan.system
    own_users = plan.designs[j]
    if not own_users:
        return _embed(canonical_columns(system.n_tx[j], system.d[j]), config.n_tx[j])

    for i, k in plan.required_blocks(j):
        if not csit.block_known(j, i, k, rows=system.n_rx[i], cols=system.n_tx[k]):
            raise InsufficientCsitError(j, (i, k))
    block_of = _block_reader(csit, system, j)

    results: Dict[FrozenSet[int], Dict[int, np.ndarray]] = {}
    for users in plan.subic_order():
        if not users <= own_users:
            continue
        fixed: Dict[int, np.ndarray] = {}
        for inner, precoders in results.items():
            if inner < users:
                for k, precoder in precoders.items():
                    fixed.setdefault(k, precoder)
        sub = system.restrict(users)
        blocks = {pair: block_of(*pair) for pair in sub.constraints}
        initial = {
            k: fixed[k] if k in fixed else canonical_precoder(system, k, block_of(k, k) if system.is_free_tx(k) else None)
            for k in sorted(users)
        }
        solution = MinLeakageSolver(sub, blocks, fixed=fixed).solve(initial, tol, max_iter)
        results[users] = {k: fixed.get(k, solution.precoders[k]) for k in users}
        if users == own_users:
            break
    return _embed(results[own_users][j], config.n_tx[j])


def _block_reader(csit: DistributedCsit, system: ConstraintSystem, j: int) -> Callable[[int, int], np.ndarray]:
    def read(i: int, k: int) -> np.ndarray:
        return csit.block(j, i, k)[: system.n_rx[i], : system.n_tx[k]]

    return read


def _embed(precoder: np.ndarray, n_tx: int) -> np.ndarray:
    full = np.zeros((n_tx, precoder.shape[1]), dtype=complex)
    full[: precoder.shape[0]] = precoder
    return full


__all__ = [
    "AlignmentPlan",
    "ConstraintSystem",
    "DEFAULT_MAX_ITER",
    "DEFAULT_TOL",
    "IaSolution",
    "MAX_ENUMERATED_CONSTRAINTS",
    "MinLeakageSolver",
    "canonical_precoder",
    "ia_solve",
    "ia_solve_incomplete",
    "is_proper",
    "is_tightly_feasible",
    "leakage",
    "network_leakage",
    "receive_filters",
    "system_is_proper",
    "system_is_tight",
]
