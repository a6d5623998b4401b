"""Properness and tightness of a network and its user subsets, plus the IA-driven allocation."""
from __future__ import annotations

from itertools import combinations
from typing import Any, List, Mapping

from ..allocation import MAX_SUBIC_USERS, superfeasible_heuristic_allocation
from ..channel import AntennaConfig, SubIc
from ..config import antenna_config
from ..core import Report
from ..csit import CsitAllocation
from ..errors import InfeasibleError
from ..ia import ConstraintSystem, is_proper, is_tightly_feasible
from ..results import TextTable
from ..utils import one_based

DESCRIPTION = "print properness and tightness of a configuration and the CSIT each TX needs"

DEFAULTS = {
    "users": 3,
    "antennas.n_tx": (2,),
    "antennas.n_rx": (2,),
    "antennas.d": (1,),
}


def _users_text(users) -> str:
    return "{" + ",".join(str(k) for k in one_based(sorted(users))) + "}"


def feasibility_table(config: AntennaConfig) -> TextTable:
    system = ConstraintSystem.from_config(config)
    subsets = [tuple(range(config.K))]
    if 2 < config.K <= MAX_SUBIC_USERS:
        subsets += [users for size in range(2, config.K) for users in combinations(range(config.K), size)]
    rows = []
    for users in subsets:
        subic = SubIc.of_users(users)
        constraints = len(system.within(users, users))
        variables = sum(system.tx_vars(k) + system.rx_vars(k) for k in users)
        rows.append(
            (
                _users_text(users),
                constraints,
                variables,
                "yes" if is_proper(config, subic) else "no",
                "yes" if is_tightly_feasible(config, subic) else "no",
            )
        )
    return TextTable(label="Feasibility", header=("users", "constraints", "variables", "proper", "tight"), rows=tuple(rows))


def tx_scalars(alloc: CsitAllocation, j: int) -> int:
    return sum(alloc.n_rx[i] * sum(alloc.n_tx[k] for k in alloc.known_columns(i, j)) for i in range(alloc.K))


def allocation_table(alloc: CsitAllocation) -> TextTable:
    plan = alloc.plan
    rows = []
    for j in range(alloc.K):
        design = plan.designs[j] if plan is not None else frozenset(range(alloc.K))
        rows.append((j + 1, _users_text(design) if design else "-", tx_scalars(alloc, j)))
    return TextTable(label="IA-driven CSIT allocation", header=("tx", "sub_ic", "scalars"), rows=tuple(rows))


def entries_table(alloc: CsitAllocation) -> TextTable:
    rows = []
    for line in alloc.to_text().splitlines():
        if line and not line.startswith("#"):
            tx, row, precision, columns = line.split()
            rows.append((int(tx), int(row), precision, columns))
    return TextTable(label="Allocation entries", header=("tx", "row", "precision", "columns"), rows=tuple(rows))


def build_allocation(settings: Mapping[str, Any]) -> CsitAllocation:
    return superfeasible_heuristic_allocation(antenna_config(settings))


def run(settings: Mapping[str, Any], workers: int = 1) -> List[Report]:
    config = antenna_config(settings)
    reports: List[Report] = [feasibility_table(config)]
    if config.K <= MAX_SUBIC_USERS:
        try:
            alloc = superfeasible_heuristic_allocation(config)
        except InfeasibleError:
            return reports
        reports += [allocation_table(alloc), entries_table(alloc)]
    return reports
