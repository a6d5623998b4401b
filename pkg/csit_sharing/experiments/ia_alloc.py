"""Mean size of the IA-driven CSIT allocation over random antenna distributions."""
from __future__ import annotations

from typing import Any, List, Mapping

from ..core import DEFAULT_SEED, Report, run_size_experiment

DESCRIPTION = "mean IA-driven allocation size versus the total number of antennas"

DEFAULTS = {
    "users": 3,
    "antennas.totals": (12, 13, 14, 15, 16),
    "draws": 1000,
    "seed": DEFAULT_SEED,
}


def run(settings: Mapping[str, Any], workers: int = 1) -> List[Report]:
    table = run_size_experiment(
        K=int(settings["users"]),
        totals=settings["antennas.totals"],
        draws=int(settings["draws"]),
        seed=int(settings["seed"]),
        workers=workers,
        label=f"IA-driven allocation, K={settings['users']}",
    )
    return [table]
