"""Distance-based bit counts and their total against the conventional allocation."""
from __future__ import annotations

from typing import Any, List, Mapping

from ..allocation import conventional_allocation, distance_based_allocation, distance_based_bits, tx_bit_total
from ..core import Report
from ..csit import allocation_size
from ..results import TextTable
from ..utils import db_to_linear

DESCRIPTION = "print distance-based bit counts per distance and the size ratio to the conventional allocation"

DEFAULTS = {
    "gammas": (0.5, 1.0),
    "snr_db": 20.0,
    "max_distance": 3,
    "users": 15,
    "ratio.gamma": 0.5,
    "ratio.snr_db": (20.0, 40.0, 60.0),
}


def bits_table(gammas, snr_db: float, max_distance: int) -> TextTable:
    P = db_to_linear(snr_db)
    rows = tuple(
        (gamma, distance, distance_based_bits(0, distance, gamma, P))
        for gamma in gammas
        for distance in range(max_distance + 1)
    )
    return TextTable(label=f"Distance-based bits at {snr_db:g} dB", header=("gamma", "distance", "bits"), rows=rows)


def ratio_table(K: int, gamma: float, snr_grid) -> TextTable:
    rows = []
    for snr_db in snr_grid:
        P = db_to_linear(snr_db)
        distance = distance_based_allocation(K, gamma, P)
        conventional = conventional_allocation(K, gamma, P)
        distance_bits = allocation_size(distance).bits
        conventional_bits = allocation_size(conventional).bits
        rows.append(
            (
                snr_db,
                distance_bits,
                conventional_bits,
                distance_bits / conventional_bits,
                max(tx_bit_total(distance, j) for j in range(K)),
            )
        )
    return TextTable(
        label=f"Total bits, K={K}, gamma={gamma:g}",
        header=("snr_db", "distance_bits", "conventional_bits", "ratio", "max_tx_bits"),
        rows=tuple(rows),
    )


def run(settings: Mapping[str, Any], workers: int = 1) -> List[Report]:
    return [
        bits_table(settings["gammas"], float(settings["snr_db"]), int(settings["max_distance"])),
        ratio_table(int(settings["users"]), float(settings["ratio.gamma"]), settings["ratio.snr_db"]),
    ]
