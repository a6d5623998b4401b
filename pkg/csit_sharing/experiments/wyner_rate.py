"""Sum rate of distributed ZF on the Wyner network under budget-matched feedback policies."""
from __future__ import annotations

from typing import Any, List, Mapping

from ..channel import AntennaConfig, Topology
from ..core import DEFAULT_SEED, Report, Scenario, run_scenario

DESCRIPTION = "distributed ZF sum rate on the 1-D Wyner network for several CSIT allocations"

DEFAULTS = {
    "users": 15,
    "topology.gamma": 0.5,
    "snr_db": (20.0, 30.0, 40.0),
    "draws": 200,
    "seed": DEFAULT_SEED,
    "cluster_size": 3,
    "budget_from": "distance-based",
    "policies": ("distance-based", "uniform", "clustered", "conventional"),
    "precoder": "zf-distributed",
    "quantizer": "surrogate",
}


def scenarios(settings: Mapping[str, Any]) -> List[Scenario]:
    config = AntennaConfig.homogeneous(int(settings["users"]))
    topology = Topology.wyner(float(settings["topology.gamma"]))
    return [
        Scenario(
            config=config,
            topology=topology,
            policy=policy,
            precoder=settings["precoder"],
            snr_grid=settings["snr_db"],
            draws=int(settings["draws"]),
            seed=int(settings["seed"]),
            quantizer=settings["quantizer"],
            cluster_size=int(settings["cluster_size"]),
            budget_from=settings["budget_from"],
            label=policy,
        )
        for policy in settings["policies"]
    ]


def run(settings: Mapping[str, Any], workers: int = 1) -> List[Report]:
    return [run_scenario(s, workers) for s in scenarios(settings)]
