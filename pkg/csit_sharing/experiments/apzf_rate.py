"""Two-user network MIMO with CSI scaling: conventional distributed ZF against Active-Passive ZF."""
from __future__ import annotations

from typing import Any, List, Mapping

from ..channel import AntennaConfig
from ..core import DEFAULT_SEED, Report, Scenario, run_scenario
from ..csit import ScalingAllocation

DESCRIPTION = "conventional distributed ZF, active-passive ZF and perfect-CSIT ZF for two users"

# alpha.a<row><tx>: accuracy exponent of row <row> at TX <tx>
DEFAULTS = {
    "alpha.a11": 1.0,
    "alpha.a21": 0.0,
    "alpha.a12": 0.5,
    "alpha.a22": 0.7,
    "snr_db": (20.0, 30.0, 40.0, 50.0, 60.0),
    "draws": 500,
    "seed": DEFAULT_SEED,
}


def scaling(settings: Mapping[str, Any]) -> ScalingAllocation:
    return ScalingAllocation.two_user(
        a11=settings["alpha.a11"],
        a21=settings["alpha.a21"],
        a12=settings["alpha.a12"],
        a22=settings["alpha.a22"],
    )


def scenarios(settings: Mapping[str, Any]) -> List[Scenario]:
    config = AntennaConfig.homogeneous(2)
    common = dict(config=config, snr_grid=settings["snr_db"], draws=int(settings["draws"]), seed=int(settings["seed"]))
    alpha = scaling(settings)
    return [
        Scenario(policy="scaling", precoder="zf-distributed", scaling=alpha, label="conventional ZF", **common),
        Scenario(policy="scaling", precoder="apzf", scaling=alpha, label="active-passive ZF", **common),
        Scenario(policy="complete", precoder="zf-global", label="ZF with perfect CSIT", **common),
    ]


def run(settings: Mapping[str, Any], workers: int = 1) -> List[Report]:
    return [run_scenario(s, workers) for s in scenarios(settings)]
