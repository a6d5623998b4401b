"""Experiment entry points, one per CLI sub-command."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Mapping

from ..core import Report
from . import apzf_rate, eq3_table, feasibility, ia_alloc, wyner_rate

ExperimentRunner = Callable[[Mapping[str, Any], int], List[Report]]


@dataclass(frozen=True)
class Experiment:
    """Runner plus the settings it accepts and their defaults."""

    run: ExperimentRunner
    defaults: Mapping[str, Any]
    description: str


EXPERIMENTS: Dict[str, Experiment] = {
    "feasibility": Experiment(feasibility.run, feasibility.DEFAULTS, feasibility.DESCRIPTION),
    "ia-alloc": Experiment(ia_alloc.run, ia_alloc.DEFAULTS, ia_alloc.DESCRIPTION),
    "wyner-rate": Experiment(wyner_rate.run, wyner_rate.DEFAULTS, wyner_rate.DESCRIPTION),
    "apzf-rate": Experiment(apzf_rate.run, apzf_rate.DEFAULTS, apzf_rate.DESCRIPTION),
    "eq3-table": Experiment(eq3_table.run, eq3_table.DEFAULTS, eq3_table.DESCRIPTION),
}

__all__ = ["EXPERIMENTS", "Experiment", "ExperimentRunner"]
