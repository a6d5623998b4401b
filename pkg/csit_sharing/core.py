"""Core orchestration: Monte-Carlo scenarios, printing and export of results."""
from __future__ import annotations

import csv
import logging
import re
from dataclasses import dataclass, field
from multiprocessing import Pool
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .allocation import (
    clustered_allocation,
    conventional_allocation,
    distance_based_allocation,
    superfeasible_heuristic_allocation,
    tightly_feasible_allocation,
    uniform_allocation,
)
from .channel import WYNER_1D, AntennaConfig, ChannelRealization, Topology, gen_channel
from .csit import (
    QUANTIZER_KINDS,
    SURROGATE,
    CsitAllocation,
    DistributedCsit,
    ScalingAllocation,
    allocation_size,
    build_distributed_csit,
)
from .errors import ConfigError, InfeasibleError, InsufficientCsitError, NumericalError
from .ia import ia_solve_incomplete, receive_filters
from .metrics import NOISE_POWER, sum_dof_slope, user_rates
from .precoding import EffectivePrecoder, apzf, ia_precoder, zf_distributed, zf_global
from .results import CSV_HEADER, SIZE_CSV_HEADER, ResultRow, ResultTable, SizeRow, SizeTable, TextTable
from .utils import db_to_linear, make_rng

logger = logging.getLogger(__name__)

DEFAULT_SNR_GRID = (20.0, 30.0, 40.0)
DEFAULT_DRAWS = 100
DEFAULT_SEED = 2024
DEFAULT_CLUSTER_SIZE = 3
SUMMARY_WINDOW_DB = 20.0
FORMATS = ("csv", "svg", "xlsx")
SVG_HASHSALT = "csit-sharing"
ALL_FAILED = "all-draws-failed"

Allocation = Union[CsitAllocation, ScalingAllocation]
Report = Union[ResultTable, SizeTable, TextTable]
PolicyBuilder = Callable[["Scenario", float], Allocation]
PrecoderRule = Callable[
    [ChannelRealization, Optional[DistributedCsit], Allocation, float],
    Tuple[EffectivePrecoder, Optional[Tuple[np.ndarray, ...]]],
]


@dataclass(frozen=True)
class Scenario:
    """One rate-vs-SNR curve: network, CSIT policy, precoder and Monte-Carlo settings."""

    config: AntennaConfig
    topology: Topology = field(default_factory=Topology)
    policy: str = "complete"
    precoder: str = "zf-distributed"
    snr_grid: Tuple[float, ...] = DEFAULT_SNR_GRID
    draws: int = DEFAULT_DRAWS
    seed: int = DEFAULT_SEED
    quantizer: str = SURROGATE
    cluster_size: int = DEFAULT_CLUSTER_SIZE
    budget_from: str = "distance-based"
    scaling: Optional[ScalingAllocation] = None
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "snr_grid", tuple(float(v) for v in self.snr_grid))
        if not self.snr_grid:
            raise ConfigError("the SNR grid is empty")
        if any(b <= a for a, b in zip(self.snr_grid, self.snr_grid[1:])):
            raise ConfigError(f"the SNR grid must be strictly increasing, got {self.snr_grid}")
        if self.draws < 1:
            raise ConfigError(f"draws must be at least 1, got {self.draws}")
        if self.policy not in POLICIES:
            raise ConfigError(f"Unknown policy '{self.policy}'. Valid policies: {', '.join(sorted(POLICIES))}")
        if self.precoder not in PRECODERS:
            raise ConfigError(f"Unknown precoder '{self.precoder}'. Valid precoders: {', '.join(sorted(PRECODERS))}")
        if self.quantizer not in QUANTIZER_KINDS:
            raise ConfigError(f"Unknown quantizer '{self.quantizer}'. Valid kinds: {', '.join(QUANTIZER_KINDS)}")
        if self.budget_from in ("uniform", "clustered") or self.budget_from not in POLICIES:
            raise ConfigError(f"'{self.budget_from}' cannot set the feedback budget")

    @property
    def name(self) -> str:
        return self.label or f"{self.policy}/{self.precoder}"


def _gamma(s: Scenario) -> float:
    if s.topology.kind != WYNER_1D:
        raise ConfigError(f"policy '{s.policy}' needs the wyner-1d topology")
    return float(s.topology.gamma)


def _tridiagonal(s: Scenario) -> bool:
    return s.topology.kind == WYNER_1D


def _complete_policy(s: Scenario, P: float) -> Allocation:
    return CsitAllocation.complete(s.config)


def _distance_policy(s: Scenario, P: float) -> Allocation:
    return distance_based_allocation(s.config.K, _gamma(s), P, tridiagonal=_tridiagonal(s))


def _conventional_policy(s: Scenario, P: float) -> Allocation:
    return conventional_allocation(s.config.K, _gamma(s), P, tridiagonal=_tridiagonal(s))


def _budget(s: Scenario, P: float) -> int:
    reference = POLICIES[s.budget_from](s, P)
    if not isinstance(reference, CsitAllocation):
        raise ConfigError(f"'{s.budget_from}' does not count feedback bits")
    return allocation_size(reference).bits


def _uniform_policy(s: Scenario, P: float) -> Allocation:
    return uniform_allocation(_budget(s, P), s.config.K, tridiagonal=_tridiagonal(s))


def _clustered_policy(s: Scenario, P: float) -> Allocation:
    return clustered_allocation(_budget(s, P), s.config.K, s.cluster_size, tridiagonal=_tridiagonal(s))


def _tight_policy(s: Scenario, P: float) -> Allocation:
    return tightly_feasible_allocation(s.config)


def _superfeasible_policy(s: Scenario, P: float) -> Allocation:
    return superfeasible_heuristic_allocation(s.config)


def _scaling_policy(s: Scenario, P: float) -> Allocation:
    if s.scaling is None:
        raise ConfigError("the scaling policy needs CSI scaling coefficients")
    return s.scaling


POLICIES: Dict[str, PolicyBuilder] = {
    "complete": _complete_policy,
    "distance-based": _distance_policy,
    "conventional": _conventional_policy,
    "uniform": _uniform_policy,
    "clustered": _clustered_policy,
    "tightly-feasible": _tight_policy,
    "superfeasible": _superfeasible_policy,
    "scaling": _scaling_policy,
}


def _zf_global_rule(H, csit, alloc, P):
    return zf_global(H, P), None


def _zf_distributed_rule(H, csit, alloc, P):
    return zf_distributed(csit, P), None


def _apzf_rule(H, csit, alloc, P):
    if not isinstance(alloc, ScalingAllocation):
        raise ConfigError("active-passive ZF needs CSI scaling coefficients")
    return apzf(csit, alloc, P), None


def _ia_rule(H, csit, alloc, P):
    if not isinstance(alloc, CsitAllocation):
        raise ConfigError("interference alignment needs a block allocation")
    precoders = ia_solve_incomplete(csit, alloc)
    return ia_precoder(H.config, precoders, P), receive_filters(H, precoders)


PRECODERS: Dict[str, PrecoderRule] = {
    "zf-global": _zf_global_rule,
    "zf-distributed": _zf_distributed_rule,
    "apzf": _apzf_rule,
    "ia": _ia_rule,
}

DrawOutcome = Tuple[Optional[np.ndarray], Tuple[str, ...]]


def _simulate_draw(task: Tuple[Scenario, int, int, Allocation]) -> DrawOutcome:
    s, grid_index, draw, alloc = task
    P = db_to_linear(s.snr_grid[grid_index])
    draw_seed = np.random.SeedSequence(s.seed, spawn_key=(grid_index, draw))
    H = gen_channel(s.config, s.topology, P, make_rng(draw_seed, 0))
    try:
        csit = None
        if s.precoder != "zf-global":
            csit_seed = np.random.SeedSequence(s.seed, spawn_key=(grid_index, draw, 1))
            csit = build_distributed_csit(H, alloc, s.quantizer, csit_seed)
        precoder, filters = PRECODERS[s.precoder](H, csit, alloc, P)
    except (NumericalError, InsufficientCsitError, np.linalg.LinAlgError) as exc:
        logger.debug("draw %d at %.1f dB failed: %s", draw, s.snr_grid[grid_index], exc)
        return None, ()
    return user_rates(H, precoder, NOISE_POWER, filters), precoder.flags


def _map(func: Callable[[Any], Any], tasks: Sequence[Any], workers: int) -> List[Any]:
    """Ordered map, in a process pool when ``workers > 1``."""

    if workers <= 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]
    with Pool(processes=workers) as pool:
        return pool.map(func, tasks)


def _aggregate(snr_db: float, outcomes: Sequence[DrawOutcome], alloc: Allocation, K: int) -> ResultRow:
    rates = [r for r, _ in outcomes if r is not None]
    flags = sorted({flag for _, draw_flags in outcomes for flag in draw_flags})
    failed = len(outcomes) - len(rates)
    bits = scalars = 0
    if isinstance(alloc, CsitAllocation):
        size = allocation_size(alloc)
        bits, scalars = size.bits, size.scalars
    if not rates:
        return ResultRow(
            snr_db=snr_db,
            user_rates=(float("nan"),) * K,
            sum_rate_mean=float("nan"),
            stderr=0.0,
            alloc_bits=bits,
            alloc_scalars=scalars,
            flags=tuple(flags + [ALL_FAILED]),
            draws=len(outcomes),
            failed=failed,
        )
    matrix = np.array(rates)
    sums = matrix.sum(axis=1)
    stderr = float(np.std(sums, ddof=1) / np.sqrt(len(sums))) if len(sums) > 1 else 0.0
    return ResultRow(
        snr_db=snr_db,
        user_rates=tuple(float(v) for v in matrix.mean(axis=0)),
        sum_rate_mean=float(sums.mean()),
        stderr=stderr,
        alloc_bits=bits,
        alloc_scalars=scalars,
        flags=tuple(flags),
        draws=len(outcomes),
        failed=failed,
    )


def run_scenario(s: Scenario, workers: int = 1) -> ResultTable:
    """Average user rates over ``s.draws`` channel draws at every grid point.

    Draw ``n`` at grid point ``g`` is seeded from ``(seed, g, n)`` alone, so
    serial and parallel runs give identical tables. The allocation is
    rebuilt at every grid point because bit counts grow with ``P``.
    """

    rows = []
    for grid_index, snr_db in enumerate(s.snr_grid):
        alloc = POLICIES[s.policy](s, db_to_linear(snr_db))
        tasks = [(s, grid_index, draw, alloc) for draw in range(s.draws)]
        outcomes = _map(_simulate_draw, tasks, workers)
        row = _aggregate(snr_db, outcomes, alloc, s.config.K)
        if row.failed:
            logger.warning("%s: %d of %d draws failed at %.1f dB", s.name, row.failed, row.draws, snr_db)
        rows.append(row)
    return ResultTable(label=s.name, rows=tuple(rows))


def random_antenna_config(K: int, total: int, rng: np.random.Generator) -> AntennaConfig:
    """Split ``total`` antennas over the ``2K`` nodes, uniformly over compositions with at least one each."""

    nodes = 2 * K
    if total < nodes:
        raise ConfigError(f"{total} antennas cannot give each of {nodes} nodes at least one")
    cuts = np.sort(rng.choice(np.arange(1, total), size=nodes - 1, replace=False))
    parts = np.diff(np.concatenate(([0], cuts, [total])))
    return AntennaConfig(K=K, n_tx=tuple(parts[:K]), n_rx=tuple(parts[K:]), d=(1,) * K)


def _size_draw(task: Tuple[int, int, int, int]) -> Optional[Tuple[int, int]]:
    K, total, seed, draw = task
    config = random_antenna_config(K, total, make_rng(seed, total, draw))
    try:
        alloc = superfeasible_heuristic_allocation(config)
    except InfeasibleError:
        return None
    return allocation_size(alloc).scalars, allocation_size(CsitAllocation.complete(config)).scalars


def run_size_experiment(
    K: int, totals: Iterable[int], draws: int, seed: int, workers: int = 1, label: str = "ia-allocation"
) -> SizeTable:
    """Mean IA-driven allocation size over random antenna distributions.

    Draws whose distribution is not IA feasible are counted as failed.
    """

    if draws < 1:
        raise ConfigError(f"draws must be at least 1, got {draws}")
    rows = []
    for total in totals:
        outcomes = _map(_size_draw, [(K, total, seed, draw) for draw in range(draws)], workers)
        sizes = [o for o in outcomes if o is not None]
        failed = len(outcomes) - len(sizes)
        if sizes:
            alloc = np.array([a for a, _ in sizes], dtype=float)
            complete = np.array([c for _, c in sizes], dtype=float)
            stderr = float(np.std(alloc, ddof=1) / np.sqrt(len(alloc))) if len(alloc) > 1 else 0.0
            rows.append(SizeRow(total, float(alloc.mean()), float(complete.mean()), stderr, draws, failed))
        else:
            rows.append(SizeRow(total, float("nan"), float("nan"), 0.0, draws, failed))
    return SizeTable(label=label, rows=tuple(rows))


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    if isinstance(value, (tuple, list)):
        return ";".join(_fmt(v) for v in value)
    return str(value)


def _records(report: Report) -> Tuple[Tuple[str, ...], List[List[Any]]]:
    if isinstance(report, ResultTable):
        header = tuple(CSV_HEADER.split(","))
        rows = [
            [row.snr_db, row.user_rate_mean, row.sum_rate_mean, row.stderr, row.alloc_bits, row.alloc_scalars, row.flags]
            for row in report.rows
        ]
        return header, rows
    if isinstance(report, SizeTable):
        header = tuple(SIZE_CSV_HEADER.split(","))
        rows = [
            [row.antennas, row.alloc_scalars_mean, row.complete_scalars_mean, row.stderr, row.draws, row.failed]
            for row in report.rows
        ]
        return header, rows
    return report.header, [list(row) for row in report.rows]


def print_report(report: Report) -> None:
    """Pretty-print one report to stdout."""

    header, rows = _records(report)
    print(report.label)
    if not rows:
        print("No results.")
        return
    cells = [[_fmt(value) for value in row] for row in rows]
    widths = [max(len(h), *(len(row[i]) for row in cells)) for i, h in enumerate(header)]
    line = "  ".join(f"{h:<{w}}" for h, w in zip(header, widths))
    print(line)
    print("-" * len(line))
    for row in cells:
        print("  ".join(f"{value:<{w}}" for value, w in zip(row, widths)))


def print_summary(reports: Iterable[Report], window_db: float = SUMMARY_WINDOW_DB) -> None:
    """DoF slope over the top ``window_db`` of each rate curve, allocation sizes and failures."""

    for report in reports:
        if not isinstance(report, ResultTable) or not report.rows:
            continue
        top = report.rows[-1].snr_db
        failed = sum(row.failed for row in report.rows)
        last = report.rows[-1]
        try:
            slope = f"{sum_dof_slope(report, (top - window_db, top)):.3f}"
        except ConfigError:
            slope = "n/a"
        print(
            f"{report.label}: sum DoF slope {slope} over {top - window_db:g}..{top:g} dB, "
            f"{last.alloc_bits:g} bits / {last.alloc_scalars:g} scalars at {top:g} dB, {failed} failed draws"
        )


def _slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "-", label).strip("-").lower() or "report"


def _check_reports(reports: Sequence[Report]) -> None:
    if not reports:
        raise ConfigError("nothing to write: no result tables")
    for report in reports:
        if not report.rows:
            raise ConfigError(f"nothing to write: table '{report.label}' is empty")


def export_csv(reports: Sequence[Report], path: str) -> List[str]:
    """One csv per report; several reports get the label appended to the file name."""

    _check_reports(reports)
    target = Path(path)
    written = []
    for report in reports:
        out = target if len(reports) == 1 else target.with_name(f"{target.stem}-{_slug(report.label)}{target.suffix or '.csv'}")
        header, rows = _records(report)
        with open(out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(value) for value in row])
        written.append(str(out))
    return written


def export_svg(reports: Sequence[Report], path: str) -> List[str]:
    """Plot every rate table (sum rate vs SNR) or size table (scalars vs antennas) as a labelled series."""

    _check_reports(reports)
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rate_tables = [r for r in reports if isinstance(r, ResultTable)]
    size_tables = [r for r in reports if isinstance(r, SizeTable)]
    if not rate_tables and not size_tables:
        raise ConfigError("only rate and size tables can be plotted")

    with matplotlib.rc_context({"svg.hashsalt": SVG_HASHSALT, "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(8, 5))
        for table in rate_tables:
            ax.errorbar(
                [row.snr_db for row in table.rows],
                [row.sum_rate_mean for row in table.rows],
                yerr=[row.stderr for row in table.rows],
                marker="o",
                capsize=3,
                label=table.label,
            )
        for table in size_tables:
            antennas = [row.antennas for row in table.rows]
            ax.plot(antennas, [row.alloc_scalars_mean for row in table.rows], "-o", label=table.label)
            ax.plot(antennas, [row.complete_scalars_mean for row in table.rows], "--s", label=f"{table.label} (complete)")
        if rate_tables:
            ax.set_xlabel("SNR [dB]")
            ax.set_ylabel("Sum rate [bits/s/Hz]")
        else:
            ax.set_xlabel("Total antennas")
            ax.set_ylabel("Allocation size [scalars]")
        ax.grid(True)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return [path]


def export_xlsx(reports: Sequence[Report], path: str) -> List[str]:
    """Write every report to its own sheet of an Excel workbook at *path*.

    The function requires the optional :mod:`openpyxl` dependency.
    """

    _check_reports(reports)
    try:
        from openpyxl import Workbook
        from openpyxl.utils import get_column_letter
    except ImportError as exc:  # pragma: no cover - dependency missing during tests
        raise RuntimeError(
            "The 'openpyxl' package is required to export results to Excel. "
            "Install it with 'pip install openpyxl'."
        ) from exc

    workbook = Workbook()
    workbook.remove(workbook.active)
    used = set()
    for report in reports:
        title = _slug(report.label)[:28] or "report"
        while title in used:
            title = f"{title[:26]}-{len(used)}"
        used.add(title)
        sheet = workbook.create_sheet(title=title)
        header, rows = _records(report)
        sheet.append(list(header))
        column_widths = [len(h) for h in header]
        for row in rows:
            values = [_fmt(v) if isinstance(v, (tuple, list)) else v for v in row]
            sheet.append(values)
            for idx, value in enumerate(values):
                column_widths[idx] = max(column_widths[idx], len(str(value)))
        for idx, width in enumerate(column_widths, start=1):
            sheet.column_dimensions[get_column_letter(idx)].width = min(width + 2, 60)
    workbook.save(path)
    return [path]


EXPORTERS: Dict[str, Callable[[Sequence[Report], str], List[str]]] = {
    "csv": export_csv,
    "svg": export_svg,
    "xlsx": export_xlsx,
}


def emit(reports: Union[Report, Sequence[Report]], path: str, fmt: str = "csv") -> List[str]:
    """Write ``reports`` to ``path`` in ``fmt`` and return the files written."""

    if isinstance(reports, (ResultTable, SizeTable, TextTable)):
        reports = [reports]
    if fmt not in EXPORTERS:
        raise ConfigError(f"Unknown format '{fmt}'. Valid formats: {', '.join(FORMATS)}")
    return EXPORTERS[fmt](list(reports), path)


__all__ = [
    "EXPORTERS",
    "FORMATS",
    "POLICIES",
    "PRECODERS",
    "Scenario",
    "emit",
    "export_csv",
    "export_svg",
    "export_xlsx",
    "print_report",
    "print_summary",
    "random_antenna_config",
    "run_scenario",
    "run_size_experiment",
]
