"""Result records shared by every experiment."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

from .errors import ConfigError

CSV_HEADER = "snr_db,user_rate_mean,sum_rate_mean,stderr,alloc_bits,alloc_scalars,flags"
SIZE_CSV_HEADER = "antennas,alloc_scalars_mean,complete_scalars_mean,stderr,draws,failed"


@dataclass(frozen=True)
class ResultRow:
    """Monte-Carlo averages at one SNR grid point."""

    snr_db: float
    user_rates: Tuple[float, ...]
    sum_rate_mean: float
    stderr: float
    alloc_bits: float = 0.0
    alloc_scalars: float = 0.0
    flags: Tuple[str, ...] = ()
    draws: int = 0
    failed: int = 0

    @property
    def user_rate_mean(self) -> float:
        return sum(self.user_rates) / len(self.user_rates) if self.user_rates else 0.0


@dataclass(frozen=True)
class ResultTable:
    """One labelled rate-vs-SNR curve."""

    label: str
    rows: Tuple[ResultRow, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        snrs = [row.snr_db for row in self.rows]
        if any(b <= a for a, b in zip(snrs, snrs[1:])):
            raise ConfigError(f"result rows of '{self.label}' are not strictly increasing in SNR")
        if any(row.stderr < 0 for row in self.rows):
            raise ConfigError(f"negative standard error in '{self.label}'")

    def row_at(self, snr_db: float) -> ResultRow:
        for row in self.rows:
            if row.snr_db == snr_db:
                return row
        raise KeyError(snr_db)


@dataclass(frozen=True)
class SizeRow:
    """Mean allocation size over random antenna distributions with a fixed antenna total."""

    antennas: int
    alloc_scalars_mean: float
    complete_scalars_mean: float
    stderr: float
    draws: int
    failed: int


@dataclass(frozen=True)
class SizeTable:
    label: str
    rows: Tuple[SizeRow, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class TextTable:
    """Plain report table printed by the analysis commands."""

    label: str
    header: Tuple[str, ...]
    rows: Tuple[Tuple[object, ...], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        for row in self.rows:
            if len(row) != len(self.header):
                raise ConfigError(f"row {row} does not match header {self.header} in '{self.label}'")


__all__ = ["CSV_HEADER", "ResultRow", "ResultTable", "SIZE_CSV_HEADER", "SizeRow", "SizeTable", "TextTable"]
