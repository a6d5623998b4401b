"""Exception types raised by the CSIT sharing toolkit."""
from __future__ import annotations

from typing import Optional, Tuple


class CsitSharingError(Exception):
    """Base class for every error raised by :mod:`csit_sharing`."""


class ConfigError(CsitSharingError, ValueError):
    """Invalid antenna configuration, topology, scenario or precondition."""


class InfeasibleError(ConfigError):
    """Raised when an allocation is requested for a setting IA cannot serve."""


class EnumerationLimitError(ConfigError):
    """Raised when an exhaustive subset enumeration would exceed its guard."""


class NumericalError(CsitSharingError, RuntimeError):
    """Singular or ill-conditioned channel encountered during precoding."""


class InsufficientCsitError(CsitSharingError, RuntimeError):
    """A TX needs a channel block that its CSIT allocation does not provide.

    ``tx`` and ``block`` are 0-based; the message uses 1-based indices like
    every other text surface of the package.
    """

    def __init__(self, tx: int, block: Tuple[int, int], detail: Optional[str] = None) -> None:
        self.tx = tx
        self.block = block
        message = f"TX {tx + 1} needs block H[{block[0] + 1},{block[1] + 1}] which is not allocated"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


__all__ = [
    "CsitSharingError",
    "ConfigError",
    "EnumerationLimitError",
    "InfeasibleError",
    "InsufficientCsitError",
    "NumericalError",
]
