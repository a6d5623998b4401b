"""Interference-channel instances and random channel generation.

Two topologies are supported: dense i.i.d. Rayleigh blocks for the MIMO
interference channel, and the one-dimensional Wyner model where only
adjacent cells interfere and the network channel is tridiagonal.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError
from .utils import SeedLike, crandn, make_rng

IID_RAYLEIGH = "iid-rayleigh"
WYNER_1D = "wyner-1d"
TOPOLOGY_KINDS = (IID_RAYLEIGH, WYNER_1D)


@dataclass(frozen=True)
class AntennaConfig:
    """Antenna and stream counts of a K-user interference channel."""

    K: int
    n_tx: Tuple[int, ...]
    n_rx: Tuple[int, ...]
    d: Tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_tx", tuple(int(n) for n in self.n_tx))
        object.__setattr__(self, "n_rx", tuple(int(n) for n in self.n_rx))
        object.__setattr__(self, "d", tuple(int(n) for n in self.d))
        if self.K < 1:
            raise ConfigError(f"K must be at least 1, got {self.K}")
        for name in ("n_tx", "n_rx", "d"):
            values = getattr(self, name)
            if len(values) != self.K:
                raise ConfigError(f"{name} has {len(values)} entries, expected K={self.K}")
            if any(value < 1 for value in values):
                raise ConfigError(f"{name} entries must be at least 1, got {values}")
        for k in range(self.K):
            if self.d[k] > min(self.n_tx[k], self.n_rx[k]):
                raise ConfigError(
                    f"user {k + 1} carries {self.d[k]} streams with "
                    f"{self.n_tx[k]} TX / {self.n_rx[k]} RX antennas"
                )

    @classmethod
    def homogeneous(cls, K: int, n_tx: int = 1, n_rx: Optional[int] = None, d: int = 1) -> "AntennaConfig":
        n_rx = n_tx if n_rx is None else n_rx
        return cls(K=K, n_tx=(n_tx,) * K, n_rx=(n_rx,) * K, d=(d,) * K)

    @property
    def total_tx(self) -> int:
        return sum(self.n_tx)

    @property
    def total_rx(self) -> int:
        return sum(self.n_rx)

    @property
    def total_streams(self) -> int:
        return sum(self.d)

    @property
    def is_single_antenna(self) -> bool:
        return all(n == 1 for n in self.n_tx + self.n_rx)

    def tx_slice(self, j: int) -> slice:
        start = sum(self.n_tx[:j])
        return slice(start, start + self.n_tx[j])

    def rx_slice(self, i: int) -> slice:
        start = sum(self.n_rx[:i])
        return slice(start, start + self.n_rx[i])

    def stream_slice(self, k: int) -> slice:
        start = sum(self.d[:k])
        return slice(start, start + self.d[k])


@dataclass(frozen=True)
class Topology:
    """Channel topology: dense i.i.d. or 1-D Wyner with interference level gamma."""

    kind: str = IID_RAYLEIGH
    gamma: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in TOPOLOGY_KINDS:
            raise ConfigError(f"Unknown topology '{self.kind}'. Valid kinds: {', '.join(TOPOLOGY_KINDS)}")
        if self.kind == WYNER_1D:
            if self.gamma is None:
                raise ConfigError("wyner-1d topology requires gamma")
            if not 0.0 <= self.gamma <= 1.0:
                raise ConfigError(f"gamma must lie in [0, 1], got {self.gamma}")
        elif self.gamma is not None:
            raise ConfigError("gamma is only meaningful for the wyner-1d topology")

    @classmethod
    def wyner(cls, gamma: float) -> "Topology":
        return cls(kind=WYNER_1D, gamma=gamma)


@dataclass(frozen=True)
class SubIc:
    """Interference channel restricted to a subset of TXs and a subset of RXs."""

    tx_set: FrozenSet[int]
    rx_set: FrozenSet[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "tx_set", frozenset(self.tx_set))
        object.__setattr__(self, "rx_set", frozenset(self.rx_set))
        if not self.tx_set or not self.rx_set:
            raise ConfigError("a sub-IC needs at least one TX and one RX")

    @classmethod
    def of_users(cls, users: Iterable[int]) -> "SubIc":
        users = frozenset(users)
        return cls(tx_set=users, rx_set=users)

    @classmethod
    def full(cls, K: int) -> "SubIc":
        return cls.of_users(range(K))

    def sort_key(self) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        return (tuple(sorted(self.tx_set)), tuple(sorted(self.rx_set)))

    def check_within(self, config: AntennaConfig) -> None:
        if max(self.tx_set | self.rx_set) >= config.K or min(self.tx_set | self.rx_set) < 0:
            raise ConfigError(f"sub-IC {self.sort_key()} exceeds K={config.K}")


@dataclass(frozen=True)
class ChannelRealization:
    """All TX-to-RX channel blocks of one network realization.

    ``matrix`` is the dense ``total_rx x total_tx`` network channel; block
    ``(i, j)`` holds the ``n_rx[i] x n_tx[j]`` channel from TX j to RX i.
    Wyner realizations use the same layout with structural zeros.
    """

    config: AntennaConfig
    matrix: np.ndarray
    snr: float
    topology: Topology = field(default_factory=Topology)

    def __post_init__(self) -> None:
        matrix = np.array(self.matrix, dtype=complex)
        expected = (self.config.total_rx, self.config.total_tx)
        if matrix.shape != expected:
            raise ConfigError(f"channel matrix has shape {matrix.shape}, expected {expected}")
        if not np.all(np.isfinite(matrix)):
            raise ConfigError("channel matrix contains non-finite entries")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def K(self) -> int:
        return self.config.K

    def block(self, i: int, j: int) -> np.ndarray:
        return self.matrix[self.config.rx_slice(i), self.config.tx_slice(j)]

    def row(self, i: int) -> np.ndarray:
        return self.matrix[self.config.rx_slice(i), :]


def interference_scale(P: float, gamma: float) -> float:
    """Power attenuation ``mu = P**(gamma - 1)`` of the neighbouring links.

    ``mu`` is the variance of the interfering entries, so the resulting INR
    is ``P * mu = P**gamma``.
    """

    if P <= 1.0:
        raise ConfigError(f"P must exceed 1 for the generalized DoF scaling, got {P}")
    if not 0.0 <= gamma <= 1.0:
        raise ConfigError(f"gamma must lie in [0, 1], got {gamma}")
    return float(P ** (gamma - 1.0))


def gen_channel(config: AntennaConfig, topology: Topology, P: float, seed: SeedLike) -> ChannelRealization:
    """Draw a channel realization, deterministic in ``seed``."""

    rng = make_rng(seed)
    if topology.kind == IID_RAYLEIGH:
        matrix = crandn(rng, (config.total_rx, config.total_tx))
        return ChannelRealization(config=config, matrix=matrix, snr=P, topology=topology)

    if not config.is_single_antenna:
        raise ConfigError("the wyner-1d topology is defined for single-antenna TXs and RXs only")
    mu = interference_scale(P, topology.gamma)
    K = config.K
    matrix = crandn(rng, (K, K))
    distance = np.abs(np.subtract.outer(np.arange(K), np.arange(K)))
    matrix = np.where(distance == 0, matrix, np.where(distance == 1, np.sqrt(mu) * matrix, 0.0))
    return ChannelRealization(config=config, matrix=matrix, snr=P, topology=topology)


def as_config(n_tx: Sequence[int], n_rx: Sequence[int], d: Optional[Sequence[int]] = None) -> AntennaConfig:
    """Build an :class:`AntennaConfig` from per-user sequences (single stream by default)."""

    K = len(n_tx)
    return AntennaConfig(K=K, n_tx=tuple(n_tx), n_rx=tuple(n_rx), d=tuple(d) if d is not None else (1,) * K)


__all__ = [
    "AntennaConfig",
    "ChannelRealization",
    "IID_RAYLEIGH",
    "SubIc",
    "TOPOLOGY_KINDS",
    "Topology",
    "WYNER_1D",
    "as_config",
    "gen_channel",
    "interference_scale",
]
