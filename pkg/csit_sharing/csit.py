"""Quantized feedback and the per-TX distributed channel estimates.

A :class:`CsitAllocation` states, for every TX ``j`` and every channel row
``i`` (the channel from all TXs to RX ``i``), how precisely TX ``j`` knows
that row. :func:`build_distributed_csit` turns an allocation and a true
channel into one masked, quantized network estimate per TX. Quantization
noise is drawn independently per (TX, row), so two TXs never hold the same
estimate of a quantized row.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple, Union

import numpy as np

from .channel import AntennaConfig, ChannelRealization
from .errors import ConfigError
from .utils import SeedLike, crandn, make_rng

RVQ = "rvq"
SURROGATE = "surrogate"
QUANTIZER_KINDS = (RVQ, SURROGATE)
RVQ_MAX_BITS = 16

Key = Tuple[int, int]


class PrecisionKind(str, Enum):
    EXACT = "exact"
    BITS = "bits"
    NONE = "none"


@dataclass(frozen=True)
class Precision:
    """How precisely a TX knows one channel row: exact, ``B`` bits or not at all."""

    kind: PrecisionKind
    bits: int = 0

    def __post_init__(self) -> None:
        if self.bits < 0:
            raise ConfigError(f"bit counts must be non-negative, got {self.bits}")
        if self.kind != PrecisionKind.BITS and self.bits:
            raise ConfigError(f"{self.kind.value} precision carries no bit count")

    @classmethod
    def exact(cls) -> "Precision":
        return cls(PrecisionKind.EXACT)

    @classmethod
    def of_bits(cls, bits: int) -> "Precision":
        return cls(PrecisionKind.BITS, int(bits))

    @classmethod
    def none(cls) -> "Precision":
        return cls(PrecisionKind.NONE)

    @property
    def is_known(self) -> bool:
        """``False`` for ``None`` and for ``Bits(0)``, which carry no information."""

        return self.kind == PrecisionKind.EXACT or (self.kind == PrecisionKind.BITS and self.bits > 0)

    def __str__(self) -> str:
        if self.kind == PrecisionKind.BITS:
            return f"bits:{self.bits}"
        return self.kind.value

    @classmethod
    def parse(cls, text: str) -> "Precision":
        text = text.strip().lower()
        if text == PrecisionKind.EXACT.value:
            return cls.exact()
        if text == PrecisionKind.NONE.value:
            return cls.none()
        if text.startswith("bits:"):
            return cls.of_bits(int(text.split(":", 1)[1]))
        raise ConfigError(f"Cannot parse precision '{text}'")


@dataclass(frozen=True)
class AllocationSize:
    scalars: int
    bits: int


@dataclass(frozen=True)
class CsitAllocation:
    """Per-(row i, TX j) precision map of a K-user network.

    ``columns`` optionally restricts an entry to the channel blocks from a
    subset of TXs; without a restriction the entry covers the whole row.
    ``n_rx``/``n_tx`` are the block dimensions used for the scalar count.
    ``plan`` carries the constraint-responsibility split produced by the IA
    allocation policies (``None`` for feedback-only policies).
    """

    K: int
    entries: Mapping[Key, Precision]
    columns: Mapping[Key, FrozenSet[int]] = field(default_factory=dict)
    n_rx: Tuple[int, ...] = ()
    n_tx: Tuple[int, ...] = ()
    unit: str = "bits"
    plan: Optional[Any] = None

    def __post_init__(self) -> None:
        if not self.n_rx:
            object.__setattr__(self, "n_rx", (1,) * self.K)
        if not self.n_tx:
            object.__setattr__(self, "n_tx", (1,) * self.K)
        if self.unit not in ("bits", "scalars"):
            raise ConfigError(f"unit must be 'bits' or 'scalars', got '{self.unit}'")
        expected = {(i, j) for i in range(self.K) for j in range(self.K)}
        if set(self.entries) != expected:
            missing = sorted(expected - set(self.entries))
            extra = sorted(set(self.entries) - expected)
            raise ConfigError(f"allocation must cover every (row, tx) pair; missing={missing} extra={extra}")
        for key, cols in self.columns.items():
            if key not in expected or any(not 0 <= k < self.K for k in cols):
                raise ConfigError(f"column restriction {key} -> {sorted(cols)} is out of range")

    @classmethod
    def build(
        cls,
        K: int,
        precision: Union[Precision, Mapping[Key, Precision]],
        *,
        columns: Optional[Mapping[Key, Iterable[int]]] = None,
        config: Optional[AntennaConfig] = None,
        unit: str = "bits",
        plan: Optional[Any] = None,
    ) -> "CsitAllocation":
        """Fill every (row, tx) pair from a single precision or a sparse mapping (rest ``None``)."""

        if isinstance(precision, Precision):
            entries = {(i, j): precision for i in range(K) for j in range(K)}
        else:
            entries = {(i, j): precision.get((i, j), Precision.none()) for i in range(K) for j in range(K)}
        cols = {key: frozenset(value) for key, value in (columns or {}).items()}
        n_rx = config.n_rx if config is not None else ()
        n_tx = config.n_tx if config is not None else ()
        return cls(K=K, entries=entries, columns=cols, n_rx=n_rx, n_tx=n_tx, unit=unit, plan=plan)

    @classmethod
    def complete(cls, config: AntennaConfig) -> "CsitAllocation":
        return cls.build(config.K, Precision.exact(), config=config, unit="scalars")

    @classmethod
    def empty(cls, K: int, config: Optional[AntennaConfig] = None) -> "CsitAllocation":
        return cls.build(K, Precision.none(), config=config, unit="scalars")

    def precision(self, i: int, j: int) -> Precision:
        return self.entries[(i, j)]

    def known_columns(self, i: int, j: int) -> Tuple[int, ...]:
        """TXs whose blocks in row ``i`` TX ``j`` knows (empty when the row is unknown)."""

        if not self.entries[(i, j)].is_known:
            return ()
        return tuple(sorted(self.columns.get((i, j), range(self.K))))

    def is_complete(self) -> bool:
        return all(len(self.known_columns(i, j)) == self.K for (i, j) in self.entries)

    def tx_bits(self, j: int) -> int:
        return sum(self.entries[(i, j)].bits for i in range(self.K))

    def union(self, other: "CsitAllocation") -> "CsitAllocation":
        """Merge two allocations whose known entries are disjoint."""

        if other.K != self.K or other.n_rx != self.n_rx or other.n_tx != self.n_tx:
            raise ConfigError("cannot merge allocations of different networks")
        entries: Dict[Key, Precision] = {}
        columns: Dict[Key, FrozenSet[int]] = {}
        for key in self.entries:
            mine, theirs = self.entries[key], other.entries[key]
            if mine.is_known and theirs.is_known:
                raise ConfigError(f"allocations overlap at row {key[0] + 1}, TX {key[1] + 1}")
            source = self if mine.is_known else other
            entries[key] = source.entries[key]
            if key in source.columns:
                columns[key] = source.columns[key]
        unit = "bits" if "bits" in (self.unit, other.unit) else "scalars"
        return CsitAllocation(
            K=self.K, entries=entries, columns=columns, n_rx=self.n_rx, n_tx=self.n_tx, unit=unit
        )

    def to_text(self) -> str:
        """Plain-text table, one line per (tx, row, precision), 1-based indices."""

        lines = ["# tx row precision columns"]
        for j in range(self.K):
            for i in range(self.K):
                precision = self.entries[(i, j)]
                cols = self.columns.get((i, j))
                col_text = "all" if cols is None else ",".join(str(k + 1) for k in sorted(cols)) or "-"
                lines.append(f"{j + 1} {i + 1} {precision} {col_text}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, config: Optional[AntennaConfig] = None) -> "CsitAllocation":
        rows: List[Tuple[int, int, Precision, Optional[FrozenSet[int]]]] = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ConfigError(f"Malformed allocation line '{line}'")
            j, i = int(parts[0]) - 1, int(parts[1]) - 1
            cols: Optional[FrozenSet[int]]
            if parts[3] == "all":
                cols = None
            elif parts[3] == "-":
                cols = frozenset()
            else:
                cols = frozenset(int(k) - 1 for k in parts[3].split(","))
            rows.append((i, j, Precision.parse(parts[2]), cols))
        K = max(max(i, j) for i, j, _, _ in rows) + 1 if rows else 0
        entries = {(i, j): precision for i, j, precision, _ in rows}
        columns = {(i, j): cols for i, j, _, cols in rows if cols is not None}
        unit = "bits" if any(p.kind == PrecisionKind.BITS for p in entries.values()) else "scalars"
        return cls(
            K=K,
            entries=entries,
            columns=columns,
            n_rx=config.n_rx if config is not None else (),
            n_tx=config.n_tx if config is not None else (),
            unit=unit,
        )


@dataclass(frozen=True)
class ScalingAllocation:
    """CSI scaling coefficients ``alpha[(i, j)]``: accuracy exponent of row i at TX j."""

    K: int
    alpha: Mapping[Key, float]

    def __post_init__(self) -> None:
        expected = {(i, j) for i in range(self.K) for j in range(self.K)}
        if set(self.alpha) != expected:
            raise ConfigError("scaling allocation must cover every (row, tx) pair")
        for key, value in self.alpha.items():
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"alpha{key} = {value} is outside [0, 1]")

    @classmethod
    def uniform(cls, K: int, alpha: float) -> "ScalingAllocation":
        return cls(K=K, alpha={(i, j): alpha for i in range(K) for j in range(K)})

    @classmethod
    def two_user(cls, a11: float, a21: float, a12: float, a22: float) -> "ScalingAllocation":
        """Two-user scaling with ``a<row><tx>`` naming (``a21`` is row 2 at TX 1)."""

        return cls(K=2, alpha={(0, 0): a11, (1, 0): a21, (0, 1): a12, (1, 1): a22})


@dataclass(frozen=True)
class DistributedCsit:
    """One masked network-channel estimate per TX.

    ``estimates[j]`` has the shape of the network channel; entries whose
    ``known[j]`` flag is ``False`` are zero.
    """

    config: AntennaConfig
    estimates: Tuple[np.ndarray, ...]
    known: Tuple[np.ndarray, ...]
    snr: float

    def __post_init__(self) -> None:
        for estimate, mask in zip(self.estimates, self.known):
            estimate.setflags(write=False)
            mask.setflags(write=False)

    @property
    def K(self) -> int:
        return self.config.K

    def estimate(self, j: int) -> np.ndarray:
        return self.estimates[j]

    def block(self, j: int, i: int, k: int) -> np.ndarray:
        return self.estimates[j][self.config.rx_slice(i), self.config.tx_slice(k)]

    def block_known(self, j: int, i: int, k: int, rows: Optional[int] = None, cols: Optional[int] = None) -> bool:
        """Whether TX ``j`` knows block ``(i, k)``, optionally only its leading ``rows x cols`` part."""

        mask = self.known[j][self.config.rx_slice(i), self.config.tx_slice(k)]
        return bool(np.all(mask[:rows, :cols]))

    def row_known(self, j: int, i: int) -> bool:
        return bool(np.any(self.known[j][self.config.rx_slice(i), :]))

    @classmethod
    def exact(cls, H: ChannelRealization) -> "DistributedCsit":
        """Every TX holds the true channel."""

        estimates = tuple(H.matrix.copy() for _ in range(H.K))
        known = tuple(np.ones(H.matrix.shape, dtype=bool) for _ in range(H.K))
        return cls(config=H.config, estimates=estimates, known=known, snr=H.snr)


def rvq_codebook(dimension: int, bits: int, seed: SeedLike) -> np.ndarray:
    """Random unit-norm codebook with ``2**bits`` rows of length ``dimension``."""

    if bits > RVQ_MAX_BITS:
        raise ConfigError(f"RVQ codebooks are limited to {RVQ_MAX_BITS} bits, got {bits}")
    rng = make_rng(seed)
    words = crandn(rng, (2**bits, dimension))
    return words / np.linalg.norm(words, axis=1, keepdims=True)


def quantize_vector(
    h: np.ndarray,
    B: int,
    kind: str = SURROGATE,
    seed: SeedLike = None,
    *,
    codebook: Optional[np.ndarray] = None,
) -> Optional[np.ndarray]:
    """Quantize ``h`` with ``B`` bits; ``None`` is the unknown marker (``B == 0``).

    Only the nonzero support of ``h`` is described. ``rvq`` returns the
    codeword with the largest inner-product magnitude rescaled to ``||h||``;
    ``surrogate`` adds complex normal noise of variance ``2**(-B/m)`` per
    entry, ``m`` being the support size.
    """

    if B < 0:
        raise ConfigError(f"bit counts must be non-negative, got {B}")
    if kind not in QUANTIZER_KINDS:
        raise ConfigError(f"Unknown quantizer '{kind}'. Valid kinds: {', '.join(QUANTIZER_KINDS)}")
    if kind == RVQ and B > RVQ_MAX_BITS:
        raise ConfigError(f"RVQ codebooks are limited to {RVQ_MAX_BITS} bits, got {B}")
    if B == 0:
        return None

    h = np.asarray(h, dtype=complex)
    support = np.flatnonzero(h)
    m = support.size
    estimate = np.zeros_like(h)
    if m == 0:
        return estimate

    values = h[support]
    if kind == RVQ:
        if codebook is None:
            codebook = rvq_codebook(m, B, seed)
        scores = np.abs(codebook.conj() @ values)
        estimate[support] = codebook[int(np.argmax(scores))] * np.linalg.norm(values)
    else:
        rng = make_rng(seed)
        estimate[support] = values + crandn(rng, m, 2.0 ** (-B / m))
    return estimate


def scaling_to_variance(alpha: float, P: float) -> float:
    """Estimation error variance ``P**(-alpha)`` of a row with CSI scaling ``alpha``."""

    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f"alpha must lie in [0, 1], got {alpha}")
    if P <= 1.0:
        raise ConfigError(f"P must exceed 1, got {P}")
    return float(P ** (-alpha))


def build_distributed_csit(
    H: ChannelRealization,
    alloc: Union[CsitAllocation, ScalingAllocation],
    kind: str = SURROGATE,
    seed: SeedLike = None,
) -> DistributedCsit:
    """Apply ``alloc`` to the true channel and return every TX's own estimate."""

    config = H.config
    if alloc.K != config.K:
        raise ConfigError(f"allocation is for K={alloc.K}, channel has K={config.K}")
    if isinstance(alloc, CsitAllocation) and (
        any(a > n for a, n in zip(alloc.n_rx, config.n_rx)) or any(a > n for a, n in zip(alloc.n_tx, config.n_tx))
    ):
        raise ConfigError("allocation block dimensions exceed the channel's antenna counts")
    if isinstance(seed, np.random.Generator):
        # one draw fixes every per-entry stream
        seed = np.random.SeedSequence(int(seed.integers(2**63)))

    estimates: List[np.ndarray] = []
    known: List[np.ndarray] = []
    for j in range(config.K):
        estimate = np.zeros_like(H.matrix)
        mask = np.zeros(H.matrix.shape, dtype=bool)
        for i in range(config.K):
            rows = config.rx_slice(i)
            if isinstance(alloc, ScalingAllocation):
                true_row = H.row(i)
                variance = scaling_to_variance(alloc.alpha[(i, j)], H.snr)
                noise = crandn(make_rng(seed, j, i), true_row.shape, variance)
                estimate[rows, :] = true_row + np.where(true_row != 0, noise, 0.0)
                mask[rows, :] = True
                continue
            _fill_row(estimate, mask, H, alloc, i, j, kind, seed)
        estimates.append(estimate)
        known.append(mask)
    return DistributedCsit(config=config, estimates=tuple(estimates), known=tuple(known), snr=H.snr)


def _fill_row(
    estimate: np.ndarray,
    mask: np.ndarray,
    H: ChannelRealization,
    alloc: CsitAllocation,
    i: int,
    j: int,
    kind: str,
    seed: SeedLike,
) -> None:
    config = H.config
    precision = alloc.precision(i, j)
    cols = alloc.known_columns(i, j)
    if not cols:
        return
    row_start = config.rx_slice(i).start
    rows = slice(row_start, row_start + alloc.n_rx[i])
    col_index = np.concatenate(
        [np.arange(config.tx_slice(k).start, config.tx_slice(k).start + alloc.n_tx[k]) for k in cols]
    )
    true_part = H.matrix[rows][:, col_index]
    if precision.kind == PrecisionKind.EXACT:
        values = true_part
    else:
        quantized = quantize_vector(true_part.ravel(), precision.bits, kind, make_rng(seed, j, i))
        if quantized is None:
            return
        values = quantized.reshape(true_part.shape)
    estimate[rows.start : rows.stop, col_index] = values
    mask[rows.start : rows.stop, col_index] = True


def allocation_size(alloc: CsitAllocation) -> AllocationSize:
    """Scalar and bit count of ``alloc`` summed over all TXs."""

    scalars = 0
    bits = 0
    for (i, j), precision in alloc.entries.items():
        cols = alloc.known_columns(i, j)
        scalars += alloc.n_rx[i] * sum(alloc.n_tx[k] for k in cols)
        if precision.kind == PrecisionKind.BITS:
            bits += precision.bits
    return AllocationSize(scalars=scalars, bits=bits)


__all__ = [
    "AllocationSize",
    "CsitAllocation",
    "DistributedCsit",
    "Precision",
    "PrecisionKind",
    "QUANTIZER_KINDS",
    "RVQ",
    "RVQ_MAX_BITS",
    "SURROGATE",
    "ScalingAllocation",
    "allocation_size",
    "build_distributed_csit",
    "quantize_vector",
    "rvq_codebook",
    "scaling_to_variance",
]
