"""Network-MIMO precoders under centralized and distributed CSIT.

Every distributed rule runs once per TX on that TX's own estimate and keeps
only the TX's own rows; the rows are then stacked into the precoder that is
actually applied to the true channel. Recoverable numerical trouble is
reported through ``EffectivePrecoder.flags`` instead of raising.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .channel import AntennaConfig, ChannelRealization
from .csit import DistributedCsit, ScalingAllocation
from .errors import ConfigError, NumericalError

logger = logging.getLogger(__name__)

COND_LIMIT = 1e12
APZF_COEFF_LIMIT = 1e6
APZF_BACKOFF_DB = 10.0
PASSIVE_COEFF = 1.0

FALLBACK = "fallback"
REGULARIZED = "regularized"
POWER_CLIPPED = "power-clipped"


@dataclass(frozen=True)
class EffectivePrecoder:
    """Network precoder ``total_tx x streams`` assembled from per-TX rows.

    Row block ``j`` was computed by TX ``j``; ``power[j]`` is that TX's
    transmit power, never above ``snr``.
    """

    config: AntennaConfig
    matrix: np.ndarray
    power: Tuple[float, ...]
    snr: float
    flags: Tuple[str, ...] = ()

    def rows(self, j: int) -> np.ndarray:
        return self.matrix[self.config.tx_slice(j), :]


def _assemble(config: AntennaConfig, matrix: np.ndarray, P: float, flags: Sequence[str]) -> EffectivePrecoder:
    power = tuple(float(np.sum(np.abs(matrix[config.tx_slice(j), :]) ** 2)) for j in range(config.K))
    matrix.setflags(write=False)
    return EffectivePrecoder(config=config, matrix=matrix, power=power, snr=P, flags=tuple(sorted(set(flags))))


def _require_square(config: AntennaConfig) -> None:
    if config.total_tx != config.total_rx or config.d != config.n_rx:
        raise ConfigError("zero-forcing needs as many TX antennas as RX antennas and one stream per RX antenna")


def _zf_matrix(channel: np.ndarray, groups: Sequence[np.ndarray], P: float) -> np.ndarray:
    """Inverse with unit-norm columns, scaled so the strongest TX group transmits ``P``."""

    inverse = np.linalg.inv(channel)
    inverse = inverse / np.linalg.norm(inverse, axis=0, keepdims=True)
    peak = max(float(np.sum(np.abs(inverse[group, :]) ** 2)) for group in groups)
    return inverse * np.sqrt(P / peak)


def _tx_groups(config: AntennaConfig, users: Sequence[int]) -> List[np.ndarray]:
    groups = []
    offset = 0
    for k in users:
        groups.append(np.arange(offset, offset + config.n_tx[k]))
        offset += config.n_tx[k]
    return groups


def _indices(slices: Sequence[slice]) -> np.ndarray:
    return np.concatenate([np.arange(s.start, s.stop) for s in slices])


def zf_global(H: ChannelRealization, P: float) -> EffectivePrecoder:
    """Centralized ZF ``T ~ H^-1`` under per-TX power ``P``."""

    config = H.config
    _require_square(config)
    cond = np.linalg.cond(H.matrix)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise NumericalError(f"channel condition number {cond:.3e} exceeds {COND_LIMIT:.0e}")
    matrix = _zf_matrix(H.matrix, _tx_groups(config, range(config.K)), P)
    return _assemble(config, matrix, P, ())


def _matched_rows(config: AntennaConfig, direct: Optional[np.ndarray], j: int, P: float) -> np.ndarray:
    if direct is None or not np.any(direct):
        rows = np.eye(config.n_tx[j], config.n_rx[j], dtype=complex)
    else:
        rows = direct.conj().T
        norms = np.linalg.norm(rows, axis=0, keepdims=True)
        rows = np.divide(rows, norms, out=np.zeros_like(rows), where=norms > 0)
    return rows * np.sqrt(P / config.n_rx[j])


def _zf_rows_at_tx(csit: DistributedCsit, j: int, P: float) -> Tuple[np.ndarray, Optional[str]]:
    config = csit.config
    estimate = csit.estimate(j)
    rows = np.zeros((config.n_tx[j], config.total_rx), dtype=complex)
    neighborhood = [i for i in range(config.K) if csit.row_known(j, i)]
    own = config.rx_slice(j)
    if j not in neighborhood:
        rows[:, own] = _matched_rows(config, None, j, P)
        return rows, FALLBACK

    rx_index = _indices([config.rx_slice(i) for i in neighborhood])
    tx_index = _indices([config.tx_slice(k) for k in neighborhood])
    sub = estimate[np.ix_(rx_index, tx_index)]
    cond = np.linalg.cond(sub)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        rows[:, own] = _matched_rows(config, csit.block(j, j, j), j, P)
        return rows, FALLBACK

    local = _zf_matrix(sub, _tx_groups(config, neighborhood), P)
    start = sum(config.n_tx[k] for k in neighborhood if k < j)
    rows[:, rx_index] = local[start : start + config.n_tx[j], :]
    return rows, None


def zf_distributed(csit: DistributedCsit, P: float) -> EffectivePrecoder:
    """Conventional distributed ZF: every TX inverts its own estimate and keeps its own row.

    Unknown entries count as zero, so TX ``j`` inverts the principal
    sub-block of the users whose rows it knows and sends nothing for the
    other streams. A TX that does not know its own row, or whose sub-block
    is numerically singular, falls back to a matched filter on its direct
    channel and the result is flagged.
    """

    config = csit.config
    _require_square(config)
    matrix = np.zeros((config.total_tx, config.total_rx), dtype=complex)
    flags = []
    for j in range(config.K):
        rows, flag = _zf_rows_at_tx(csit, j, P)
        if flag:
            logger.debug("TX %d fell back to matched filtering", j + 1)
            flags.append(flag)
        matrix[config.tx_slice(j), :] = rows
    return _assemble(config, matrix, P, flags)


def apzf_roles(scaling: ScalingAllocation) -> Tuple[Tuple[int, int], ...]:
    """``(passive, active)`` TX pair per stream of a two-user network.

    Stream ``k`` is nulled at the other RX; the TX with the less accurate
    estimate of that RX's row is passive, ties going to the lower index.
    """

    if scaling.K != 2:
        raise ConfigError(f"active-passive ZF is defined for two users, got K={scaling.K}")
    roles = []
    for k in range(2):
        victim = 1 - k
        passive = 0 if scaling.alpha[(victim, 0)] <= scaling.alpha[(victim, 1)] else 1
        roles.append((passive, 1 - passive))
    return tuple(roles)


def _apzf_coefficients(estimate: np.ndarray, roles: Sequence[Tuple[int, int]]) -> Tuple[np.ndarray, List[str]]:
    """Unscaled 2x2 AP-ZF coefficients as computed from one estimate."""

    flags: List[str] = []
    coefficients = np.zeros((2, 2), dtype=complex)
    for k, (passive, active) in enumerate(roles):
        victim = 1 - k
        own = estimate[victim, active]
        other = estimate[victim, passive]
        coefficients[passive, k] = PASSIVE_COEFF
        if abs(own) < 1.0 / APZF_COEFF_LIMIT:
            value = -other * PASSIVE_COEFF * APZF_COEFF_LIMIT
            flags.append(REGULARIZED)
        else:
            value = -other * PASSIVE_COEFF / own
        if abs(value) > APZF_COEFF_LIMIT:
            value = value / abs(value) * APZF_COEFF_LIMIT
            flags.append(REGULARIZED)
        coefficients[active, k] = value
    return coefficients, flags


def apzf(
    csit: DistributedCsit, scaling: ScalingAllocation, P: float, backoff_db: float = APZF_BACKOFF_DB
) -> EffectivePrecoder:
    """Active-Passive ZF for two single-antenna users.

    Per stream, the passive TX sends the fixed coefficient 1 and the active
    TX solves the nulling equation at the unintended RX. Each TX builds the
    whole coefficient matrix from its own estimate and keeps its own row.
    The common scale is the CSI-independent constant
    ``sqrt(P / (K * 10**(backoff_db / 10)))`` unless the estimate says some
    row would then exceed ``P``; in that case the TX lowers the scale until
    the largest row power equals ``P`` and flags ``power-clipped``. TXs with
    identical estimates pick identical scales, so nulling stays exact.
    """

    config = csit.config
    if config.K != 2 or not config.is_single_antenna:
        raise ConfigError("active-passive ZF needs K=2 single-antenna users")
    roles = apzf_roles(scaling)
    nominal = np.sqrt(P / (config.K * 10.0 ** (backoff_db / 10.0)))
    flags: List[str] = []
    matrix = np.zeros((2, 2), dtype=complex)
    for j in range(2):
        coefficients, coefficient_flags = _apzf_coefficients(csit.estimate(j), roles)
        flags.extend(coefficient_flags)
        peak = float(np.max(np.sum(np.abs(coefficients) ** 2, axis=1)))
        scale = nominal
        if peak * nominal**2 > P:
            scale = np.sqrt(P / peak)
            flags.append(POWER_CLIPPED)
            logger.debug("TX %d lowers the AP-ZF scale to keep its peak row at P", j + 1)
        matrix[j, :] = coefficients[j, :] * scale
    return _assemble(config, matrix, P, flags)


def apzf_centralized(H: ChannelRealization, scaling: ScalingAllocation, P: float) -> EffectivePrecoder:
    """AP-ZF computed once from the true channel."""

    return apzf(DistributedCsit.exact(H), scaling, P)


def ia_precoder(config: AntennaConfig, precoders: Sequence[np.ndarray], P: float) -> EffectivePrecoder:
    """Block-diagonal precoder from per-TX IA precoders, ``P`` spread over each TX's streams."""

    matrix = np.zeros((config.total_tx, config.total_streams), dtype=complex)
    for j, precoder in enumerate(precoders):
        if precoder.shape != (config.n_tx[j], config.d[j]):
            raise ConfigError(f"TX {j + 1} precoder has shape {precoder.shape}")
        matrix[config.tx_slice(j), config.stream_slice(j)] = precoder * np.sqrt(P / config.d[j])
    return _assemble(config, matrix, P, ())


__all__ = [
    "APZF_BACKOFF_DB",
    "COND_LIMIT",
    "EffectivePrecoder",
    "FALLBACK",
    "POWER_CLIPPED",
    "REGULARIZED",
    "apzf",
    "apzf_centralized",
    "apzf_roles",
    "ia_precoder",
    "zf_distributed",
    "zf_global",
]
