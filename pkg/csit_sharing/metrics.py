"""Achievable rates and DoF estimates."""
from __future__ import annotations

from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .channel import ChannelRealization
from .errors import ConfigError
from .precoding import EffectivePrecoder
from .results import ResultTable
from .utils import least_eigvecs

NOISE_POWER = 1.0


def _stream_owner(config, streams: int) -> np.ndarray:
    if streams == config.total_streams:
        return np.repeat(np.arange(config.K), config.d)
    if streams == config.total_rx:
        return np.repeat(np.arange(config.K), config.n_rx)
    raise ConfigError(f"precoder has {streams} streams, expected {config.total_streams}")


def user_rates(
    H: ChannelRealization,
    T_eff: Union[EffectivePrecoder, np.ndarray],
    noise_power: float = NOISE_POWER,
    filters: Optional[Sequence[np.ndarray]] = None,
) -> np.ndarray:
    """Per-user rates in bits/s/Hz, residual interference treated as noise.

    RXs with more antennas than streams apply ``filters[i]``; without
    filters they null the strongest interference directions they observe.
    """

    config = H.config
    matrix = T_eff.matrix if isinstance(T_eff, EffectivePrecoder) else np.asarray(T_eff, dtype=complex)
    if matrix.shape[0] != config.total_tx:
        raise ConfigError(f"precoder has {matrix.shape[0]} rows, expected {config.total_tx}")
    owner = _stream_owner(config, matrix.shape[1])
    gains = H.matrix @ matrix
    rates = np.zeros(config.K)
    for i in range(config.K):
        received = gains[config.rx_slice(i), :]
        own = np.flatnonzero(owner == i)
        if filters is not None:
            g = filters[i]
        elif received.shape[0] == own.size:
            g = np.eye(own.size, dtype=complex)
        else:
            others = received[:, owner != i]
            g = least_eigvecs(others @ others.conj().T, own.size)
        filtered = g.conj().T @ received
        for position, stream in enumerate(own):
            signal = abs(filtered[position, stream]) ** 2
            interference = float(np.sum(np.abs(filtered[position, :]) ** 2)) - signal
            noise = noise_power * float(np.linalg.norm(g[:, position]) ** 2)
            rates[i] += np.log2(1.0 + signal / (noise + interference))
    return rates


def _window(table: ResultTable, window: Tuple[float, float]) -> Tuple[np.ndarray, list]:
    low, high = window
    rows = [row for row in table.rows if low <= row.snr_db <= high]
    if len(rows) < 2:
        raise ConfigError(f"DoF window {low}..{high} dB holds {len(rows)} grid points, at least 2 are needed")
    log_p = np.array([row.snr_db / (10.0 * np.log10(2.0)) for row in rows])
    return log_p, rows


def dof_slope(table: ResultTable, window: Tuple[float, float]) -> np.ndarray:
    """Least-squares slope of each user's mean rate against ``log2 P`` over ``window`` (dB)."""

    log_p, rows = _window(table, window)
    rates = np.array([row.user_rates for row in rows])
    return np.polyfit(log_p, rates, 1)[0]


def sum_dof_slope(table: ResultTable, window: Tuple[float, float]) -> float:
    log_p, rows = _window(table, window)
    return float(np.polyfit(log_p, [row.sum_rate_mean for row in rows], 1)[0])


__all__ = ["NOISE_POWER", "dof_slope", "sum_dof_slope", "user_rates"]
