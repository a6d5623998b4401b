"""Shared numeric helpers for the simulation modules."""
from __future__ import annotations

from typing import Iterable, Tuple, Union

import numpy as np
from scipy.linalg import eigh

from .errors import ConfigError

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator, None]


def make_rng(seed: SeedLike, *keys: int) -> np.random.Generator:
    """Return a counter-based generator for ``seed`` and an optional key path.

    Draws keyed by ``keys`` are independent of each other and of the order in
    which they are requested, which is what keeps parallel Monte-Carlo runs
    identical to serial ones.
    """

    if isinstance(seed, np.random.Generator):
        if keys:
            raise ConfigError("per-entry generators need an int or SeedSequence seed, not a Generator")
        return seed
    if isinstance(seed, np.random.SeedSequence):
        sequence = np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + keys)
    else:
        sequence = np.random.SeedSequence(seed, spawn_key=keys)
    return np.random.Generator(np.random.Philox(sequence))


def crandn(rng: np.random.Generator, shape: Union[int, Tuple[int, ...]], variance: float = 1.0) -> np.ndarray:
    """Circularly-symmetric complex normal samples with the given variance."""

    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def db_to_linear(value_db: float) -> float:
    return float(10.0 ** (value_db / 10.0))


def least_eigvecs(matrix: np.ndarray, count: int) -> np.ndarray:
    """Orthonormal eigenvectors of the ``count`` smallest eigenvalues.

    ``matrix`` must be Hermitian. The columns are ordered from the smallest
    eigenvalue upwards.
    """

    size = matrix.shape[0]
    if count == 0:
        return np.zeros((size, 0), dtype=complex)
    _, vectors = eigh(matrix, subset_by_index=[0, count - 1])
    return np.asarray(vectors, dtype=complex)


def leading_right_singular_vectors(block: np.ndarray, count: int) -> np.ndarray:
    """Right singular vectors of ``block`` for its ``count`` largest singular values."""

    _, _, vh = np.linalg.svd(block)
    return vh[:count].conj().T.astype(complex)


def canonical_columns(size: int, count: int) -> np.ndarray:
    """The first ``count`` columns of the ``size`` x ``size`` identity."""

    return np.eye(size, count, dtype=complex)


def one_based(indices: Iterable[int]) -> Tuple[int, ...]:
    return tuple(index + 1 for index in indices)



__all__ = [
    "SeedLike",
    "canonical_columns",
    "crandn",
    "db_to_linear",
    "leading_right_singular_vectors",
    "least_eigvecs",
    "make_rng",
    "one_based",
]
