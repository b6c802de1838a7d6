"""Basis application and mutual coherence."""
from __future__ import annotations

import numpy as np

from . import kernels
from .errors import DegenerateInputError, InvalidDimensionError
from .keymat import KeyedBasis


def _as_vector(v, N: int, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape[0] != N:
        raise InvalidDimensionError(f"{name} has length {v.shape[0]}, expected {N}")
    if not np.all(np.isfinite(v)):
        raise InvalidDimensionError(f"{name} contains non-finite entries")
    return v


def sparsify(x, keyed_basis: KeyedBasis) -> np.ndarray:
    """Coefficients ``s = psi_k^-1 x``; this is the basis-level encryption of ``x``.

    ``x`` may be a vector or an ``N x C`` matrix of column signals.
    """
    x = _as_vector(x, keyed_basis.N, "signal")
    return keyed_basis.apply_inverse(x)


def desparsify(s, keyed_basis: KeyedBasis) -> np.ndarray:
    s = _as_vector(s, keyed_basis.N, "coefficient vector")
    return keyed_basis.apply(s)


def coherence(U) -> float:
    """Largest normalized inner product between two distinct columns of ``U``."""
    U = np.asarray(U, dtype=np.float64)
    if U.ndim != 2 or U.shape[1] < 2:
        raise InvalidDimensionError("coherence needs a matrix with at least 2 columns")
    norms = np.linalg.norm(U, axis=0)
    if np.any(norms == 0):
        zero = np.flatnonzero(norms == 0).tolist()
        raise DegenerateInputError(f"zero column(s) {zero}")
    cols = (U / norms).T
    return min(1.0, kernels.max_pair_coherence(cols))
