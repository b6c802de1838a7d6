"""Derivation of the key-controlled and public matrices.

All secret structure comes from three independent 128-bit keys:

* ``k1`` drives the column permutation of the sparsifying basis,
* ``k2`` drives the nonzero scale diagonal,
* ``k3`` drives the Rademacher sign diagonal of the sensing matrix
  (and, through it, the access password).

The public basis is the orthonormal DCT-II, stored in synthesis form so
that a signal is ``x = psi @ s``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import InvalidDimensionError, InvalidParameterError
from .keystream import KeyStream, as_key, random_key

DEFAULT_LEVELS = 16
DEFAULT_MAC_SEED = 0x5EED_CAFE
SCALE_RANGE = (0.5, 2.0)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _check_dim(N: int) -> None:
    if int(N) != N or N < 2:
        raise InvalidDimensionError(f"dimension must be an integer >= 2, got {N}")


@dataclass(frozen=True)
class SecretKeys:
    k1: bytes
    k2: bytes
    k3: bytes

    def __post_init__(self):
        for name in ("k1", "k2", "k3"):
            object.__setattr__(self, name, as_key(getattr(self, name)))

    @classmethod
    def generate(cls, rng: np.random.Generator | None = None) -> "SecretKeys":
        return cls(random_key(rng), random_key(rng), random_key(rng))


@dataclass(frozen=True)
class SystemParams:
    """Dimensions shared by every party.

    ``N`` signal length, ``L`` block length (``M = N / L``, CR = 1/L),
    ``m`` MAC rows, ``f`` scale levels, ``n`` access-password bits.
    ``basis`` is ``"dct"`` in normal use; ``"identity"`` exists only so
    that unit tests can collapse the products by hand.
    """

    N: int = 256
    L: int = 2
    m: int = 16
    f: int = DEFAULT_LEVELS
    n: int = 128
    mac_seed: int = DEFAULT_MAC_SEED
    basis: str = "dct"
    production: bool = True

    @property
    def M(self) -> int:
        return self.N // self.L

    @property
    def cr(self) -> float:
        return 1.0 / self.L

    def validate(self) -> "SystemParams":
        _check_dim(self.N)
        if self.L < 1 or self.N % self.L:
            raise InvalidDimensionError(f"L={self.L} does not divide N={self.N}")
        if not 1 <= self.m < self.M:
            raise InvalidParameterError(
                f"MAC rows m={self.m} must satisfy 1 <= m < M={self.M}")
        if self.f < 2:
            raise InvalidParameterError(f"level count f={self.f} must be >= 2")
        if self.n < 1 or self.N % self.n:
            raise InvalidDimensionError(f"n={self.n} does not divide N={self.N}")
        if self.production and self.n < 128:
            raise InvalidParameterError("access password must be >= 128 bits")
        if self.basis not in ("dct", "identity"):
            raise InvalidParameterError(f"unknown basis {self.basis!r}")
        return self


# ---------------------------------------------------------------- basis


@lru_cache(maxsize=16)
def dct_basis(N: int) -> np.ndarray:
    """Orthonormal DCT-II synthesis matrix; column ``k`` is the k-th atom."""
    _check_dim(N)
    k = np.arange(N)[:, None]
    t = np.arange(N)[None, :]
    analysis = np.sqrt(2.0 / N) * np.cos(np.pi * (2 * t + 1) * k / (2 * N))
    analysis[0] /= np.sqrt(2.0)
    psi = analysis.T.copy()
    err = np.max(np.abs(psi @ psi.T - np.eye(N)))
    if err >= 1e-10:
        raise RuntimeError(f"DCT basis failed unitarity self-check ({err:.3e})")
    return _frozen(psi)


def public_basis(N: int, kind: str = "dct") -> np.ndarray:
    if kind == "dct":
        return dct_basis(N)
    if kind == "identity":
        return _frozen(np.eye(N))
    raise InvalidParameterError(f"unknown basis {kind!r}")


# ---------------------------------------------------------- key material


@dataclass(frozen=True)
class Permutation:
    """Column permutation ``P`` with ``(psi @ P)[:, j] == psi[:, mapping[j]]``."""

    mapping: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mapping, dtype=np.int64)
        if not np.array_equal(np.sort(m), np.arange(m.size)):
            raise InvalidParameterError("mapping is not a bijection")
        object.__setattr__(self, "mapping", _frozen(m.copy()))

    @property
    def N(self) -> int:
        return self.mapping.size

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self.mapping)
        inv[self.mapping] = np.arange(self.N)
        return Permutation(inv)

    def matrix(self) -> np.ndarray:
        P = np.zeros((self.N, self.N))
        P[self.mapping, np.arange(self.N)] = 1.0
        return P

    @classmethod
    def identity(cls, N: int) -> "Permutation":
        return cls(np.arange(N))


@dataclass(frozen=True)
class ScaleDiag:
    entries: np.ndarray
    levels: int

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.float64)
        if np.any(e == 0) or not np.all(np.isfinite(e)):
            raise InvalidParameterError("scale diagonal must be finite and nonzero")
        object.__setattr__(self, "entries", _frozen(e.copy()))

    @classmethod
    def identity(cls, N: int) -> "ScaleDiag":
        return cls(np.ones(N), 1)


@dataclass(frozen=True)
class SignDiag:
    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.int8)
        if not np.all(np.abs(e) == 1):
            raise InvalidParameterError("sign diagonal entries must be +1 or -1")
        object.__setattr__(self, "entries", _frozen(e.copy()))

    @property
    def bits(self) -> np.ndarray:
        """``w = (R + I) / 2`` as a 0/1 vector."""
        return ((self.entries.astype(np.int64) + 1) // 2).astype(np.uint8)

    @classmethod
    def all_positive(cls, N: int) -> "SignDiag":
        return cls(np.ones(N, dtype=np.int8))


def scale_levels(f: int) -> np.ndarray:
    lo, hi = SCALE_RANGE
    return np.geomspace(lo, hi, f)


def derive_permutation(k1, N: int) -> Permutation:
    """Keyed Fisher-Yates shuffle of ``range(N)``."""
    _check_dim(N)
    stream = KeyStream(k1, b"perm")
    draws = stream.below(np.arange(N, 1, -1))
    return Permutation(kernels.fisher_yates(draws))


def derive_scale_diag(k2, N: int, f: int = DEFAULT_LEVELS) -> ScaleDiag:
    _check_dim(N)
    if f < 2:
        raise InvalidParameterError(f"level count f={f} must be >= 2")
    stream = KeyStream(k2, b"scale")
    idx = stream.below(np.full(N, f))
    signs = 1.0 - 2.0 * stream.bits(N)
    return ScaleDiag(signs * scale_levels(f)[idx], f)


def derive_sign_diag(k3, N: int) -> SignDiag:
    _check_dim(N)
    bits = KeyStream(k3, b"sign").bits(N).astype(np.int8)
    return SignDiag(2 * bits - 1)


# --------------------------------------------------------------- matrices


@dataclass(frozen=True)
class BlockIdentity:
    rows: int
    cols: int
    block: int

    def matrix(self) -> np.ndarray:
        S = np.zeros((self.rows, self.cols))
        for i in range(self.rows):
            S[i, i * self.block:(i + 1) * self.block] = 1.0
        return S


def build_block_identity(N: int, L: int) -> BlockIdentity:
    if L < 1 or N < 1 or N % L:
        raise InvalidDimensionError(f"L={L} does not divide N={N}")
    return BlockIdentity(N // L, N, L)


@dataclass(frozen=True)
class SensingMatrix:
    matrix: np.ndarray
    N: int
    L: int

    @property
    def M(self) -> int:
        return self.matrix.shape[0]


def sensing_from_signs(signs: SignDiag, L: int, psi: np.ndarray) -> SensingMatrix:
    """``S @ diag(r) @ psi`` computed as block sums of sign-flipped rows."""
    N = signs.entries.size
    S = build_block_identity(N, L)
    mixed = signs.entries[:, None] * psi
    A = mixed.reshape(S.rows, L, N).sum(axis=1)
    return SensingMatrix(_frozen(A), N, L)


def build_sensing_matrix(k3, N: int, L: int, psi: np.ndarray | None = None) -> SensingMatrix:
    _check_dim(N)
    build_block_identity(N, L)
    if psi is None:
        psi = dct_basis(N)
    return sensing_from_signs(derive_sign_diag(k3, N), L, psi)


@dataclass(frozen=True)
class KeyedBasis:
    """``psi_k = psi @ P @ D`` together with its closed-form inverse."""

    psi: np.ndarray
    perm: Permutation
    scale: ScaleDiag
    matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "matrix",
                           _frozen(self.psi[:, self.perm.mapping] * self.scale.entries))

    @property
    def N(self) -> int:
        return self.psi.shape[0]

    def inverse(self) -> np.ndarray:
        """``D^-1 P^T psi^T``; valid because ``psi`` is unitary."""
        return self.psi.T[self.perm.mapping] / self.scale.entries[:, None]

    def apply_inverse(self, x: np.ndarray) -> np.ndarray:
        v = self.psi.T @ x
        scale = self.scale.entries if v.ndim == 1 else self.scale.entries[:, None]
        return v[self.perm.mapping] / scale

    def apply(self, s: np.ndarray) -> np.ndarray:
        return self.matrix @ s


def build_keyed_basis(k1, k2, N: int, f: int = DEFAULT_LEVELS,
                      psi: np.ndarray | None = None) -> KeyedBasis:
    if psi is None:
        psi = dct_basis(N)
    return KeyedBasis(psi, derive_permutation(k1, N), derive_scale_diag(k2, N, f))


@dataclass(frozen=True)
class MacMatrix:
    matrix: np.ndarray
    seed: int

    @property
    def m(self) -> int:
        return self.matrix.shape[0]


@lru_cache(maxsize=32)
def _mac_matrix_cached(N: int, m: int, seed: int, basis: str) -> np.ndarray:
    stream = KeyStream(seed, b"mac-public")
    phi = stream.normal(m * N).reshape(m, N)
    return _frozen(phi @ public_basis(N, basis))


def build_mac_matrix(N: int, m: int, public_seed: int = DEFAULT_MAC_SEED, L: int = 2,
                     basis: str = "dct") -> MacMatrix:
    """Public one-way hash matrix ``phi_mac @ psi`` with ``m < N / L`` rows."""
    _check_dim(N)
    build_block_identity(N, L)
    if m < 1:
        raise InvalidParameterError(f"MAC rows m={m} must be >= 1")
    if m >= N // L:
        raise InvalidParameterError(
            f"MAC rows m={m} must stay below M={N // L} to keep the hash matrix non-RIP")
    return MacMatrix(_mac_matrix_cached(N, m, int(public_seed), basis), int(public_seed))


# ------------------------------------------------------------- accounting


def log2_keyspace(N: int, f: int) -> dict:
    """Brute-force accounting for guessing ``(P, D, R)``."""
    perm_bits = math.lgamma(N + 1) / math.log(2)
    scale_bits = N * math.log2(f)
    sign_bits = float(N)
    return {
        "N": N,
        "f": f,
        "log2_pro_P": -perm_bits,
        "log2_pro_D": -scale_bits,
        "log2_pro_R": -sign_bits,
        "log2_keyspace": perm_bits + scale_bits + sign_bits,
    }


# --------------------------------------------------------------- bundle


@dataclass(frozen=True)
class KeyedMatrices:
    """Everything a full-knowledge party derives from keys and params."""

    params: SystemParams
    basis: KeyedBasis
    signs: SignDiag
    sensing: SensingMatrix
    mac: MacMatrix

    @classmethod
    def derive(cls, keys: SecretKeys, params: SystemParams) -> "KeyedMatrices":
        params.validate()
        psi = public_basis(params.N, params.basis)
        basis = build_keyed_basis(keys.k1, keys.k2, params.N, params.f, psi)
        signs = derive_sign_diag(keys.k3, params.N)
        return cls(params, basis, signs, sensing_from_signs(signs, params.L, psi),
                   build_mac_matrix(params.N, params.m, params.mac_seed, params.L,
                                    params.basis))

    @classmethod
    def from_parts(cls, params: SystemParams, perm: Permutation, scale: ScaleDiag,
                   signs: SignDiag) -> "KeyedMatrices":
        params.validate()
        psi = public_basis(params.N, params.basis)
        return cls(params, KeyedBasis(psi, perm, scale), signs,
                   sensing_from_signs(signs, params.L, psi),
                   build_mac_matrix(params.N, params.m, params.mac_seed, params.L,
                                    params.basis))
