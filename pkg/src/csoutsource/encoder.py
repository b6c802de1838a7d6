"""Sensor side: joint acquisition, MAC bits and the access password."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidDimensionError, InvalidParameterError
from .keymat import KeyedMatrices, SecretKeys, SignDiag, SystemParams, derive_sign_diag


@dataclass(frozen=True)
class MeasurementPackage:
    """What the sensor ships to the cloud. Never carries keys or MAC data."""

    y: np.ndarray
    N: int
    L: int
    m: int
    package_id: int = 0

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.float64)
        if y.ndim != 1 or y.size * self.L != self.N:
            raise InvalidDimensionError(
                f"measurement length {y.size} inconsistent with N={self.N}, L={self.L}")
        if not 0 <= self.package_id < 1 << 64:
            raise InvalidParameterError("package id must fit in 64 bits")
        y = y.copy()
        y.setflags(write=False)
        object.__setattr__(self, "y", y)

    @property
    def M(self) -> int:
        return self.y.size


@dataclass(frozen=True)
class MacCode:
    bits: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bits, dtype=np.uint8)
        if b.ndim != 1 or np.any(b > 1):
            raise InvalidParameterError("MAC bits must be a 0/1 vector")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    @property
    def m(self) -> int:
        return self.bits.size


@dataclass(frozen=True)
class AccessPassword:
    bits: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bits, dtype=np.uint8)
        if b.ndim != 1 or np.any(b > 1):
            raise InvalidParameterError("access password bits must be a 0/1 vector")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    @property
    def n(self) -> int:
        return self.bits.size

    def hex(self) -> str:
        """Uppercase hex, most significant bit first; needs ``n % 4 == 0``."""
        if self.n % 4:
            raise InvalidParameterError("hex rendering needs n divisible by 4")
        nibbles = self.bits.reshape(-1, 4) @ np.array([8, 4, 2, 1])
        return "".join("0123456789ABCDEF"[v] for v in nibbles)

    @classmethod
    def from_hex(cls, text: str) -> "AccessPassword":
        text = "".join(text.split())
        values = [int(c, 16) for c in text]
        bits = [(v >> shift) & 1 for v in values for shift in (3, 2, 1, 0)]
        return cls(np.array(bits, dtype=np.uint8))

    def __eq__(self, other):
        return isinstance(other, AccessPassword) and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash(self.bits.tobytes())


def acquire(x, keys: SecretKeys | None, params: SystemParams, package_id: int = 0,
            matrices: KeyedMatrices | None = None):
    """Sample, compress, encrypt and hash in one stacked projection.

    Returns ``(package, y_mac)``; ``y_mac`` stays with the sensor and only
    its sign bits leave, through :func:`gen_mac`.
    """
    if matrices is None:
        if keys is None:
            raise InvalidParameterError("either keys or matrices must be given")
        matrices = KeyedMatrices.derive(keys, params)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (params.N,):
        raise InvalidDimensionError(f"signal shape {x.shape}, expected ({params.N},)")
    if not np.all(np.isfinite(x)):
        raise InvalidParameterError("signal contains non-finite samples")
    s = matrices.basis.apply_inverse(x)
    stacked = np.vstack([matrices.sensing.matrix, matrices.mac.matrix])
    out = stacked @ s
    M = matrices.sensing.M
    package = MeasurementPackage(out[:M], params.N, params.L, params.m, package_id)
    return package, out[M:].copy()


def gen_mac(mac_measurements) -> MacCode:
    """Sign bits of the hash measurements; zero counts as positive."""
    v = np.asarray(mac_measurements, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise InvalidParameterError("MAC measurements contain non-finite entries")
    return MacCode((v >= 0).astype(np.uint8))


def ap_chains(w, n: int):
    """``(p, q, AP)`` for the bit vector ``w`` split into ``n`` blocks.

    ``p`` accumulates block parities front to back, ``q`` back to front.
    """
    w = np.asarray(w, dtype=np.uint8)
    if n < 1 or w.size % n:
        raise InvalidDimensionError(f"n={n} does not divide N={w.size}")
    return kernels.xor_chains(w, n)


def access_password_from_signs(signs: SignDiag, n: int) -> AccessPassword:
    return AccessPassword(ap_chains(signs.bits, n)[2])


def gen_access_password(k3, N: int, n: int, production: bool = True) -> AccessPassword:
    if n < 1 or N % n:
        raise InvalidDimensionError(f"n={n} does not divide N={N}")
    if production and n < 128:
        raise InvalidParameterError("access password must be >= 128 bits")
    return access_password_from_signs(derive_sign_diag(k3, N), n)
