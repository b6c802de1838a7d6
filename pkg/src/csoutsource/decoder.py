"""Cloud access control and user-side verification / recovery."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import kernels
from .encoder import AccessPassword, MacCode, gen_access_password, gen_mac
from .errors import CSError, InvalidDimensionError, InvalidParameterError
from .keymat import DEFAULT_LEVELS, build_keyed_basis, public_basis

DEFAULT_TAU = 0.125


@dataclass(frozen=True)
class AccessDecision:
    granted: bool
    reason: str

    def __post_init__(self):
        if self.reason not in ("match", "mismatch", "malformed"):
            raise ValueError(f"unknown reason {self.reason!r}")
        if self.granted != (self.reason == "match"):
            raise ValueError("granted must coincide with reason == 'match'")

    def to_json(self) -> str:
        return json.dumps({"record": "access", "granted": self.granted,
                           "reason": self.reason}, sort_keys=True)


@dataclass(frozen=True)
class IntegrityReport:
    ber: float
    verdict: str
    tau: float
    m: int = 0

    def to_json(self) -> str:
        return json.dumps({"record": "integrity", "ber": self.ber, "verdict": self.verdict,
                           "tau": self.tau, "m": self.m}, sort_keys=True)

    @property
    def accepted(self) -> bool:
        return self.verdict == "accepted"


def _parse_submission(submitted, n: int) -> AccessPassword | None:
    try:
        if isinstance(submitted, AccessPassword):
            ap = submitted
        elif isinstance(submitted, str):
            ap = AccessPassword.from_hex(submitted)
        else:
            ap = AccessPassword(np.asarray(submitted))
    except (ValueError, TypeError, CSError):
        return None
    return ap if ap.n == n else None


def check_access(submitted, k3, N: int, n: int, production: bool = True) -> AccessDecision:
    """Regenerate the password from ``k3`` and compare bit for bit."""
    ap = _parse_submission(submitted, n)
    if ap is None:
        return AccessDecision(False, "malformed")
    expected = gen_access_password(k3, N, n, production)
    if np.array_equal(ap.bits, expected.bits):
        return AccessDecision(True, "match")
    return AccessDecision(False, "mismatch")


def verify_integrity(s_prime, mac: MacCode, A_mac, tau: float = DEFAULT_TAU) -> IntegrityReport:
    """Bit error rate between the shipped MAC and one recomputed from ``s_prime``."""
    A_mac = getattr(A_mac, "matrix", A_mac)
    s_prime = np.asarray(s_prime, dtype=np.float64)
    if A_mac.shape[1] != s_prime.shape[0] or A_mac.shape[0] != mac.m:
        raise InvalidDimensionError(
            f"MAC matrix {A_mac.shape}, coefficients {s_prime.shape}, MAC length {mac.m}")
    if not 0 <= tau <= 1:
        raise InvalidParameterError("tau must lie in [0, 1]")
    recomputed = gen_mac(A_mac @ s_prime)
    ber = kernels.hamming(mac.bits, recomputed.bits) / mac.m
    return IntegrityReport(ber, "accepted" if ber <= tau else "tampered", tau, mac.m)


def recover(s_prime, k1, k2, N: int, f: int = DEFAULT_LEVELS, basis: str = "dct") -> np.ndarray:
    """``x' = psi_k s'``. Does not re-verify ``s_prime``."""
    s_prime = np.asarray(s_prime, dtype=np.float64)
    if s_prime.shape[0] != N:
        raise InvalidDimensionError(f"coefficients have length {s_prime.shape[0]}, expected {N}")
    return build_keyed_basis(k1, k2, N, f, public_basis(N, basis)).apply(s_prime)
