"""Keyed deterministic bit generator.

Every key-controlled quantity in the package is drawn from a
:class:`KeyStream`: keyed BLAKE2b run in counter mode, with a purpose
label mixed into the personalization field so that the same key never
produces correlated streams for two different matrices.
"""
from __future__ import annotations

import hashlib
import math
import secrets

import numpy as np

KEY_BYTES = 16
_BLOCK = 64


def as_key(key: bytes | int | str) -> bytes:
    """Normalize a 128-bit key given as bytes, int or hex string."""
    if isinstance(key, (bytes, bytearray)):
        out = bytes(key)
    elif isinstance(key, int):
        if not 0 <= key < 1 << 128:
            raise ValueError("integer key must lie in [0, 2**128)")
        out = key.to_bytes(KEY_BYTES, "big")
    elif isinstance(key, str):
        try:
            out = bytes.fromhex(key.strip())
        except ValueError as exc:
            raise ValueError(f"key is not valid hex: {key!r}") from exc
    else:
        raise TypeError(f"unsupported key type {type(key).__name__}")
    if len(out) != KEY_BYTES:
        raise ValueError(f"key must be exactly 128 bits, got {8 * len(out)}")
    return out


def random_key(rng: np.random.Generator | None = None) -> bytes:
    if rng is None:
        return secrets.token_bytes(KEY_BYTES)
    return rng.bytes(KEY_BYTES)


class KeyStream:
    """Counter-mode byte stream ``BLAKE2b_key(label, counter)``.

    The stream is a pure function of ``(key, label)``; successive calls
    continue where the previous one stopped.
    """

    def __init__(self, key: bytes | int | str, label: bytes | str = b""):
        self.key = as_key(key)
        if isinstance(label, str):
            label = label.encode()
        if len(label) > 16:
            raise ValueError("label is limited to 16 bytes")
        self.label = label
        self._counter = 0
        self._buffer = b""

    def _block(self, counter: int) -> bytes:
        h = hashlib.blake2b(counter.to_bytes(16, "little"), key=self.key,
                            person=self.label.ljust(16, b"\0"), digest_size=_BLOCK)
        return h.digest()

    def read(self, nbytes: int) -> bytes:
        chunks = [self._buffer]
        have = len(self._buffer)
        while have < nbytes:
            block = self._block(self._counter)
            self._counter += 1
            chunks.append(block)
            have += _BLOCK
        data = b"".join(chunks)
        self._buffer = data[nbytes:]
        return data[:nbytes]

    def uint64(self, count: int) -> np.ndarray:
        return np.frombuffer(self.read(8 * count), dtype="<u8").astype(np.uint64)

    def bits(self, count: int) -> np.ndarray:
        raw = np.frombuffer(self.read(math.ceil(count / 8)), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[:count]

    def uniform(self, count: int) -> np.ndarray:
        """Doubles in the open interval (0, 1) with 53 bits of resolution."""
        top = (self.uint64(count) >> np.uint64(11)).astype(np.float64)
        return (top + 0.5) * 2.0**-53

    def below(self, bounds) -> np.ndarray:
        """One integer in ``[0, b)`` per entry of ``bounds``.

        Uses ``floor(u * b)`` on 53-bit uniforms; the bias is below
        ``b / 2**53`` and irrelevant at the dimensions handled here.
        """
        bounds = np.asarray(bounds, dtype=np.int64)
        u = self.uniform(bounds.size)
        out = np.floor(u * bounds).astype(np.int64)
        return np.minimum(out, bounds - 1)

    def normal(self, count: int) -> np.ndarray:
        """Standard normals by Box-Muller; platform independent."""
        half = (count + 1) // 2
        u1 = self.uniform(half)
        u2 = self.uniform(half)
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * np.pi * u2
        z = np.empty(2 * half)
        z[0::2] = radius * np.cos(angle)
        z[1::2] = radius * np.sin(angle)
        return z[:count]
