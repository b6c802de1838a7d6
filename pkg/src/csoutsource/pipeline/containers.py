"""Binary artifacts exchanged between sensor, cloud and user.

All integers and floats are little-endian.

Matrix (``CSVM``)::

    magic "CSVM" | version u16 | role u8 | rows u32 | cols u32 | rows*cols f64, row-major

Measurement package (``CSMP``), one record per signal, records concatenated::

    magic "CSMP" | version u16 | N u32 | L u32 | m u32 | package_id u64 | M u32 | M f64

Auth bundle (``CSAB``), one record per signal, records concatenated::

    magic "CSAB" | version u16 | n u32 | m u32 | AP ceil(n/8) bytes |
    MAC ceil(m/8) bytes | package_id u64

Bit fields are packed most significant bit first and zero padded.
Keys files are text (``k1 = <32 hex digits>``) and are never written next
to derived matrices.
"""
from __future__ import annotations

import enum
import struct
from pathlib import Path

import numpy as np

from ..encoder import AccessPassword, MacCode, MeasurementPackage
from ..errors import ContainerError
from ..keystream import as_key

VERSION = 1

_CSVM = struct.Struct("<4sHBII")
_CSMP = struct.Struct("<4sHIIIQI")
_CSAB = struct.Struct("<4sHII")
_U64 = struct.Struct("<Q")


class Role(enum.IntEnum):
    SENSING = 1
    KEYED_BASIS = 2
    MAC = 3
    BASIS = 4
    COEFFICIENTS = 5
    SIGNAL = 6


def pack_matrix(matrix: np.ndarray, role: Role) -> bytes:
    a = np.asarray(matrix, dtype="<f8")
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise ContainerError("only 1-D or 2-D arrays can be stored")
    return _CSVM.pack(b"CSVM", VERSION, int(role), *a.shape) + np.ascontiguousarray(a).tobytes()


def unpack_matrix(data: bytes, role: Role | None = None):
    if len(data) < _CSVM.size:
        raise ContainerError("truncated matrix header")
    magic, version, tag, rows, cols = _CSVM.unpack_from(data)
    if magic != b"CSVM":
        raise ContainerError(f"bad matrix magic {magic!r}")
    if version != VERSION:
        raise ContainerError(f"unsupported matrix version {version}")
    try:
        tag = Role(tag)
    except ValueError as exc:
        raise ContainerError(f"unknown role tag {tag}") from exc
    if role is not None and tag != role:
        raise ContainerError(f"expected role {role.name}, found {tag.name}")
    body = data[_CSVM.size:]
    if len(body) != 8 * rows * cols:
        raise ContainerError("matrix payload length does not match its dimensions")
    return np.frombuffer(body, dtype="<f8").reshape(rows, cols).astype(np.float64), tag


def write_matrix(path, matrix, role: Role) -> None:
    Path(path).write_bytes(pack_matrix(matrix, role))


def read_matrix(path, role: Role | None = None) -> np.ndarray:
    return unpack_matrix(Path(path).read_bytes(), role)[0]


def _pack_bits(bits) -> bytes:
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()


def _unpack_bits(raw: bytes, count: int) -> np.ndarray:
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8))[:count]


def pack_packages(packages) -> bytes:
    out = []
    for p in packages:
        out.append(_CSMP.pack(b"CSMP", VERSION, p.N, p.L, p.m, p.package_id, p.M))
        out.append(np.asarray(p.y, dtype="<f8").tobytes())
    return b"".join(out)


def unpack_packages(data: bytes) -> list:
    packages, pos = [], 0
    while pos < len(data):
        if len(data) - pos < _CSMP.size:
            raise ContainerError("truncated package header")
        magic, version, N, L, m, pid, M = _CSMP.unpack_from(data, pos)
        if magic != b"CSMP":
            raise ContainerError(f"bad package magic {magic!r}")
        if version != VERSION:
            raise ContainerError(f"unsupported package version {version}")
        pos += _CSMP.size
        end = pos + 8 * M
        if end > len(data):
            raise ContainerError("truncated package payload")
        y = np.frombuffer(data[pos:end], dtype="<f8").astype(np.float64)
        try:
            packages.append(MeasurementPackage(y, N, L, m, pid))
        except ValueError as exc:
            raise ContainerError(f"inconsistent package: {exc}") from exc
        pos = end
    return packages


def pack_auth(records) -> bytes:
    """``records`` is an iterable of ``(AccessPassword, MacCode, package_id)``."""
    out = []
    for ap, mac, pid in records:
        out.append(_CSAB.pack(b"CSAB", VERSION, ap.n, mac.m))
        out.append(_pack_bits(ap.bits))
        out.append(_pack_bits(mac.bits))
        out.append(_U64.pack(pid))
    return b"".join(out)


def unpack_auth(data: bytes) -> list:
    records, pos = [], 0
    while pos < len(data):
        if len(data) - pos < _CSAB.size:
            raise ContainerError("truncated auth bundle header")
        magic, version, n, m = _CSAB.unpack_from(data, pos)
        if magic != b"CSAB":
            raise ContainerError(f"bad auth bundle magic {magic!r}")
        if version != VERSION:
            raise ContainerError(f"unsupported auth bundle version {version}")
        pos += _CSAB.size
        ap_len, mac_len = -(-n // 8), -(-m // 8)
        end = pos + ap_len + mac_len + _U64.size
        if end > len(data):
            raise ContainerError("truncated auth bundle payload")
        ap = AccessPassword(_unpack_bits(data[pos:pos + ap_len], n))
        mac = MacCode(_unpack_bits(data[pos + ap_len:pos + ap_len + mac_len], m))
        (pid,) = _U64.unpack_from(data, pos + ap_len + mac_len)
        records.append((ap, mac, pid))
        pos = end
    return records


def write_packages(path, packages) -> None:
    Path(path).write_bytes(pack_packages(packages))


def read_packages(path) -> list:
    return unpack_packages(Path(path).read_bytes())


def write_auth(path, records) -> None:
    Path(path).write_bytes(pack_auth(records))


def read_auth(path) -> list:
    return unpack_auth(Path(path).read_bytes())


def dumps_keys(**keys) -> str:
    return "".join(f"{name} = {as_key(value).hex()}\n" for name, value in sorted(keys.items()))


def loads_keys(text: str) -> dict:
    keys = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, sep, value = line.partition("=")
        name = name.strip()
        if not sep or name not in ("k1", "k2", "k3"):
            raise ContainerError(f"keys line {lineno}: expected 'k1|k2|k3 = <hex>'")
        try:
            keys[name] = as_key(value.strip())
        except ValueError as exc:
            raise ContainerError(f"keys line {lineno}: {exc}") from exc
    return keys


def read_keys(path) -> dict:
    return loads_keys(Path(path).read_text())


def write_keys(path, **keys) -> None:
    Path(path).write_text(dumps_keys(**keys))


def read_signal(path, image_shape: tuple | None = None) -> np.ndarray:
    """Load signals as an ``N x C`` matrix (one column per signal).

    ``.raw`` is headerless 8-bit grayscale (square unless ``image_shape``
    is given), ``.pgm`` is binary P5, ``.csvm`` a stored matrix, anything
    else whitespace/comma separated text.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".raw":
        raw = np.frombuffer(path.read_bytes(), dtype=np.uint8)
        if image_shape is None:
            side = int(round(np.sqrt(raw.size)))
            if side * side != raw.size:
                raise ContainerError("raw image is not square; pass an explicit shape")
            image_shape = (side, side)
        if raw.size != image_shape[0] * image_shape[1]:
            raise ContainerError(f"raw image has {raw.size} bytes, shape {image_shape}")
        return raw.reshape(image_shape).astype(np.float64)
    if suffix == ".pgm":
        return _read_pgm(path.read_bytes())
    if suffix == ".csvm":
        return read_matrix(path)
    try:
        data = np.loadtxt(path, delimiter="," if suffix == ".csv" else None, ndmin=2)
    except ValueError as exc:
        raise ContainerError(f"cannot parse signal file {path}: {exc}") from exc
    if data.shape[0] == 1:
        data = data.T
    return data


def _read_pgm(data: bytes) -> np.ndarray:
    tokens, pos = [], 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos)
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise ContainerError("only binary (P5) PGM images are supported")
    width, height, maxval = (int(t) for t in tokens[1:])
    if maxval > 255:
        raise ContainerError("16-bit PGM images are not supported")
    body = data[pos + 1:pos + 1 + width * height]
    if len(body) != width * height:
        raise ContainerError("truncated PGM payload")
    return np.frombuffer(body, dtype=np.uint8).reshape(height, width).astype(np.float64)


def write_signal(path, signals: np.ndarray) -> None:
    """Text matrix, one column per signal, full double precision."""
    np.savetxt(path, np.atleast_2d(np.asarray(signals).T).T, fmt="%.17g")
