"""Binary field snapshots.

Layout (all little-endian)::

    b"TNS2" | version u32 | n u32 | m u32 | time f64 | coefficients

The coefficients are the full ``(n,) + (2m+1,)*n`` box in C order, each as
``(re, im)`` float64 pairs.
"""

import struct

import numpy as np

from .spectral import FLAG_RTOL, VectorField, divergence_defect, lattice

MAGIC = b"TNS2"
VERSION = 1
_HEADER = struct.Struct("<4sIIId")


class SnapshotError(ValueError):
    pass


def encode_snapshot(u, t):
    head = _HEADER.pack(MAGIC, VERSION, u.n, u.m, float(t))
    return head + np.ascontiguousarray(u.coeffs, dtype="<c16").tobytes()


def save_snapshot(u, t, path):
    with open(path, "wb") as fh:
        fh.write(encode_snapshot(u, t))


def decode_snapshot(data, expected_n=None):
    if len(data) < _HEADER.size:
        raise SnapshotError("truncated snapshot header")
    magic, version, n, m, t = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SnapshotError(f"bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    if n < 1 or n > 8:
        raise SnapshotError(f"implausible dimension n={n}")
    if expected_n is not None and n != expected_n:
        raise SnapshotError(f"snapshot has n={n}, expected n={expected_n}")
    lat = lattice(n, m)
    count = n * (2 * m + 1) ** n
    body = data[_HEADER.size:]
    if len(body) != 16 * count:
        raise SnapshotError(f"snapshot body has {len(body)} bytes, expected {16 * count}")
    c = np.frombuffer(body, dtype="<c16").astype(np.complex128).reshape((n,) + lat.shape)
    try:
        probe = VectorField(lat, c)
    except ValueError as exc:
        raise SnapshotError(f"invalid snapshot field: {exc}") from None
    zero_mean = not np.any(c[(...,) + lat.origin])
    div_free = zero_mean and divergence_defect(lat, c) <= FLAG_RTOL
    return VectorField(lat, probe.coeffs, zero_mean=zero_mean, div_free=div_free), t


def load_snapshot(path, expected_n=None):
    """Read a snapshot; returns ``(field, time)``."""
    with open(path, "rb") as fh:
        return decode_snapshot(fh.read(), expected_n)
