"""Standalone LATF reader/writer.

LATF is the little-endian container the interpolation toolkit consumes:
4-byte magic "LATF", then six uint32 fields (version = 1, dtype code with
1 = float32 / 2 = float64, C, H, W, count), then count * C * H * W values
row-major per latent. This module implements the format independently so
the exporter works without the toolkit installed; files it writes parse
with the toolkit's strict reader.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"LATF"
VERSION = 1
_HEADER = struct.Struct("<4sIIIIII")

_DTYPE_CODES = {"f32": np.dtype("<f4"), "f64": np.dtype("<f8")}


class LatentFileError(Exception):
    """Malformed latent file."""


def write_latents(path: str | Path, latents: np.ndarray, dtype: str = "f64") -> None:
    """Write an (N, C, H, W) array of finite values as a LATF file."""
    arr = np.asarray(latents, dtype=np.float64)
    if arr.ndim != 4 or min(arr.shape) < 1:
        raise ValueError(f"expected a non-empty (N, C, H, W) array, got shape {arr.shape}")
    if dtype not in _DTYPE_CODES:
        raise ValueError(f"dtype must be one of {sorted(_DTYPE_CODES)}, got {dtype!r}")
    payload = arr.astype(_DTYPE_CODES[dtype])
    if not np.isfinite(payload).all():
        raise ValueError("latent values must be finite (and representable in the chosen dtype)")
    n, c, h, w = arr.shape
    code = 1 if dtype == "f32" else 2
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, code, c, h, w, n))
        fh.write(payload.tobytes())


def read_latents(path: str | Path) -> np.ndarray:
    """Read a LATF file into an (N, C, H, W) float64 array."""
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise LatentFileError(f"file too short for a LATF header ({len(blob)} bytes)")
    magic, version, code, c, h, w, count = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise LatentFileError(f"bad magic {magic!r}")
    if version != VERSION:
        raise LatentFileError(f"unsupported version {version}")
    if code not in (1, 2):
        raise LatentFileError(f"unknown dtype code {code}")
    if min(c, h, w, count) < 1:
        raise LatentFileError("dimensions and count must be >= 1")
    dt = _DTYPE_CODES["f32" if code == 1 else "f64"]
    expected = count * c * h * w * dt.itemsize
    if len(blob) - _HEADER.size != expected:
        raise LatentFileError(
            f"payload is {len(blob) - _HEADER.size} bytes, header promises {expected}"
        )
    values = np.frombuffer(blob, dtype=dt, count=count * c * h * w, offset=_HEADER.size)
    if not np.isfinite(values).all():
        raise LatentFileError("payload contains non-finite values")
    return values.astype(np.float64).reshape(count, c, h, w)
