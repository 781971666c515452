"""LATF: a minimal little-endian binary container for latent sets.

Layout (all multi-byte fields little-endian):

    offset  size  field
    0       4     magic, the ASCII bytes "LATF"
    4       4     format version, uint32, currently 1
    8       4     dtype code, uint32: 1 = float32, 2 = float64
    12      4     C, uint32
    16      4     H, uint32
    20      4     W, uint32
    24      4     count, uint32, number of latents (>= 1)
    28      ...   payload: count * C * H * W values, row-major
                  (channel, row, column) per latent, latents concatenated

The format is deliberately tiny and language-neutral so external pipelines
can produce and consume it without this package. Reads are strict: magic and
version must match exactly, the payload length must agree with the header,
and non-finite values are rejected. Each failure mode has its own exception
carrying a byte offset where that is meaningful.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .core import LatentSet

__all__ = [
    "LatentFileError",
    "BadMagicError",
    "UnsupportedVersionError",
    "UnsupportedDtypeError",
    "InvalidHeaderError",
    "TruncatedPayloadError",
    "NonFiniteValueError",
    "write_latents",
    "read_latents",
    "MAGIC",
    "VERSION",
    "HEADER_SIZE",
]

MAGIC = b"LATF"
VERSION = 1
_HEADER = struct.Struct("<4sIIIIII")
HEADER_SIZE = _HEADER.size  # 28 bytes

_DTYPE_CODES = {"f32": 1, "f64": 2}
_CODE_DTYPES = {1: np.dtype("<f4"), 2: np.dtype("<f8")}


class LatentFileError(Exception):
    """Base error for malformed or unwritable latent files."""


class BadMagicError(LatentFileError):
    """The file does not start with the LATF magic bytes."""


class UnsupportedVersionError(LatentFileError):
    """The header declares a format version this reader does not handle."""


class UnsupportedDtypeError(LatentFileError):
    """The header declares an unknown dtype code."""


class InvalidHeaderError(LatentFileError):
    """Header fields are structurally invalid (zero dims or count, trailing data)."""


class TruncatedPayloadError(LatentFileError):
    """The file ends before the payload the header promises."""


class NonFiniteValueError(LatentFileError):
    """The payload contains NaN or infinity (or would after conversion)."""


def write_latents(path: str | Path, latents: LatentSet, dtype: str = "f64") -> None:
    """Write a latent set to ``path`` in LATF format.

    ``dtype`` is ``"f64"`` (lossless round-trip) or ``"f32"`` (single
    precision; values that overflow float32 are rejected rather than written
    as infinities).
    """
    if dtype not in _DTYPE_CODES:
        raise ValueError(f"dtype must be one of {sorted(_DTYPE_CODES)}, got {dtype!r}")
    code = _DTYPE_CODES[dtype]
    shape = latents.shape
    with np.errstate(over="ignore"):  # overflow is rejected explicitly below
        payload = latents.stacked().astype(_CODE_DTYPES[code])
    if not np.isfinite(payload).all():
        raise NonFiniteValueError(
            f"values are not representable as {dtype} (overflow to non-finite)"
        )
    header = _HEADER.pack(
        MAGIC, VERSION, code, shape.channels, shape.height, shape.width, len(latents)
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes())


def read_latents(path: str | Path) -> LatentSet:
    """Read and validate a LATF file, returning the latent set it contains."""
    blob = Path(path).read_bytes()
    if len(blob) < len(MAGIC) or blob[: len(MAGIC)] != MAGIC:
        raise BadMagicError(
            f"bad magic at byte 0: expected {MAGIC!r}, got {blob[:len(MAGIC)]!r}"
        )
    if len(blob) < HEADER_SIZE:
        raise TruncatedPayloadError(
            f"file ends at byte {len(blob)} inside the {HEADER_SIZE}-byte header"
        )
    _, version, code, c, h, w, count = _HEADER.unpack_from(blob, 0)
    if version != VERSION:
        raise UnsupportedVersionError(
            f"unsupported version {version} at byte 4 (expected {VERSION})"
        )
    if code not in _CODE_DTYPES:
        raise UnsupportedDtypeError(
            f"unknown dtype code {code} at byte 8 (expected one of {sorted(_CODE_DTYPES)})"
        )
    if min(c, h, w) < 1 or count < 1:
        raise InvalidHeaderError(
            f"dimensions and count must be >= 1, got C={c} H={h} W={w} count={count}"
        )
    dt = _CODE_DTYPES[code]
    expected = count * c * h * w * dt.itemsize
    available = len(blob) - HEADER_SIZE
    if available < expected:
        raise TruncatedPayloadError(
            f"payload truncated at byte {len(blob)}: header promises {expected} bytes, "
            f"found {available}"
        )
    if available > expected:
        raise InvalidHeaderError(
            f"{available - expected} trailing bytes after the declared payload"
        )
    values = np.frombuffer(blob, dtype=dt, count=count * c * h * w, offset=HEADER_SIZE)
    finite = np.isfinite(values)
    if not finite.all():
        index = int(np.argmin(finite))
        raise NonFiniteValueError(
            f"non-finite value at byte {HEADER_SIZE + index * dt.itemsize} "
            f"(element {index})"
        )
    stacked = values.astype(np.float64).reshape(count, c, h, w)
    return LatentSet.from_array(stacked)
