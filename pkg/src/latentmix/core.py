"""Value types and elementary reductions for diffusion-latent math.

A latent is a C x H x W block of real values (a noisy diffusion latent at
the terminal timestep). This module defines the immutable value types shared
by the whole package -- shapes, latents, weight vectors, ordered latent sets
-- together with the elementary reductions (Euclidean norm, channel means,
global mean) every other module builds on.

All arithmetic is float64. Reductions go through numpy's pairwise summation
rather than BLAS so results are deterministic and independent of thread
count. Shape mismatches are hard errors; nothing broadcasts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "ShapeMismatchError",
    "LatentShape",
    "LatentTensor",
    "WeightVector",
    "LatentSet",
    "norm",
    "channel_means",
    "global_mean",
    "WEIGHT_SUM_TOL",
]

# Weight vectors must sum to 1 within this absolute tolerance.
WEIGHT_SUM_TOL = 1e-9


class ShapeMismatchError(ValueError):
    """Latents of incompatible shapes were combined."""


@dataclass(frozen=True)
class LatentShape:
    """Dimensions of a latent: C channels, H rows, W columns.

    Attributes:
        channels: Number of feature channels (4 for SD 1.5-style latents,
            16 for SD 3.5-style latents).
        height: Spatial rows.
        width: Spatial columns.
    """

    channels: int
    height: int
    width: int

    def __post_init__(self) -> None:
        for name in ("channels", "height", "width"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise TypeError(f"{name} must be an integer, got {value!r}")
            if value < 1:
                raise ValueError(f"{name} must be >= 1, got {value}")

    @property
    def size(self) -> int:
        """Total dimensionality C*H*W."""
        return self.channels * self.height * self.width

    @property
    def nominal_norm(self) -> float:
        """sqrt(C*H*W), the norm around which standard-normal latents concentrate."""
        return math.sqrt(self.size)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.channels, self.height, self.width)


class LatentTensor:
    """Immutable C x H x W latent with finite float64 entries.

    The backing array is C-contiguous (channel, row, column) and marked
    read-only, so tensors can be shared freely across threads.
    """

    __slots__ = ("_data",)

    def __init__(self, data: np.ndarray | Sequence) -> None:
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim != 3:
            raise ValueError(f"latent data must be 3-dimensional, got shape {arr.shape}")
        if min(arr.shape) < 1:
            raise ValueError(f"latent dimensions must be >= 1, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("latent data contains non-finite values")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        self._data = arr

    @classmethod
    def zeros(cls, shape: LatentShape) -> "LatentTensor":
        return cls(np.zeros(shape.as_tuple()))

    @classmethod
    def full(cls, shape: LatentShape, value: float) -> "LatentTensor":
        return cls(np.full(shape.as_tuple(), float(value)))

    @property
    def data(self) -> np.ndarray:
        """Read-only (C, H, W) float64 array."""
        return self._data

    @property
    def shape(self) -> LatentShape:
        return LatentShape(*self._data.shape)

    def __add__(self, other: "LatentTensor") -> "LatentTensor":
        _check_same_shape(self, other)
        return LatentTensor(self._data + other._data)

    def __sub__(self, other: "LatentTensor") -> "LatentTensor":
        _check_same_shape(self, other)
        return LatentTensor(self._data - other._data)

    def __mul__(self, scalar: float) -> "LatentTensor":
        return LatentTensor(self._data * float(scalar))

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LatentTensor):
            return NotImplemented
        return self._data.shape == other._data.shape and bool(
            np.array_equal(self._data, other._data)
        )

    __hash__ = None  # array-valued equality; hashing would need a content digest

    def __repr__(self) -> str:
        c, h, w = self._data.shape
        return f"LatentTensor(shape=({c}, {h}, {w}))"


def _check_same_shape(a: LatentTensor, b: LatentTensor) -> None:
    if a.data.shape != b.data.shape:
        raise ShapeMismatchError(
            f"incompatible latent shapes {a.data.shape} and {b.data.shape}"
        )


class WeightVector:
    """N nonnegative mixing weights that sum to one.

    Zero weights are admitted (vertex weights such as (1, 0, ..., 0) are the
    canonical probe for the input-reproduction property), but the sum must be
    1 within ``WEIGHT_SUM_TOL`` and at least one weight must be positive.
    """

    __slots__ = ("_values",)

    def __init__(self, weights: np.ndarray | Sequence[float]) -> None:
        arr = np.asarray(weights, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError(f"weights must be 1-dimensional, got shape {arr.shape}")
        if arr.size < 1:
            raise ValueError("at least one weight is required")
        if not np.isfinite(arr).all():
            raise ValueError("weights contain non-finite values")
        if (arr < 0.0).any():
            raise ValueError("weights must be nonnegative")
        total = float(np.sum(arr))
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"weights must sum to 1 (got {total!r})")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        self._values = arr

    @classmethod
    def uniform(cls, n: int) -> "WeightVector":
        """Equal weights 1/n, the centroid weighting."""
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def vertex(cls, n: int, index: int) -> "WeightVector":
        """Weight 1 on member ``index``, 0 elsewhere."""
        if not 0 <= index < n:
            raise ValueError(f"index {index} out of range for {n} weights")
        values = np.zeros(n)
        values[index] = 1.0
        return cls(values)

    @property
    def values(self) -> np.ndarray:
        return self._values

    def __len__(self) -> int:
        return self._values.size

    def __iter__(self) -> Iterator[float]:
        return iter(self._values)

    def __repr__(self) -> str:
        return f"WeightVector({self._values.tolist()!r})"


class LatentSet:
    """Ordered collection of N >= 1 latents sharing one shape."""

    __slots__ = ("_members", "_stacked")

    def __init__(self, members: Iterable[LatentTensor]) -> None:
        members = tuple(members)
        if not members:
            raise ValueError("a latent set needs at least one member")
        first = members[0]
        if not isinstance(first, LatentTensor):
            raise TypeError("members must be LatentTensor instances")
        for m in members[1:]:
            if not isinstance(m, LatentTensor):
                raise TypeError("members must be LatentTensor instances")
            _check_same_shape(first, m)
        self._members = members
        self._stacked: np.ndarray | None = None

    @classmethod
    def from_array(cls, stacked: np.ndarray) -> "LatentSet":
        """Build a set from an (N, C, H, W) array without copying per member."""
        arr = np.ascontiguousarray(np.asarray(stacked, dtype=np.float64))
        if arr.ndim != 4:
            raise ValueError(f"expected a 4-dimensional array, got shape {arr.shape}")
        arr.flags.writeable = False
        members = tuple(LatentTensor(arr[i]) for i in range(arr.shape[0]))
        out = cls(members)
        out._stacked = arr
        return out

    @property
    def members(self) -> tuple[LatentTensor, ...]:
        return self._members

    @property
    def shape(self) -> LatentShape:
        return self._members[0].shape

    def stacked(self) -> np.ndarray:
        """Read-only (N, C, H, W) view of all members, cached."""
        if self._stacked is None:
            arr = np.stack([m.data for m in self._members])
            arr.flags.writeable = False
            self._stacked = arr
        return self._stacked

    def prefix(self, n: int) -> "LatentSet":
        """The first ``n`` members as a new set."""
        if not 1 <= n <= len(self._members):
            raise ValueError(f"prefix length {n} out of range for {len(self._members)} members")
        return LatentSet(self._members[:n])

    def __len__(self) -> int:
        return len(self._members)

    def __iter__(self) -> Iterator[LatentTensor]:
        return iter(self._members)

    def __getitem__(self, index: int) -> LatentTensor:
        return self._members[index]

    def __repr__(self) -> str:
        return f"LatentSet(n={len(self._members)}, shape={self.shape.as_tuple()})"


def norm(z: LatentTensor) -> float:
    """Euclidean (Frobenius) norm over all C*H*W elements.

    Uses np.sum (pairwise reduction) instead of a BLAS dot so the result does
    not depend on the BLAS thread count.
    """
    return float(np.sqrt(np.sum(np.square(z.data))))


def channel_means(z: LatentTensor) -> np.ndarray:
    """Arithmetic mean of each channel's H*W values, as a length-C array."""
    return z.data.mean(axis=(1, 2))


def global_mean(z: LatentTensor) -> float:
    """Arithmetic mean over all C*H*W elements."""
    return float(z.data.mean())
