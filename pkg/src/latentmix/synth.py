"""Seeded synthetic latents: pure noise, bias-plus-noise sets, region offsets.

Generators here are pure functions of their arguments including the seed, so
every experiment is reproducible and bisectable. The PRNG contract for this
package version:

* bit generator: numpy PCG64, seeded through ``numpy.random.SeedSequence``
  with entropy words ``(base_seed, stream_index)``;
* normal variates: numpy's ziggurat ``standard_normal``.

Distinct stream indices give statistically independent streams. Bit-exact
output is promised within one build of this package, not across numpy
versions or other implementations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import LatentSet, LatentShape, LatentTensor, WeightVector
from .interpolate import fix_norm, lerp, nin, slerp2

__all__ = [
    "SeedSpec",
    "Region",
    "BiasSpec",
    "NoBias",
    "GlobalConstant",
    "PerChannel",
    "RegionOffset",
    "sample_gaussian_latent",
    "make_biased_set",
    "apply_region_offset",
    "Toy2DPaths",
    "toy2d_paths",
    "TOY2D_DEFAULT_Z1",
    "TOY2D_DEFAULT_Z2",
]

_U64 = 2**64


@dataclass(frozen=True)
class SeedSpec:
    """Reproducibility handle: a base seed plus a stream index.

    The pair fully determines every generated value. Derived streams (set
    members, trials) advance ``stream_index``, so the base seed names the
    experiment and the stream index the draw within it.
    """

    base_seed: int
    stream_index: int = 0

    def __post_init__(self) -> None:
        for name in ("base_seed", "stream_index"):
            value = getattr(self, name)
            if not 0 <= int(value) < _U64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value!r}")

    def stream(self, offset: int) -> "SeedSpec":
        """The seed ``offset`` streams further along, wrapping at 2**64."""
        return SeedSpec(self.base_seed, (self.stream_index + offset) % _U64)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(
            np.random.SeedSequence(entropy=(self.base_seed, self.stream_index))
        )


@dataclass(frozen=True)
class Region:
    """Half-open rectangle [row_start, row_stop) x [col_start, col_stop)."""

    row_start: int
    row_stop: int
    col_start: int
    col_stop: int

    def __post_init__(self) -> None:
        if not (0 <= self.row_start < self.row_stop):
            raise ValueError(f"bad row range [{self.row_start}, {self.row_stop})")
        if not (0 <= self.col_start < self.col_stop):
            raise ValueError(f"bad column range [{self.col_start}, {self.col_stop})")

    def check_within(self, shape: LatentShape) -> None:
        if self.row_stop > shape.height or self.col_stop > shape.width:
            raise ValueError(
                f"region {self} exceeds spatial extent "
                f"({shape.height}, {shape.width})"
            )

    @property
    def area(self) -> int:
        return (self.row_stop - self.row_start) * (self.col_stop - self.col_start)


class BiasSpec:
    """Description of the deterministic component injected into synthetic latents."""

    def deterministic_tensor(self, shape: LatentShape) -> LatentTensor:
        """The injected deterministic part as a full latent."""
        raise NotImplementedError


@dataclass(frozen=True)
class NoBias(BiasSpec):
    """Pure noise; the deterministic part is zero."""

    def deterministic_tensor(self, shape: LatentShape) -> LatentTensor:
        return LatentTensor.zeros(shape)


@dataclass(frozen=True)
class GlobalConstant(BiasSpec):
    """One small constant added to every element."""

    value: float

    def deterministic_tensor(self, shape: LatentShape) -> LatentTensor:
        return LatentTensor.full(shape, self.value)


@dataclass(frozen=True)
class PerChannel(BiasSpec):
    """A distinct constant per feature channel."""

    values: tuple[float, ...]

    def deterministic_tensor(self, shape: LatentShape) -> LatentTensor:
        if len(self.values) != shape.channels:
            raise ValueError(
                f"got {len(self.values)} channel offsets for {shape.channels} channels"
            )
        data = np.broadcast_to(
            np.asarray(self.values, dtype=np.float64)[:, None, None], shape.as_tuple()
        ).copy()
        return LatentTensor(data)


@dataclass(frozen=True)
class RegionOffset(BiasSpec):
    """Per-channel constants added only inside a spatial rectangle."""

    region: Region
    offsets: tuple[float, ...]

    def deterministic_tensor(self, shape: LatentShape) -> LatentTensor:
        if len(self.offsets) != shape.channels:
            raise ValueError(
                f"got {len(self.offsets)} channel offsets for {shape.channels} channels"
            )
        self.region.check_within(shape)
        data = np.zeros(shape.as_tuple())
        r = self.region
        data[:, r.row_start : r.row_stop, r.col_start : r.col_stop] = np.asarray(
            self.offsets, dtype=np.float64
        )[:, None, None]
        return LatentTensor(data)


def sample_gaussian_latent(shape: LatentShape, seed: SeedSpec) -> LatentTensor:
    """One latent of i.i.d. standard-normal draws, fully determined by the seed."""
    data = seed.rng().standard_normal(shape.as_tuple())
    return LatentTensor(data)


def make_biased_set(
    n: int, shape: LatentShape, bias: BiasSpec, seed: SeedSpec
) -> LatentSet:
    """N latents d + e_n with i.i.d. noise and a common deterministic part.

    Member ``i`` draws its noise from ``seed.stream(i)``, so sets of
    different N generated from the same seed share a prefix, and with
    ``NoBias`` the members equal plain ``sample_gaussian_latent`` draws.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    det = bias.deterministic_tensor(shape).data
    stacked = np.empty((n, *shape.as_tuple()))
    for i in range(n):
        stacked[i] = seed.stream(i).rng().standard_normal(shape.as_tuple())
    if det.any():
        stacked += det
    return LatentSet.from_array(stacked)


def apply_region_offset(z: LatentTensor, bias: RegionOffset) -> LatentTensor:
    """Add the region offsets to ``z``; elements outside the region are untouched.

    Balanced offsets (channel totals cancelling, e.g. -b on one channel and
    +b on another) leave the global mean unchanged up to float rounding.
    """
    bias.region.check_within(z.shape)
    if len(bias.offsets) != z.shape.channels:
        raise ValueError(
            f"got {len(bias.offsets)} channel offsets for {z.shape.channels} channels"
        )
    data = z.data.copy()
    r = bias.region
    data[:, r.row_start : r.row_stop, r.col_start : r.col_stop] += np.asarray(
        bias.offsets, dtype=np.float64
    )[:, None, None]
    return LatentTensor(data)


# Default toy inputs: both on the nominal-norm circle (sqrt(L) = sqrt(2) at
# L = 2), 90 degrees apart, matching the documented CLI defaults.
TOY2D_DEFAULT_Z1 = (math.sqrt(2.0), 0.0)
TOY2D_DEFAULT_Z2 = (0.0, math.sqrt(2.0))

_TOY_METHODS = ("lin", "fix", "slerp", "nin")


@dataclass(frozen=True)
class Toy2DPaths:
    """Interpolation paths of the four operators in a 2-dimensional latent space.

    ``points[method]`` is a (steps, 2) array; row k is the path point at
    ``ts[k]``. Methods are keyed ``lin``, ``fix``, ``slerp``, ``nin``.
    """

    ts: np.ndarray
    points: dict[str, np.ndarray]


def toy2d_paths(
    z1: tuple[float, float], z2: tuple[float, float], steps: int
) -> Toy2DPaths:
    """Evaluate all four interpolators on a uniform t-grid between two 2-vectors.

    The two points are treated as latents of shape (1, 1, 2), so the nominal
    norm is sqrt(2) and the fixed-normalization path lies on that circle.
    """
    if steps < 2:
        raise ValueError(f"steps must be >= 2, got {steps}")
    p1 = LatentTensor(np.asarray(z1, dtype=np.float64).reshape(1, 1, 2))
    p2 = LatentTensor(np.asarray(z2, dtype=np.float64).reshape(1, 1, 2))
    pair = LatentSet([p1, p2])
    ts = np.linspace(0.0, 1.0, steps)
    out = {name: np.empty((steps, 2)) for name in _TOY_METHODS}
    for k, t in enumerate(ts):
        weights = WeightVector([1.0 - t, t])
        out["lin"][k] = lerp(pair, weights).data.ravel()
        out["fix"][k] = fix_norm(pair, weights).data.ravel()
        out["slerp"][k] = slerp2(p1, p2, float(t)).data.ravel()
        out["nin"][k] = nin(pair, weights).data.ravel()
    for arr in out.values():
        arr.flags.writeable = False
    ts.flags.writeable = False
    return Toy2DPaths(ts=ts, points=out)
