"""Interpolation operators for latent sets, with optional mean adjustment.

Four ways to mix N latents with weights w:

* ``lerp``      -- plain convex combination, sum_n w_n z_n.
* ``fix_norm``  -- lerp rescaled to the nominal norm sqrt(L).
* ``nin``       -- lerp rescaled to the weight-interpolated input norms
                   sum_n w_n ||z_n||; reproduces inputs at vertex weights.
* ``slerp2``    -- two-input spherical interpolation along the great circle.

On top of these, ``mean_adjusted_interp`` splits every input into a
deterministic part (a mean estimate) and a noise part, interpolates the
deterministic parts linearly, norm-adjusts only the noise parts, and adds the
results back together. Interpolating the mean linearly keeps any common
channel bias from being amplified by the norm rescaling, which otherwise
grows such biases by roughly sqrt(N) in centroid computations.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    LatentSet,
    LatentTensor,
    ShapeMismatchError,
    WeightVector,
    channel_means,
    global_mean,
    norm,
)

__all__ = [
    "NormMode",
    "MeanMode",
    "InterpMethod",
    "Decomposition",
    "DegenerateDirectionError",
    "AntipodalError",
    "lerp",
    "fix_norm",
    "nin",
    "slerp2",
    "decompose",
    "mean_adjusted_interp",
    "centroid",
    "DEGENERATE_REL_TOL",
    "NEAR_PARALLEL_SIN",
    "ANTIPODAL_MARGIN",
]

# Mixed direction is considered undefined when its norm falls at or below
# DEGENERATE_REL_TOL * sqrt(L). An explicit error, never a silent fallback:
# Monte Carlo harnesses must detect pathological draws, not mask them.
DEGENERATE_REL_TOL = 1e-12

# slerp2 falls back to lerp when sin(theta) is this small (the two formulas
# agree in the limit), unless theta is near pi, which is an error.
NEAR_PARALLEL_SIN = 1e-6
ANTIPODAL_MARGIN = 1e-6


class DegenerateDirectionError(ArithmeticError):
    """The weighted sum has (near-)zero norm, so its direction is undefined."""


class AntipodalError(ArithmeticError):
    """Spherical interpolation between opposite directions has no unique path."""


class NormMode(enum.Enum):
    """How the norm of an interpolated latent is set."""

    LINEAR = "lin"  # leave the convex combination as-is
    FIXED = "fix"  # rescale to the nominal norm sqrt(L)
    INTERPOLATED = "nin"  # rescale to sum_n w_n ||z_n||


class MeanMode(enum.Enum):
    """Which mean estimate is split off as the deterministic part."""

    ZERO = "0"  # no split; deterministic part is zero
    GLOBAL = "m"  # one scalar mean over all elements
    CHANNEL = "chm"  # one mean per feature channel


@dataclass(frozen=True)
class InterpMethod:
    """A norm mode paired with a mean-adjustment mode, e.g. fix/chm.

    ``LINEAR`` only combines with ``ZERO`` (plain lerp); every mean-adjusted
    variant requires a norm-restoring mode, since the point of the split is
    to shield the mean from the norm rescaling.
    """

    norm_mode: NormMode
    mean_mode: MeanMode = MeanMode.ZERO

    def __post_init__(self) -> None:
        if self.norm_mode is NormMode.LINEAR and self.mean_mode is not MeanMode.ZERO:
            raise ValueError("linear interpolation does not take a mean adjustment")

    @property
    def label(self) -> str:
        """Short method label such as ``lin``, ``fix/0`` or ``nin/chm``."""
        if self.norm_mode is NormMode.LINEAR:
            return self.norm_mode.value
        return f"{self.norm_mode.value}/{self.mean_mode.value}"

    @classmethod
    def parse(cls, label: str) -> "InterpMethod":
        """Inverse of ``label``; accepts ``lin``, ``fix/0``, ``nin/chm``, etc."""
        parts = label.split("/")
        if len(parts) == 1:
            return cls(NormMode(parts[0]))
        if len(parts) == 2:
            return cls(NormMode(parts[0]), MeanMode(parts[1]))
        raise ValueError(f"malformed method label {label!r}")


@dataclass(frozen=True)
class Decomposition:
    """Exact split of a latent into deterministic + noise parts."""

    deterministic: LatentTensor
    noise: LatentTensor
    mode: MeanMode

    def recompose(self) -> LatentTensor:
        return self.deterministic + self.noise


def _mix(latents: LatentSet, weights: WeightVector) -> np.ndarray:
    """Weighted sum over members as a (C, H, W) array."""
    if len(weights) != len(latents):
        raise ValueError(
            f"got {len(weights)} weights for {len(latents)} latents"
        )
    # pairwise reduction over the member axis; no BLAS involved
    return np.sum(latents.stacked() * weights.values[:, None, None, None], axis=0)


def lerp(latents: LatentSet, weights: WeightVector) -> LatentTensor:
    """Convex combination sum_n w_n z_n."""
    return LatentTensor(_mix(latents, weights))


def _rescaled(mixed: np.ndarray, target_norm: float, nominal: float) -> LatentTensor:
    mixed_norm = float(np.sqrt(np.sum(np.square(mixed))))
    if mixed_norm <= DEGENERATE_REL_TOL * nominal:
        raise DegenerateDirectionError(
            f"weighted sum has norm {mixed_norm:.3e} (<= {DEGENERATE_REL_TOL:g} * sqrt(L)); "
            "direction undefined"
        )
    return LatentTensor((target_norm / mixed_norm) * mixed)


def fix_norm(latents: LatentSet, weights: WeightVector) -> LatentTensor:
    """Convex combination rescaled to the nominal norm sqrt(L).

    Keeps centroids from washing out at low norm, but does not reproduce
    inputs at vertex weights unless they already sit at sqrt(L).
    """
    nominal = latents.shape.nominal_norm
    return _rescaled(_mix(latents, weights), nominal, nominal)


def nin(latents: LatentSet, weights: WeightVector) -> LatentTensor:
    """Convex combination rescaled to the interpolated input norms.

    The target norm is sum_n w_n ||z_n||, so vertex weights return the
    corresponding input exactly.
    """
    member_norms = np.array([norm(m) for m in latents])
    target = float(np.sum(weights.values * member_norms))
    return _rescaled(_mix(latents, weights), target, latents.shape.nominal_norm)


def slerp2(p1: LatentTensor, p2: LatentTensor, t: float) -> LatentTensor:
    """Spherical linear interpolation between two latents.

    The angle is computed on normalized directions, so inputs need not be
    unit vectors; coefficients are applied to the raw inputs. Near-parallel
    inputs (sin(theta) < ``NEAR_PARALLEL_SIN``) fall back to lerp; antipodal
    inputs raise ``AntipodalError`` because the rotation plane is undefined.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must be in [0, 1], got {t}")
    if p1.data.shape != p2.data.shape:
        raise ShapeMismatchError(
            f"incompatible latent shapes {p1.data.shape} and {p2.data.shape}"
        )
    n1, n2 = norm(p1), norm(p2)
    if n1 == 0.0 or n2 == 0.0:
        raise ValueError("slerp2 requires nonzero inputs")
    # pairwise-summed dot product, clamped before arccos
    cos_theta = float(np.sum(p1.data * p2.data)) / (n1 * n2)
    cos_theta = min(1.0, max(-1.0, cos_theta))
    theta = math.acos(cos_theta)
    if theta > math.pi - ANTIPODAL_MARGIN:
        raise AntipodalError(
            f"inputs are antipodal (angle {theta:.8f} rad); no unique interpolation path"
        )
    sin_theta = math.sin(theta)
    if sin_theta < NEAR_PARALLEL_SIN:
        return lerp(LatentSet([p1, p2]), WeightVector([1.0 - t, t]))
    c1 = math.sin((1.0 - t) * theta) / sin_theta
    c2 = math.sin(t * theta) / sin_theta
    return LatentTensor(c1 * p1.data + c2 * p2.data)


def decompose(z: LatentTensor, mode: MeanMode) -> Decomposition:
    """Split ``z`` into a mean estimate and the remaining noise.

    The deterministic part is all-zero (``ZERO``), the global mean broadcast
    everywhere (``GLOBAL``), or each channel's mean broadcast over that
    channel (``CHANNEL``). The noise part is ``z`` minus that, so the two
    always add back to ``z``.
    """
    if mode is MeanMode.ZERO:
        det = np.zeros_like(z.data)
    elif mode is MeanMode.GLOBAL:
        det = np.full_like(z.data, global_mean(z))
    elif mode is MeanMode.CHANNEL:
        det = np.broadcast_to(
            channel_means(z)[:, None, None], z.data.shape
        ).copy()
    else:
        raise ValueError(f"unknown mean mode {mode!r}")
    return Decomposition(
        deterministic=LatentTensor(det),
        noise=LatentTensor(z.data - det),
        mode=mode,
    )


def _norm_interp(latents: LatentSet, weights: WeightVector, norm_mode: NormMode) -> LatentTensor:
    if norm_mode is NormMode.FIXED:
        return fix_norm(latents, weights)
    if norm_mode is NormMode.INTERPOLATED:
        return nin(latents, weights)
    raise ValueError(f"unsupported norm mode {norm_mode!r}")


def mean_adjusted_interp(
    latents: LatentSet, weights: WeightVector, method: InterpMethod
) -> LatentTensor:
    """Interpolate with the method's mean adjustment applied per input.

    Each input is decomposed independently with ``method.mean_mode``; the
    deterministic parts are combined with ``lerp`` and the noise parts with
    the method's norm-restoring operator, and the two results are summed.
    With ``INTERPOLATED`` norms, vertex weights reproduce the corresponding
    input regardless of the mean mode.
    """
    if method.norm_mode is NormMode.LINEAR:
        return lerp(latents, weights)
    if method.mean_mode is MeanMode.ZERO:
        # zero deterministic part: identical to the bare operator
        return _norm_interp(latents, weights, method.norm_mode)
    parts = [decompose(z, method.mean_mode) for z in latents]
    det_set = LatentSet([p.deterministic for p in parts])
    noise_set = LatentSet([p.noise for p in parts])
    det_mix = lerp(det_set, weights)
    noise_mix = _norm_interp(noise_set, weights, method.norm_mode)
    return det_mix + noise_mix


def centroid(latents: LatentSet, method: InterpMethod) -> LatentTensor:
    """Interpolation with uniform weights 1/N."""
    return mean_adjusted_interp(latents, WeightVector.uniform(len(latents)), method)
