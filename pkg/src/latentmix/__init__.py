"""Diffusion-latent interpolation operators, normalization remedies, and diagnostics."""

from .core import (
    LatentSet,
    LatentShape,
    LatentTensor,
    ShapeMismatchError,
    WeightVector,
    channel_means,
    global_mean,
    norm,
)
from .diagnostics import (
    AmplificationReport,
    bias_growth_experiment,
    injected_channel_bias,
    measured_amplification,
    norm_profile,
    predicted_amplification,
)
from .interpolate import (
    AntipodalError,
    Decomposition,
    DegenerateDirectionError,
    InterpMethod,
    MeanMode,
    NormMode,
    centroid,
    decompose,
    fix_norm,
    lerp,
    mean_adjusted_interp,
    nin,
    slerp2,
)
from .latf import (
    BadMagicError,
    InvalidHeaderError,
    LatentFileError,
    NonFiniteValueError,
    TruncatedPayloadError,
    UnsupportedDtypeError,
    UnsupportedVersionError,
    read_latents,
    write_latents,
)
from .synth import (
    BiasSpec,
    GlobalConstant,
    NoBias,
    PerChannel,
    Region,
    RegionOffset,
    SeedSpec,
    Toy2DPaths,
    apply_region_offset,
    make_biased_set,
    sample_gaussian_latent,
    toy2d_paths,
)

__version__ = "0.1.0"

__all__ = [
    "LatentShape",
    "LatentTensor",
    "WeightVector",
    "LatentSet",
    "ShapeMismatchError",
    "norm",
    "channel_means",
    "global_mean",
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
    "AmplificationReport",
    "predicted_amplification",
    "injected_channel_bias",
    "measured_amplification",
    "bias_growth_experiment",
    "norm_profile",
    "LatentFileError",
    "BadMagicError",
    "UnsupportedVersionError",
    "UnsupportedDtypeError",
    "InvalidHeaderError",
    "TruncatedPayloadError",
    "NonFiniteValueError",
    "write_latents",
    "read_latents",
    "__version__",
]
