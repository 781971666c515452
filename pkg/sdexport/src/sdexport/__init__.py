"""Bridge between images and LATF latent files via a diffusion pipeline."""

from .backends import (
    BackendError,
    DiffusersBackend,
    PipelineLoadError,
    ToyDiffusionBackend,
    load_backend,
)
from .config import ExportConfig, ModelFamily, family_for_model
from .export import decode_latents, generate_perturb_invert, invert_images
from .latf import LatentFileError, read_latents, write_latents

__version__ = "0.1.0"

__all__ = [
    "ExportConfig",
    "ModelFamily",
    "family_for_model",
    "BackendError",
    "PipelineLoadError",
    "ToyDiffusionBackend",
    "DiffusersBackend",
    "load_backend",
    "invert_images",
    "generate_perturb_invert",
    "decode_latents",
    "LatentFileError",
    "write_latents",
    "read_latents",
    "__version__",
]
