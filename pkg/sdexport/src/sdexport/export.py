"""The three export operations: invert, generate-perturb-invert, decode.

This module contains no interpolation logic on purpose: latent mixing and
mean adjustment live in the interpolation toolkit, and this adapter only
moves latents between images and LATF files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from .backends import BackendError
from .config import ExportConfig
from .latf import write_latents


def invert_images(
    image_paths: Sequence[str | Path],
    config: ExportConfig,
    backend,
    output_path: str | Path,
    class_name: str | None = None,
    dtype: str = "f64",
) -> Path:
    """DDIM-invert each image to a terminal latent and write one LATF file."""
    if not image_paths:
        raise ValueError("at least one image is required")
    prompt = config.prompt_for(class_name)
    latents = []
    for path in image_paths:
        try:
            with Image.open(path) as img:
                image = img.convert("RGB")
        except OSError as exc:
            raise BackendError(f"could not decode image {path}: {exc}") from exc
        latents.append(
            backend.invert(image, prompt, config.inversion_steps, config.guidance)
        )
    output_path = Path(output_path)
    write_latents(output_path, np.stack(latents), dtype=dtype)
    return output_path


def generate_perturb_invert(
    class_name: str,
    n: int,
    config: ExportConfig,
    backend,
    seed: int,
    output_path: str | Path,
    dtype: str = "f64",
) -> Path:
    """Make N independent latents by the generate/perturb/invert recipe.

    For each of the N draws: sample initial noise, generate an image from it
    with the class prompt, add gaussian pixel noise of standard deviation
    ``config.noise_scale`` (so the image is no longer a pixel-perfect model
    output), and invert the perturbed image back to a terminal latent.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    prompt = config.prompt_for(class_name)
    channels = backend.latent_channels
    size = backend.latent_size
    latents = []
    for i in range(n):
        eps = np.random.default_rng((seed, i, 0)).standard_normal((channels, size, size))
        image = backend.generate(eps, prompt, config.guidance)
        pixels = np.asarray(image, dtype=np.float64)
        noise = np.random.default_rng((seed, i, 1)).standard_normal(pixels.shape)
        perturbed = np.clip(pixels + 255.0 * config.noise_scale * noise, 0, 255)
        perturbed_image = Image.fromarray(perturbed.astype(np.uint8))
        latents.append(
            backend.invert(perturbed_image, prompt, config.inversion_steps, config.guidance)
        )
    output_path = Path(output_path)
    write_latents(output_path, np.stack(latents), dtype=dtype)
    return output_path


def decode_latents(
    latent_path: str | Path,
    backend,
    output_dir: str | Path,
    at_t0: bool = False,
    stem: str = "latent",
) -> list[Path]:
    """Decode every latent in a LATF file to a PNG; returns the written paths.

    ``at_t0`` skips the reverse diffusion and decodes the latent directly,
    for inspecting offsets applied after the diffusion process.
    """
    from .latf import read_latents

    stacked = read_latents(latent_path)
    if stacked.shape[1] != backend.latent_channels:
        raise BackendError(
            f"latent file has {stacked.shape[1]} channels; this pipeline expects "
            f"{backend.latent_channels}"
        )
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for i in range(stacked.shape[0]):
        image = backend.decode(stacked[i], from_terminal=not at_t0)
        target = output_dir / f"{stem}_{i:04d}.png"
        image.save(target)
        written.append(target)
    return written
