"""Diffusion pipeline backends.

Two implementations of the same small surface:

* ``ToyDiffusionBackend`` -- a deterministic, dependency-free stand-in with
  the right latent geometry (image 512x512, latent C x 64 x 64). The first
  three latent channels carry an affine encoding of the downsampled RGB
  image; remaining channels are pseudo-noise derived from the image bytes,
  so inversion is a pure function of its input. Good for format and
  plumbing tests on machines without model weights.
* ``DiffusersBackend`` -- DDIM inversion and decoding through a real
  Stable Diffusion checkpoint via the ``diffusers`` library (install the
  ``sd`` extra). Loading failures of any kind surface as
  ``PipelineLoadError``.

All backends speak numpy (C, H, W) float latents and PIL images.
"""

from __future__ import annotations

import hashlib
import math

import numpy as np
from PIL import Image

from .config import ExportConfig, ModelFamily


class BackendError(Exception):
    """Pipeline operation failed."""


class PipelineLoadError(BackendError):
    """The diffusion pipeline could not be loaded."""


# std of U[0,1]: scales pixel values to roughly unit-variance latent entries
_AFFINE_SCALE = math.sqrt(1.0 / 12.0)


class ToyDiffusionBackend:
    """Deterministic invertible stand-in for a latent diffusion pipeline."""

    image_size = 512
    latent_size = 64  # image_size / 8, the usual VAE reduction

    def __init__(self, family: ModelFamily) -> None:
        self.family = family

    @property
    def latent_channels(self) -> int:
        return self.family.latent_channels

    def _noise_channels(self, small: np.ndarray, count: int) -> np.ndarray:
        digest = hashlib.sha256(
            small.tobytes() + bytes([self.latent_channels])
        ).digest()
        seed = int.from_bytes(digest[:8], "little")
        rng = np.random.default_rng(seed)
        return rng.standard_normal((count, self.latent_size, self.latent_size))

    def invert(
        self, image: Image.Image, prompt: str, steps: int, guidance_scale: float
    ) -> np.ndarray:
        """Map an image to a terminal-timestep latent; deterministic per image."""
        del prompt, steps, guidance_scale  # recorded by callers; no-ops here
        small = np.asarray(
            image.convert("RGB").resize(
                (self.latent_size, self.latent_size), Image.BILINEAR
            ),
            dtype=np.uint8,
        )
        signal = (small.astype(np.float64) / 255.0 - 0.5) / _AFFINE_SCALE
        latent = np.empty(
            (self.latent_channels, self.latent_size, self.latent_size)
        )
        latent[:3] = signal.transpose(2, 0, 1)
        if self.latent_channels > 3:
            latent[3:] = self._noise_channels(small, self.latent_channels - 3)
        return latent

    def decode(self, latent: np.ndarray, from_terminal: bool = True) -> Image.Image:
        """Map a latent back to an image (terminal and t=0 coincide here)."""
        del from_terminal
        rgb = np.clip(latent[:3] * _AFFINE_SCALE + 0.5, 0.0, 1.0)
        small = (rgb.transpose(1, 2, 0) * 255.0).round().astype(np.uint8)
        return Image.fromarray(small).resize(
            (self.image_size, self.image_size), Image.BILINEAR
        )

    def generate(
        self, eps: np.ndarray, prompt: str, guidance_scale: float
    ) -> Image.Image:
        """Produce an image from initial noise (the toy 'diffusion model output')."""
        del prompt, guidance_scale
        return self.decode(eps)


class DiffusersBackend:
    """Real Stable Diffusion pipeline through HuggingFace diffusers.

    Supports UNet-based SD 1.x/2.x checkpoints: images are VAE-encoded and
    driven to the terminal timestep with a DDIM inverse scheduler; decoding
    runs the reverse process (or just the VAE at t=0). Needs model weights
    on disk or hub access, and the ``sd`` extra installed.
    """

    def __init__(self, config: ExportConfig) -> None:
        try:
            import torch
            from diffusers import (
                DDIMInverseScheduler,
                DDIMScheduler,
                StableDiffusionPipeline,
            )
        except ImportError as exc:
            raise PipelineLoadError(
                f"diffusers backend unavailable ({exc}); install the 'sd' extra"
            ) from exc
        if config.family is not ModelFamily.SD15:
            raise PipelineLoadError(
                "only UNet-based SD 1.x checkpoints are wired up here; "
                "rectified-flow (SD 3.x) inversion needs a different pipeline"
            )
        self._torch = torch
        dtype = torch.float32 if config.full_precision else torch.float16
        try:
            self._pipeline = StableDiffusionPipeline.from_pretrained(
                config.model_id, torch_dtype=dtype
            )
        except Exception as exc:
            raise PipelineLoadError(f"could not load {config.model_id!r}: {exc}") from exc
        self._scheduler = DDIMScheduler.from_config(self._pipeline.scheduler.config)
        self._inverse = DDIMInverseScheduler.from_config(self._pipeline.scheduler.config)
        self.family = config.family
        self.latent_size = int(self._pipeline.unet.config.sample_size)
        self.image_size = self.latent_size * int(
            2 ** (len(self._pipeline.vae.config.block_out_channels) - 1)
        )

    @property
    def latent_channels(self) -> int:
        return self.family.latent_channels

    def _embed(self, prompt: str):
        pipe = self._pipeline
        tokens = pipe.tokenizer(
            prompt,
            padding="max_length",
            max_length=pipe.tokenizer.model_max_length,
            truncation=True,
            return_tensors="pt",
        )
        return pipe.text_encoder(tokens.input_ids.to(pipe.device))[0]

    def invert(
        self, image: Image.Image, prompt: str, steps: int, guidance_scale: float
    ) -> np.ndarray:
        torch = self._torch
        pipe = self._pipeline
        rgb = np.asarray(image.convert("RGB"), dtype=np.float32) / 127.5 - 1.0
        pixels = torch.from_numpy(rgb.transpose(2, 0, 1))[None].to(
            pipe.device, pipe.vae.dtype
        )
        with torch.no_grad():
            latent = pipe.vae.encode(pixels).latent_dist.mean
            latent = latent * pipe.vae.config.scaling_factor
            embedding = self._embed(prompt)
            self._inverse.set_timesteps(steps, device=pipe.device)
            for t in self._inverse.timesteps:
                noise_pred = pipe.unet(latent, t, encoder_hidden_states=embedding).sample
                latent = self._inverse.step(noise_pred, t, latent).prev_sample
        return latent[0].float().cpu().numpy().astype(np.float64)

    def decode(self, latent: np.ndarray, from_terminal: bool = True) -> Image.Image:
        torch = self._torch
        pipe = self._pipeline
        z = torch.from_numpy(np.asarray(latent, dtype=np.float32))[None].to(
            pipe.device, pipe.unet.dtype
        )
        if from_terminal:
            images = pipe(prompt="", latents=z, output_type="pil").images
            return images[0]
        with torch.no_grad():
            pixels = pipe.vae.decode(z / pipe.vae.config.scaling_factor).sample
        arr = ((pixels[0].float().cpu().numpy().transpose(1, 2, 0) + 1.0) * 127.5).clip(0, 255)
        return Image.fromarray(arr.astype(np.uint8))

    def generate(
        self, eps: np.ndarray, prompt: str, guidance_scale: float
    ) -> Image.Image:
        torch = self._torch
        z = torch.from_numpy(np.asarray(eps, dtype=np.float32))[None].to(
            self._pipeline.device, self._pipeline.unet.dtype
        )
        images = self._pipeline(
            prompt=prompt, latents=z, guidance_scale=guidance_scale, output_type="pil"
        ).images
        return images[0]


def load_backend(name: str, config: ExportConfig):
    """``toy`` for the deterministic stand-in, ``diffusers`` for the real thing."""
    if name == "toy":
        return ToyDiffusionBackend(config.family)
    if name == "diffusers":
        return DiffusersBackend(config)
    raise ValueError(f"unknown backend {name!r} (expected 'toy' or 'diffusers')")
