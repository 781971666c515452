"""Export configuration and model-family metadata."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class ModelFamily(enum.Enum):
    """Latent geometry and defaults per Stable Diffusion generation."""

    SD15 = "sd15"
    SD35 = "sd35"

    @property
    def latent_channels(self) -> int:
        return 4 if self is ModelFamily.SD15 else 16

    @property
    def default_guidance(self) -> float:
        # stock classifier-free guidance strengths for each family
        return 7.5 if self is ModelFamily.SD15 else 4.5


def family_for_model(model_id: str) -> ModelFamily:
    """Guess the family from a checkpoint identifier."""
    lowered = model_id.lower()
    if "3.5" in lowered or "3-5" in lowered or "sd3" in lowered:
        return ModelFamily.SD35
    return ModelFamily.SD15


@dataclass(frozen=True)
class ExportConfig:
    """Settings shared by the export operations.

    ``noise_scale`` is the pixel-space standard deviation of the gaussian
    perturbation in the generate-perturb-invert recipe. There is no
    endorsed default; callers must choose it explicitly.
    """

    model_id: str
    prompt_template: str = "a photo of a {name}"
    guidance_scale: float | None = None  # None = family default
    inversion_steps: int = 50
    noise_scale: float = 0.0
    full_precision: bool = False

    def __post_init__(self) -> None:
        if self.guidance_scale is not None and self.guidance_scale < 0:
            raise ValueError(f"guidance_scale must be >= 0, got {self.guidance_scale}")
        if self.inversion_steps < 1:
            raise ValueError(f"inversion_steps must be >= 1, got {self.inversion_steps}")
        if self.noise_scale < 0:
            raise ValueError(f"noise_scale must be >= 0, got {self.noise_scale}")

    @property
    def family(self) -> ModelFamily:
        return family_for_model(self.model_id)

    @property
    def guidance(self) -> float:
        if self.guidance_scale is None:
            return self.family.default_guidance
        return self.guidance_scale

    def prompt_for(self, name: str | None) -> str:
        if "{name}" in self.prompt_template:
            return self.prompt_template.format(name=name if name is not None else "")
        return self.prompt_template
