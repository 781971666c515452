"""Command line for the exporter: invert, generate, decode."""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .backends import BackendError, load_backend
from .config import ExportConfig, ModelFamily
from .export import decode_latents, generate_perturb_invert, invert_images
from .latf import LatentFileError

_FAMILY_MODEL_IDS = {"sd15": "toy/sd15", "sd35": "toy/sd35"}


def _config(args: argparse.Namespace) -> ExportConfig:
    model_id = args.model
    if model_id is None:
        if args.backend == "diffusers":
            raise ValueError("--model is required with the diffusers backend")
        model_id = _FAMILY_MODEL_IDS[args.family]
    return ExportConfig(
        model_id=model_id,
        prompt_template=args.prompt_template,
        guidance_scale=args.guidance,
        inversion_steps=args.steps,
        noise_scale=getattr(args, "noise_scale", 0.0),
        full_precision=args.full_precision,
    )


def _add_backend_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--backend", choices=["diffusers", "toy"], default="diffusers",
        help="real pipeline via diffusers, or the deterministic toy stand-in",
    )
    p.add_argument("--model", default=None, help="checkpoint id (required for diffusers)")
    p.add_argument(
        "--family", choices=[f.value for f in ModelFamily], default="sd15",
        help="latent geometry when no --model is given (toy backend)",
    )
    p.add_argument("--prompt-template", default="a photo of a {name}")
    p.add_argument("--guidance", type=float, default=None, help="default: family stock value")
    p.add_argument("--steps", type=int, default=50, help="inversion steps")
    p.add_argument(
        "--full-precision", action="store_true",
        help="run the pipeline in float32 instead of float16",
    )
    p.add_argument("--dtype", choices=["f32", "f64"], default="f64", help="LATF precision")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdexport",
        description="Bridge between images and LATF latent files via a diffusion pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("invert", help="invert images to terminal latents, write LATF")
    p.add_argument("images", nargs="+")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--class-name", default=None, help="fills {name} in the prompt template")
    _add_backend_flags(p)
    p.set_defaults(func=_cmd_invert)

    p = sub.add_parser(
        "generate", help="generate/perturb/invert N latents for one class, write LATF"
    )
    p.add_argument("--class-name", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument(
        "--noise-scale", type=float, required=True,
        help="pixel-noise standard deviation (fraction of full scale); no default",
    )
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("-o", "--output", required=True)
    _add_backend_flags(p)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("decode", help="decode every latent in a LATF file to PNG images")
    p.add_argument("latents")
    p.add_argument("-o", "--output-dir", required=True)
    p.add_argument(
        "--at-t0", action="store_true",
        help="decode directly instead of running the reverse process from t = T",
    )
    _add_backend_flags(p)
    p.set_defaults(func=_cmd_decode)

    return parser


def _cmd_invert(args: argparse.Namespace) -> int:
    config = _config(args)
    backend = load_backend(args.backend, config)
    path = invert_images(
        args.images, config, backend, args.output,
        class_name=args.class_name, dtype=args.dtype,
    )
    print(f"wrote {len(args.images)} latents to {path}")
    return 0


def _cmd_generate(args: argparse.Namespace) -> int:
    config = _config(args)
    backend = load_backend(args.backend, config)
    path = generate_perturb_invert(
        args.class_name, args.n, config, backend, args.seed, args.output, dtype=args.dtype,
    )
    print(f"wrote {args.n} latents to {path}")
    return 0


def _cmd_decode(args: argparse.Namespace) -> int:
    config = _config(args)
    backend = load_backend(args.backend, config)
    written = decode_latents(args.latents, backend, args.output_dir, at_t0=args.at_t0)
    print(f"wrote {len(written)} images to {args.output_dir}")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (BackendError, LatentFileError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
