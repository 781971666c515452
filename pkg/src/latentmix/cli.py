"""Command-line interface tying generators, interpolators, and diagnostics together.

Subcommands:

* ``interp``    -- interpolate the latents in a file with given weights.
* ``centroid``  -- uniform-weight interpolation of a file (optionally a prefix).
* ``simulate``  -- run the bias-growth experiment, emit CSV.
* ``toy2d``     -- emit the 2D toy interpolation paths as CSV.
* ``diagnose``  -- per-latent norms and channel means of a file as CSV.
* ``offset``    -- add region offsets to every latent in a file.

All CSV output has a header row, '.' as the decimal separator, and floats at
full round-trip precision (17 significant digits). Identical command lines
produce byte-identical output within one build.
"""

from __future__ import annotations

import argparse
import csv
import sys
from typing import IO, Sequence

import numpy as np

from .core import LatentSet, LatentShape, WeightVector, channel_means, global_mean, norm
from .diagnostics import (
    DEFAULT_BIAS_VALUE,
    DEFAULT_N_VALUES,
    DEFAULT_SHAPE,
    bias_growth_experiment,
    injected_channel_bias,
)
from .interpolate import (
    AntipodalError,
    DegenerateDirectionError,
    InterpMethod,
    MeanMode,
    NormMode,
    centroid,
    mean_adjusted_interp,
)
from .latf import LatentFileError, read_latents, write_latents
from .synth import (
    TOY2D_DEFAULT_Z1,
    TOY2D_DEFAULT_Z2,
    BiasSpec,
    GlobalConstant,
    NoBias,
    PerChannel,
    Region,
    RegionOffset,
    SeedSpec,
    apply_region_offset,
    toy2d_paths,
)

# Weight lists are renormalized only when already this close to summing to 1;
# anything further off is treated as a typo, not silently rescaled.
WEIGHT_INPUT_TOL = 1e-6


class _UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _parse_floats(text: str, what: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",")]
    except ValueError:
        raise _UsageError(f"malformed {what} {text!r}: expected comma-separated decimals")


def _parse_shape(text: str) -> LatentShape:
    parts = text.lower().split("x")
    if len(parts) != 3:
        raise _UsageError(f"malformed shape {text!r}: expected CxHxW")
    try:
        c, h, w = (int(p) for p in parts)
        return LatentShape(c, h, w)
    except (TypeError, ValueError) as exc:
        raise _UsageError(f"malformed shape {text!r}: {exc}")


def _parse_weights(text: str) -> WeightVector:
    values = np.asarray(_parse_floats(text, "weights"))
    total = float(np.sum(values))
    if abs(total - 1.0) > WEIGHT_INPUT_TOL:
        raise _UsageError(
            f"weights sum to {total!r}, more than {WEIGHT_INPUT_TOL:g} away from 1; "
            "not renormalizing"
        )
    return WeightVector(values / total)


def _parse_bias(text: str) -> BiasSpec:
    if text.lower() == "none":
        return NoBias()
    values = _parse_floats(text, "bias")
    if len(values) == 1:
        return GlobalConstant(values[0])
    return PerChannel(tuple(values))


def _parse_region(text: str) -> Region:
    try:
        rows, cols = text.split(",")
        r0, r1 = (int(p) for p in rows.split(":"))
        c0, c1 = (int(p) for p in cols.split(":"))
        return Region(r0, r1, c0, c1)
    except ValueError as exc:
        raise _UsageError(f"malformed region {text!r} (expected R0:R1,C0:C1): {exc}")


def _parse_method(args: argparse.Namespace) -> InterpMethod:
    try:
        return InterpMethod(NormMode(args.norm), MeanMode(args.mean))
    except ValueError as exc:
        raise _UsageError(str(exc))


def _open_out(path: str | None) -> IO[str]:
    if path is None or path == "-":
        return sys.stdout
    return open(path, "w", newline="")


def _emit_rows(path: str | None, header: Sequence[str], rows) -> None:
    out = _open_out(path)
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()


def _add_method_flags(parser: argparse.ArgumentParser, norm_default: str = "lin") -> None:
    parser.add_argument(
        "--norm", choices=[m.value for m in NormMode], default=norm_default,
        help="norm handling: lin (leave), fix (rescale to sqrt(L)), nin (interpolated norms)",
    )
    parser.add_argument(
        "--mean", choices=[m.value for m in MeanMode], default="0",
        help="mean adjustment: 0 (none), m (global mean), chm (channel-wise mean)",
    )


def _norm_report(result, shape: LatentShape) -> str:
    lines = [
        f"result_norm={_fmt(norm(result))}",
        f"nominal_norm={_fmt(shape.nominal_norm)}",
        f"result_global_mean={_fmt(global_mean(result))}",
    ]
    return "\n".join(lines)


def _cmd_interp(args: argparse.Namespace) -> int:
    latents = read_latents(args.input)
    weights = _parse_weights(args.weights)
    method = _parse_method(args)
    result = mean_adjusted_interp(latents, weights, method)
    write_latents(args.output, LatentSet([result]), dtype=args.dtype)
    print(_norm_report(result, latents.shape))
    return 0


def _cmd_centroid(args: argparse.Namespace) -> int:
    latents = read_latents(args.input)
    if args.n is not None:
        if not 1 <= args.n <= len(latents):
            raise _UsageError(
                f"--n {args.n} out of range for a file of {len(latents)} latents"
            )
        latents = latents.prefix(args.n)
    method = _parse_method(args)
    result = centroid(latents, method)
    write_latents(args.output, LatentSet([result]), dtype=args.dtype)
    print(_norm_report(result, latents.shape))
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    shape = _parse_shape(args.shape)
    bias = _parse_bias(args.bias)
    n_values = [int(v) for v in args.n.split(",")]
    method = _parse_method(args)
    seed = SeedSpec(args.seed)
    try:
        reports = bias_growth_experiment(
            shape, bias, n_values, args.trials, [method], seed
        )
    except ValueError as exc:
        raise _UsageError(str(exc))
    report = reports[0]
    injected = injected_channel_bias(bias, shape)
    rows = []
    for j, n in enumerate(report.n_values):
        for c in range(shape.channels):
            amp = (
                _fmt(report.mean_by_n[j, c] / injected[c]) if injected[c] != 0.0 else ""
            )
            rows.append(
                [
                    method.label,
                    n,
                    _fmt(report.predicted[j]),
                    c,
                    _fmt(report.mean_by_n[j, c]),
                    amp,
                    _fmt(report.slope[c]),
                ]
            )
    _emit_rows(
        args.output,
        ["method", "n", "sqrt_n", "channel", "mean", "amplification", "slope"],
        rows,
    )
    return 0


def _cmd_toy2d(args: argparse.Namespace) -> int:
    z1 = _parse_floats(args.z1, "--z1")
    z2 = _parse_floats(args.z2, "--z2")
    if len(z1) != 2 or len(z2) != 2:
        raise _UsageError("--z1 and --z2 must each have exactly two components")
    paths = toy2d_paths((z1[0], z1[1]), (z2[0], z2[1]), args.steps)
    rows = []
    for k, t in enumerate(paths.ts):
        row = [_fmt(t)]
        for name in ("lin", "fix", "slerp", "nin"):
            row.extend([_fmt(paths.points[name][k, 0]), _fmt(paths.points[name][k, 1])])
        rows.append(row)
    _emit_rows(
        args.output,
        ["t", "lin_x", "lin_y", "fix_x", "fix_y", "slerp_x", "slerp_y", "nin_x", "nin_y"],
        rows,
    )
    return 0


def _cmd_diagnose(args: argparse.Namespace) -> int:
    latents = read_latents(args.input)
    rows = []
    for i, z in enumerate(latents):
        z_norm = norm(z)
        z_mean = global_mean(z)
        means = channel_means(z)
        for c in range(latents.shape.channels):
            rows.append([i, c, _fmt(z_norm), _fmt(z_mean), _fmt(means[c])])
    _emit_rows(
        args.output,
        ["index", "channel", "norm", "global_mean", "channel_mean"],
        rows,
    )
    return 0


def _cmd_offset(args: argparse.Namespace) -> int:
    latents = read_latents(args.input)
    offsets = tuple(_parse_floats(args.offsets, "--offsets"))
    bias = RegionOffset(region=_parse_region(args.region), offsets=offsets)
    shifted = LatentSet([apply_region_offset(z, bias) for z in latents])
    write_latents(args.output, shifted, dtype=args.dtype)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latentmix",
        description="Interpolate, simulate, and diagnose diffusion-model latents.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_dtype(p):
        p.add_argument(
            "--dtype", choices=["f32", "f64"], default="f64",
            help="output latent file precision",
        )

    p = sub.add_parser("interp", help="interpolate a latent file with given weights")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--weights", required=True, help="comma-separated weights summing to 1")
    _add_method_flags(p)
    add_dtype(p)
    p.set_defaults(func=_cmd_interp)

    p = sub.add_parser("centroid", help="uniform-weight interpolation of a latent file")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--n", type=int, default=None, help="use only the first N latents")
    _add_method_flags(p)
    add_dtype(p)
    p.set_defaults(func=_cmd_centroid)

    p = sub.add_parser("simulate", help="bias-growth experiment over a grid of N")
    p.add_argument("--shape", default="x".join(str(d) for d in DEFAULT_SHAPE.as_tuple()))
    p.add_argument(
        "--bias", default=str(DEFAULT_BIAS_VALUE),
        help="'none', one constant, or per-channel comma list",
    )
    p.add_argument("--n", default=",".join(str(n) for n in DEFAULT_N_VALUES))
    p.add_argument("--trials", type=int, default=100)
    _add_method_flags(p, norm_default="fix")
    p.add_argument("--seed", type=int, required=True, help="base seed (required)")
    p.add_argument("-o", "--output", default=None, help="CSV path (default stdout)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("toy2d", help="2D toy interpolation paths as CSV")
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("--z1", default=",".join(_fmt(v) for v in TOY2D_DEFAULT_Z1))
    p.add_argument("--z2", default=",".join(_fmt(v) for v in TOY2D_DEFAULT_Z2))
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_toy2d)

    p = sub.add_parser("diagnose", help="per-latent norms and channel means as CSV")
    p.add_argument("input")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_diagnose)

    p = sub.add_parser("offset", help="add region offsets to every latent in a file")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--region", required=True, help="R0:R1,C0:C1 (half-open)")
    p.add_argument("--offsets", required=True, help="per-channel comma list")
    add_dtype(p)
    p.set_defaults(func=_cmd_offset)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (DegenerateDirectionError, AntipodalError, LatentFileError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
