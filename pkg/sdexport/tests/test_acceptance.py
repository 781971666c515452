"""Exporter integration criteria: LATF interchange with the interpolation toolkit.

Requires the ``latentmix`` package (the consumer of these files) to be
installed; these tests read every exporter output with its strict reader.
"""

import numpy as np
import pytest
from PIL import Image

latentmix = pytest.importorskip("latentmix")

from sdexport import (
    ExportConfig,
    decode_latents,
    generate_perturb_invert,
    invert_images,
    load_backend,
)


def report(name: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion 10 ({name})"
    if detail:
        line += f" -- {detail}"
    print(line)
    assert ok, line


def gradient_image(tmp_path, i):
    rgb = np.zeros((512, 512, 3), dtype=np.uint8)
    rgb[:, :, i % 3] = np.linspace(0, 255, 512, dtype=np.uint8)[None, :]
    path = tmp_path / f"grad_{i}.png"
    Image.fromarray(rgb).save(path)
    return path


def test_exported_files_parse_with_primary_reader(tmp_path):
    images = [gradient_image(tmp_path, i) for i in range(3)]
    results = {}
    for family, model_id in (("sd15", "toy/sd15"), ("sd35", "toy/sd35")):
        config = ExportConfig(model_id=model_id, noise_scale=0.02)
        backend = load_backend("toy", config)
        inverted = invert_images(
            images, config, backend, tmp_path / f"inv_{family}.latf"
        )
        generated = generate_perturb_invert(
            "tree frog", 2, config, backend, seed=4,
            output_path=tmp_path / f"gen_{family}.latf",
        )
        for path in (inverted, generated):
            latents = latentmix.read_latents(path)
            results[path.name] = latents.shape.channels
    expected = {
        "inv_sd15.latf": 4,
        "gen_sd15.latf": 4,
        "inv_sd35.latf": 16,
        "gen_sd35.latf": 16,
    }
    ok = {name: results[name] for name in expected} == expected
    report(
        "LATF interchange",
        ok,
        f"channel counts per file: {results}",
    )


def test_exported_latents_feed_primary_diagnostics(tmp_path):
    config = ExportConfig(model_id="toy/sd15", noise_scale=0.02)
    backend = load_backend("toy", config)
    path = generate_perturb_invert(
        "goldfish", 4, config, backend, seed=8, output_path=tmp_path / "gen.latf"
    )
    latents = latentmix.read_latents(path)
    result = latentmix.centroid(latents, latentmix.InterpMethod.parse("fix/chm"))
    ok = np.isfinite(result.data).all() and len(latents) == 4
    report(
        "primary operators consume exported latents",
        bool(ok),
        f"fix/chm centroid norm {latentmix.norm(result):.2f} "
        f"(nominal {latents.shape.nominal_norm:.2f})",
    )


def test_decode_round_trip_smoke(tmp_path):
    config = ExportConfig(model_id="toy/sd15")
    backend = load_backend("toy", config)
    image = gradient_image(tmp_path, 0)
    latf = invert_images([image], config, backend, tmp_path / "one.latf")
    written = decode_latents(latf, backend, tmp_path / "decoded")
    with Image.open(written[0]) as img:
        size = img.size
    ok = len(written) == 1 and size == (512, 512)
    report("decode smoke", ok, f"decoded image size {size}")
