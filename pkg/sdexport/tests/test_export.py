import numpy as np
import pytest
from PIL import Image

from sdexport import (
    BackendError,
    ExportConfig,
    ModelFamily,
    PipelineLoadError,
    ToyDiffusionBackend,
    decode_latents,
    generate_perturb_invert,
    invert_images,
    load_backend,
    read_latents,
)


@pytest.fixture
def config():
    return ExportConfig(model_id="toy/sd15", noise_scale=0.02)


@pytest.fixture
def backend(config):
    return load_backend("toy", config)


def checker_image(size=512, period=64):
    y, x = np.mgrid[0:size, 0:size]
    grad = np.stack(
        [
            (x / size * 255),
            (y / size * 255),
            (((x // period + y // period) % 2) * 255),
        ],
        axis=-1,
    )
    return Image.fromarray(grad.astype(np.uint8))


def save_images(tmp_path, count):
    paths = []
    for i in range(count):
        path = tmp_path / f"img_{i}.png"
        checker_image(period=32 * (i + 1)).save(path)
        paths.append(path)
    return paths


class TestToyBackend:
    def test_inversion_is_deterministic(self, backend, config):
        image = checker_image()
        a = backend.invert(image, "p", 50, 7.5)
        b = backend.invert(image, "p", 50, 7.5)
        np.testing.assert_array_equal(a, b)

    def test_latent_geometry(self, backend):
        latent = backend.invert(checker_image(), "p", 50, 7.5)
        assert latent.shape == (4, 64, 64)

    def test_sd35_channel_count(self):
        backend = ToyDiffusionBackend(ModelFamily.SD35)
        latent = backend.invert(checker_image(), "p", 50, 4.5)
        assert latent.shape == (16, 64, 64)

    def test_latent_norm_is_plausible(self, backend):
        # near sqrt(L), like a standard-normal latent
        latent = backend.invert(checker_image(), "p", 50, 7.5)
        ratio = np.linalg.norm(latent) / np.sqrt(latent.size)
        assert 0.5 < ratio < 1.5

    def test_decode_inversion_roundtrip_is_similar(self, backend):
        image = checker_image()
        latent = backend.invert(image, "p", 50, 7.5)
        decoded = backend.decode(latent)
        small = np.asarray(image.resize((64, 64), Image.BILINEAR), dtype=float)
        small_decoded = np.asarray(decoded.resize((64, 64), Image.BILINEAR), dtype=float)
        rmse = np.sqrt(np.mean((small - small_decoded) ** 2))
        assert rmse < 30.0  # out of 255: same picture modulo resampling loss


class TestInvertImages:
    def test_writes_parseable_latf(self, tmp_path, config, backend):
        paths = save_images(tmp_path, 3)
        out = invert_images(paths, config, backend, tmp_path / "out.latf")
        stacked = read_latents(out)
        assert stacked.shape == (3, 4, 64, 64)

    def test_rejects_zero_images(self, tmp_path, config, backend):
        with pytest.raises(ValueError):
            invert_images([], config, backend, tmp_path / "out.latf")

    def test_undecodable_image(self, tmp_path, config, backend):
        bad = tmp_path / "bad.png"
        bad.write_bytes(b"not an image")
        with pytest.raises(BackendError):
            invert_images([bad], config, backend, tmp_path / "out.latf")


class TestGeneratePerturbInvert:
    def test_output_count_and_shape(self, tmp_path, config, backend):
        out = generate_perturb_invert(
            "tree frog", 4, config, backend, seed=11, output_path=tmp_path / "gen.latf"
        )
        stacked = read_latents(out)
        assert stacked.shape == (4, 4, 64, 64)

    def test_deterministic_given_seed(self, tmp_path, config, backend):
        a = read_latents(
            generate_perturb_invert(
                "frog", 2, config, backend, seed=5, output_path=tmp_path / "a.latf"
            )
        )
        b = read_latents(
            generate_perturb_invert(
                "frog", 2, config, backend, seed=5, output_path=tmp_path / "b.latf"
            )
        )
        np.testing.assert_array_equal(a, b)

    def test_members_differ(self, tmp_path, config, backend):
        stacked = read_latents(
            generate_perturb_invert(
                "frog", 2, config, backend, seed=5, output_path=tmp_path / "c.latf"
            )
        )
        assert not np.array_equal(stacked[0], stacked[1])

    def test_rejects_nonpositive_n(self, tmp_path, config, backend):
        with pytest.raises(ValueError):
            generate_perturb_invert(
                "frog", 0, config, backend, seed=1, output_path=tmp_path / "d.latf"
            )


class TestDecodeLatents:
    def test_smoke(self, tmp_path, config, backend):
        paths = save_images(tmp_path, 2)
        latf = invert_images(paths, config, backend, tmp_path / "in.latf")
        written = decode_latents(latf, backend, tmp_path / "imgs")
        assert len(written) == 2
        for path in written:
            with Image.open(path) as img:
                assert img.size == (512, 512)

    def test_at_t0_flag(self, tmp_path, config, backend):
        paths = save_images(tmp_path, 1)
        latf = invert_images(paths, config, backend, tmp_path / "in.latf")
        written = decode_latents(latf, backend, tmp_path / "imgs", at_t0=True)
        assert len(written) == 1

    def test_channel_mismatch_names_expected_count(self, tmp_path, config, backend):
        paths = save_images(tmp_path, 1)
        latf = invert_images(paths, config, backend, tmp_path / "in.latf")
        sd35_backend = ToyDiffusionBackend(ModelFamily.SD35)
        with pytest.raises(BackendError) as excinfo:
            decode_latents(latf, sd35_backend, tmp_path / "imgs")
        assert "16" in str(excinfo.value)


class TestDiffusersBackend:
    def test_load_failure_is_reported(self):
        config = ExportConfig(model_id="not-a-real/checkpoint")
        with pytest.raises(PipelineLoadError):
            load_backend("diffusers", config)

    def test_unknown_backend_name(self, config):
        with pytest.raises(ValueError):
            load_backend("magic", config)
