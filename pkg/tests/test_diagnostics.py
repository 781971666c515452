import math

import numpy as np
import pytest

from latentmix import (
    AmplificationReport,
    GlobalConstant,
    InterpMethod,
    LatentSet,
    LatentShape,
    LatentTensor,
    NoBias,
    PerChannel,
    Region,
    RegionOffset,
    SeedSpec,
    WeightVector,
    bias_growth_experiment,
    injected_channel_bias,
    make_biased_set,
    measured_amplification,
    norm,
    norm_profile,
    predicted_amplification,
)

from helpers import random_set

FIX0 = InterpMethod.parse("fix/0")
FIXCHM = InterpMethod.parse("fix/chm")
LIN = InterpMethod.parse("lin")


class TestPredictedAmplification:
    @pytest.mark.parametrize("n,expected", [(1, 1.0), (16, 4.0), (96, 9.798)])
    def test_closed_form(self, n, expected):
        assert predicted_amplification(n) == pytest.approx(expected, abs=5e-4)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            predicted_amplification(0)


class TestInjectedChannelBias:
    def test_global_constant(self):
        out = injected_channel_bias(GlobalConstant(0.02), LatentShape(4, 8, 8))
        np.testing.assert_allclose(out, np.full(4, 0.02), rtol=1e-15)

    def test_per_channel(self):
        out = injected_channel_bias(PerChannel((0.1, -0.1, 0.0)), LatentShape(3, 8, 8))
        np.testing.assert_allclose(out, [0.1, -0.1, 0.0], rtol=1e-15)

    def test_region_offset_scales_with_area(self):
        bias = RegionOffset(Region(0, 2, 0, 8), (0.4, 0.0))
        out = injected_channel_bias(bias, LatentShape(2, 8, 8))
        np.testing.assert_allclose(out, [0.4 * 16 / 64, 0.0], rtol=1e-15)

    def test_no_bias(self):
        out = injected_channel_bias(NoBias(), LatentShape(2, 4, 4))
        np.testing.assert_array_equal(out, [0.0, 0.0])


# one shared batch of sets: every method is measured on the same draws
_AMP_SHAPE = LatentShape(4, 64, 64)
_AMP_BIAS = GlobalConstant(0.02)


@pytest.fixture(scope="module")
def trial_amplifications():
    amps = {FIX0.label: [], FIXCHM.label: [], LIN.label: []}
    for t in range(100):
        latents = make_biased_set(64, _AMP_SHAPE, _AMP_BIAS, SeedSpec(2024, t * 2**32))
        for method in (FIX0, FIXCHM, LIN):
            amps[method.label].append(measured_amplification(latents, method, _AMP_BIAS))
    return {label: np.mean(values, axis=0) for label, values in amps.items()}


class TestMeasuredAmplification:
    def test_fixed_normalization_amplifies_by_sqrt_n(self, trial_amplifications):
        amp = trial_amplifications[FIX0.label]
        assert np.abs(amp - 8.0).max() <= 0.8

    def test_channel_mean_adjustment_suppresses_amplification(self, trial_amplifications):
        amp = trial_amplifications[FIXCHM.label]
        assert np.abs(amp - 1.0).max() <= 0.1

    def test_linear_interpolation_does_not_amplify(self, trial_amplifications):
        amp = trial_amplifications[LIN.label]
        assert np.abs(amp - 1.0).max() <= 0.1

    def test_zero_bias_channels_reported_absent(self):
        shape = LatentShape(4, 16, 16)
        bias = PerChannel((0.05, 0.0, 0.0, 0.0))
        latents = make_biased_set(8, shape, bias, SeedSpec(5))
        amp = measured_amplification(latents, FIX0, bias)
        assert np.isfinite(amp[0])
        assert np.isnan(amp[1:]).all()


@pytest.fixture(scope="module")
def fix0_report():
    return bias_growth_experiment(
        LatentShape(4, 64, 64),
        GlobalConstant(0.02),
        (2, 8, 32, 48, 64, 96),
        trials=30,
        methods=[FIX0],
        seed=SeedSpec(77),
    )[0]


class TestBiasGrowthExperiment:
    def test_report_shape_contract(self):
        shape = LatentShape(2, 8, 8)
        reports = bias_growth_experiment(
            shape, GlobalConstant(0.1), [4], trials=1, methods=[FIX0, LIN], seed=SeedSpec(3)
        )
        assert len(reports) == 2
        for report in reports:
            assert report.n_values == (4,)
            assert report.mean_by_n.shape == (1, 2)
            assert report.predicted.shape == (1,)
            assert report.slope.shape == (2,)
            assert report.trials == 1

    def test_fixed_normalization_slope_matches_bias(self, fix0_report):
        assert np.abs(fix0_report.slope - 0.02).max() <= 0.002

    def test_amplification_monotone_nondecreasing(self, fix0_report):
        # noise std of a trial-averaged channel mean: sqrt(C/L)/sqrt(trials)
        slack = 2.0 * math.sqrt(4 / 16384) / math.sqrt(fix0_report.trials)
        diffs = np.diff(fix0_report.mean_by_n, axis=0)
        assert diffs.min() >= -slack

    def test_channel_mean_adjustment_stays_flat(self):
        reports = bias_growth_experiment(
            LatentShape(4, 64, 64),
            GlobalConstant(0.02),
            (2, 8, 32, 48, 64, 96),
            trials=30,
            methods=[FIXCHM],
            seed=SeedSpec(78),
        )
        assert np.abs(reports[0].mean_by_n - 0.02).max() <= 0.01

    def test_deterministic_given_seed(self):
        kwargs = dict(
            shape=LatentShape(2, 8, 8),
            bias=GlobalConstant(0.05),
            n_values=(2, 4),
            trials=3,
            methods=[FIX0],
            seed=SeedSpec(55),
        )
        a = bias_growth_experiment(**kwargs)[0]
        b = bias_growth_experiment(**kwargs)[0]
        np.testing.assert_array_equal(a.mean_by_n, b.mean_by_n)
        np.testing.assert_array_equal(a.slope, b.slope)

    def test_rejects_small_n(self):
        with pytest.raises(ValueError):
            bias_growth_experiment(
                LatentShape(1, 4, 4), NoBias(), [1, 2], 1, [FIX0], SeedSpec(1)
            )

    def test_report_validates_n_ordering(self):
        with pytest.raises(ValueError):
            AmplificationReport(
                method=FIX0,
                n_values=(4, 2),
                mean_by_n=np.zeros((2, 1)),
                predicted=np.sqrt([4.0, 2.0]),
                slope=np.zeros(1),
                trials=1,
                seed=SeedSpec(0),
            )


class TestNormProfile:
    def test_fixed_norms_are_nominal(self, rng):
        shape = LatentShape(2, 4, 4)
        latents = random_set(rng, 3, shape)
        grid = [WeightVector([a, (1 - a) / 2, (1 - a) / 2]) for a in (0.0, 0.3, 0.9)]
        profile = norm_profile(latents, grid, FIX0)
        for _, value in profile:
            assert value == pytest.approx(shape.nominal_norm, rel=1e-12)

    def test_linear_midpoint_of_orthogonal_inputs(self):
        # two orthogonal equal-norm inputs: midpoint norm is norm/sqrt(2)
        a = np.zeros((1, 2, 2))
        a[0, 0, 0] = 3.0
        b = np.zeros((1, 2, 2))
        b[0, 1, 1] = 3.0
        latents = LatentSet([LatentTensor(a), LatentTensor(b)])
        profile = norm_profile(latents, [WeightVector([0.5, 0.5])], LIN)
        assert profile[0][1] == pytest.approx(3.0 / math.sqrt(2.0), rel=1e-12)

    def test_interpolated_norm_endpoints(self, rng):
        shape = LatentShape(2, 3, 3)
        latents = random_set(rng, 2, shape, scale=1.4)
        grid = [WeightVector([1.0, 0.0]), WeightVector([0.0, 1.0])]
        profile = norm_profile(latents, grid, InterpMethod.parse("nin/0"))
        assert profile[0][1] == pytest.approx(norm(latents[0]), rel=1e-12)
        assert profile[1][1] == pytest.approx(norm(latents[1]), rel=1e-12)
