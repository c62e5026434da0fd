"""Sample-level statistics, slope estimators, and Pitman's variance test."""
from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats as sps

from rtmkit.errors import DegenerateSampleError, ParameterError, SingularityError
from rtmkit.estimators import (
    ErrorSpec,
    berry_slope,
    blomqvist_slope,
    crude_slope,
    pitman_test,
    sample_stats,
    true_slope,
)
from rtmkit.model import PopulationParams
from rtmkit.sampling import LatentSample, ObservedSample, SeedSpec, derive_stream, draw_sample


def obs_of(x1, x2) -> ObservedSample:
    return ObservedSample(x1=np.asarray(x1, dtype=float), x2=np.asarray(x2, dtype=float))


def random_obs(rng: np.random.Generator, n: int = 60) -> ObservedSample:
    x1 = rng.normal(10.0, 3.0, n)
    x2 = 0.6 * x1 + rng.normal(0.0, 2.0, n)
    return ObservedSample(x1=x1, x2=x2)


TINY = obs_of([1.0, 2.0, 3.0], [2.0, 4.0, 6.0])


class TestSampleStats:
    def test_exact_small_case(self):
        st = sample_stats(TINY)
        assert st.n == 3
        assert st.mean_x1 == 2.0 and st.mean_x2 == 4.0
        assert st.var_x1 == 1.0 and st.var_x2 == 4.0
        assert st.cov_x1x2 == 2.0
        assert st.pearson_r == 1.0

    def test_anticorrelated(self):
        st = sample_stats(obs_of([1, 2, 3], [3, 2, 1]))
        assert st.pearson_r == -1.0

    def test_degenerate_variance_raises(self):
        with pytest.raises(DegenerateSampleError):
            sample_stats(obs_of([2, 2, 2], [1, 2, 3]))
        with pytest.raises(DegenerateSampleError):
            sample_stats(obs_of([1, 2, 3], [7, 7, 7]))

    def test_large_sample_correlation(self, systolic):
        _, obs = draw_sample(systolic, 1_000_000, derive_stream(SeedSpec(4, 0)))
        st = sample_stats(obs)
        assert abs(st.pearson_r - 0.5894) <= 0.003
        assert st.pearson_r == pytest.approx(
            st.cov_x1x2 / math.sqrt(st.var_x1 * st.var_x2), abs=1e-15
        )


class TestCrudeSlope:
    def test_exact_small_cases(self):
        est = crude_slope(TINY)
        assert est.method == "crude" and est.value == 1.0
        assert est.auxiliary["var_x1"] == 1.0
        # constant x2: the change is -x1 + constant
        assert crude_slope(obs_of([1, 2, 3], [5, 5, 5])).value == -1.0

    def test_crude_is_x2_on_x1_slope_minus_one(self):
        rng = derive_stream(SeedSpec(81, 0))
        for _ in range(20):
            obs = random_obs(rng)
            fit = np.polyfit(obs.x1, obs.x2, 1)[0]
            assert crude_slope(obs).value == pytest.approx(fit - 1.0, abs=1e-12)

    def test_constant_x1_raises(self):
        with pytest.raises(DegenerateSampleError):
            crude_slope(obs_of([4, 4, 4], [1, 2, 3]))

    def test_large_sample_against_population(self, systolic):
        _, obs = draw_sample(systolic, 1_000_000, derive_stream(SeedSpec(4, 0)))
        assert abs(crude_slope(obs).value - (-0.3093)) <= 0.01


class TestBerrySlope:
    def test_perfect_correlation_equals_crude(self):
        adjusted, est = berry_slope(TINY)
        assert est.value == crude_slope(TINY).value == 1.0
        assert est.auxiliary["pearson_r"] == 1.0

    def test_identity_with_crude_random_samples(self):
        rng = derive_stream(SeedSpec(82, 0))
        for _ in range(200):
            obs = random_obs(rng, n=int(rng.integers(5, 200)))
            st = sample_stats(obs)
            diff = berry_slope(obs)[1].value - crude_slope(obs).value
            assert abs(diff - (1.0 - st.pearson_r)) <= 1e-12

    def test_adjusted_change_definition_and_regression(self):
        rng = derive_stream(SeedSpec(83, 0))
        for _ in range(20):
            obs = random_obs(rng)
            st = sample_stats(obs)
            adjusted, est = berry_slope(obs)
            expected = (obs.x2 - st.mean_x2) - st.pearson_r * (obs.x1 - st.mean_x1)
            assert np.allclose(adjusted, expected, atol=1e-12)
            assert abs(float(adjusted.mean())) <= 1e-12 * max(1.0, abs(st.mean_x2))
            refit = np.polyfit(obs.x1, adjusted, 1)[0]
            assert est.value == pytest.approx(refit, abs=1e-10)

    def test_degenerate_variances_raise(self):
        with pytest.raises(DegenerateSampleError):
            berry_slope(obs_of([1, 2, 3], [7, 7, 7]))

    def test_large_sample_against_population(self, systolic):
        _, obs = draw_sample(systolic, 1_000_000, derive_stream(SeedSpec(4, 0)))
        assert abs(berry_slope(obs)[1].value - 0.1013) <= 0.01


class TestErrorSpec:
    def test_exactly_one_required(self):
        with pytest.raises(ParameterError):
            ErrorSpec()
        with pytest.raises(ParameterError):
            ErrorSpec(delta2=1.0, repeatability=0.5)

    def test_domains(self):
        with pytest.raises(ParameterError):
            ErrorSpec(delta2=-0.1)
        for bad_r in (0.0, -0.5, 1.5, math.nan):
            with pytest.raises(ParameterError):
                ErrorSpec(repeatability=bad_r)
        assert ErrorSpec(delta2=0.0).kind == "delta2"
        assert ErrorSpec(repeatability=1.0).kind == "repeatability"

    def test_resolution(self):
        assert ErrorSpec(delta2=82.81).resolve_delta2(1000.0) == 82.81
        assert ErrorSpec(repeatability=0.479).resolve_delta2(0.0309) == pytest.approx(
            0.0160989, abs=1e-12
        )


class TestBlomqvistSlope:
    def test_delta2_zero_equals_crude(self):
        rng = derive_stream(SeedSpec(84, 0))
        obs = random_obs(rng)
        _, est = blomqvist_slope(obs, ErrorSpec(delta2=0.0))
        assert est.value == crude_slope(obs).value
        assert est.auxiliary["B"] == -1.0

    def test_route_equivalence_plugin_vs_adjusted_regression(self):
        rng = derive_stream(SeedSpec(85, 0))
        for _ in range(50):
            obs = random_obs(rng)
            st = sample_stats(obs)
            spec = ErrorSpec(delta2=float(rng.uniform(0.0, 0.8 * st.var_x1)))
            adjusted, est = blomqvist_slope(obs, spec)
            crude = crude_slope(obs).value
            plugin = (crude * st.var_x1 + spec.delta2) / (st.var_x1 - spec.delta2)
            assert est.value == pytest.approx(plugin, abs=1e-12 * max(1.0, abs(plugin)))
            refit = np.polyfit(obs.x1, adjusted, 1)[0]
            assert est.value == pytest.approx(refit, abs=1e-10)

    def test_repeatability_form_matches_manual_conversion(self):
        rng = derive_stream(SeedSpec(86, 0))
        obs = random_obs(rng)
        st = sample_stats(obs)
        r_spec = ErrorSpec(repeatability=0.7)
        _, est_r = blomqvist_slope(obs, r_spec)
        _, est_d = blomqvist_slope(obs, ErrorSpec(delta2=(1.0 - 0.7) * st.var_x1))
        assert est_r.value == pytest.approx(est_d.value, abs=1e-12)
        assert est_r.auxiliary["error_spec_kind"] == "repeatability"
        assert est_d.auxiliary["error_spec_kind"] == "delta2"

    def test_singularity_when_error_swallows_variance(self):
        rng = derive_stream(SeedSpec(87, 0))
        obs = random_obs(rng)
        st = sample_stats(obs)
        with pytest.raises(SingularityError, match="estimated signal variance non-positive"):
            blomqvist_slope(obs, ErrorSpec(delta2=st.var_x1 * 1.01))

    def test_aux_records_inputs(self):
        _, est = blomqvist_slope(TINY, ErrorSpec(delta2=0.5))
        assert est.method == "blomqvist"
        assert est.auxiliary["delta2"] == 0.5
        assert est.auxiliary["crude"] == 1.0


class TestInvariances:
    @pytest.mark.parametrize("shift", [-50.0, 0.5, 137.0])
    def test_location_invariance(self, shift):
        rng = derive_stream(SeedSpec(88, 0))
        obs = random_obs(rng)
        moved = obs_of(obs.x1 + shift, obs.x2 + shift)
        assert crude_slope(moved).value == pytest.approx(crude_slope(obs).value, abs=1e-12)
        assert berry_slope(moved)[1].value == pytest.approx(
            berry_slope(obs)[1].value, abs=1e-12
        )
        spec = ErrorSpec(repeatability=0.8)
        assert blomqvist_slope(moved, spec)[1].value == pytest.approx(
            blomqvist_slope(obs, spec)[1].value, abs=1e-12
        )

    @pytest.mark.parametrize("scale", [0.25, 3.7])
    def test_scale_invariance(self, scale):
        rng = derive_stream(SeedSpec(89, 0))
        obs = random_obs(rng)
        scaled = obs_of(obs.x1 * scale, obs.x2 * scale)
        assert crude_slope(scaled).value == pytest.approx(crude_slope(obs).value, abs=1e-12)
        assert berry_slope(scaled)[1].value == pytest.approx(
            berry_slope(obs)[1].value, abs=1e-12
        )
        # absolute error variance must scale with the data squared ...
        d2 = 1.3
        a = blomqvist_slope(obs, ErrorSpec(delta2=d2))[1].value
        b = blomqvist_slope(scaled, ErrorSpec(delta2=d2 * scale**2))[1].value
        assert b == pytest.approx(a, abs=1e-12)
        # ... while the repeatability form is scale-free as given
        spec = ErrorSpec(repeatability=0.6)
        assert blomqvist_slope(scaled, spec)[1].value == pytest.approx(
            blomqvist_slope(obs, spec)[1].value, abs=1e-12
        )


class TestTrueSlope:
    def test_two_point_exact(self):
        lat = LatentSample(X1=np.array([0.0, 1.0]), X2=np.array([0.0, 2.0]))
        assert true_slope(lat).value == 1.0

    def test_noise_free_recovers_beta(self):
        p = PopulationParams(mu=10.0, sigma2=4.0, alpha=3.0, beta=-0.25, nu2=0.0, delta2=0.0)
        lat, _ = draw_sample(p, 500, derive_stream(SeedSpec(90, 0)))
        assert true_slope(lat).value == pytest.approx(-0.25, abs=1e-12)

    def test_degenerate_raises(self):
        with pytest.raises(DegenerateSampleError):
            true_slope(LatentSample(X1=np.array([1.0, 1.0]), X2=np.array([0.0, 2.0])))


class TestPitman:
    def test_perfect_linear_case(self):
        res = pitman_test(TINY)
        assert res.statistic == -1.0
        assert res.p_value == 0.0
        assert res.n == 3

    def test_constant_difference_defines_zero(self):
        res = pitman_test(obs_of([1, 2, 3, 4], [3, 4, 5, 6]))
        assert res.statistic == 0.0 and res.p_value == 1.0

    def test_matches_pearson_on_sums_and_diffs(self):
        rng = derive_stream(SeedSpec(91, 0))
        for _ in range(10):
            obs = random_obs(rng, n=40)
            res = pitman_test(obs)
            ref = sps.pearsonr(obs.x1 + obs.x2, obs.x1 - obs.x2)
            assert res.statistic == pytest.approx(ref.statistic, abs=1e-12)
            assert res.p_value == pytest.approx(ref.pvalue, abs=1e-12)

    def test_requires_three_points_and_variance(self):
        with pytest.raises(DegenerateSampleError):
            pitman_test(obs_of([1, 2], [2, 3]))
        with pytest.raises(DegenerateSampleError):
            pitman_test(obs_of([1, 1, 1], [2, 3, 4]))

    def test_rejects_variance_equality_under_beta_zero(self, systolic):
        # Pitfall: under the no-differential-effect null the variance ratio is
        # 1 + nu2/var_x1 > 1, so Pitman's test rejects decisively.
        _, obs = draw_sample(systolic, 1_000_000, derive_stream(SeedSpec(4, 0)))
        res = pitman_test(obs)
        assert res.p_value < 1e-3
        # population corr(x1+x2, x1-x2) = (V(x1)-V(x2)) / sqrt(...) < 0 here
        assert abs(res.statistic - (-0.19350278272518923)) <= 0.003
