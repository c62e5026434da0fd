"""Simulation studies and the dataset analysis pipeline."""
from __future__ import annotations

import json
import math

import numpy as np
import pytest

from rtmkit.errors import ParameterError
from rtmkit.estimators import ErrorSpec
from rtmkit.experiments import (
    BERRY_NULL_FORM_WARNING,
    BERRY_NULL_WARNING,
    PERMUTATION_NULL_LABEL,
    PITMAN_NULL_LABEL,
    analyze_dataset,
    run_bootstrap_demo,
    run_head_to_head,
    run_sampling_distribution,
)
from rtmkit.model import PopulationParams, berry_slope_population, crude_slope_population
from rtmkit.sampling import SeedSpec, derive_stream, draw_sample
from rtmkit.serialize import analyze_doc, canonical_json, sampling_dist_doc


class TestRunSamplingDistribution:
    def test_count_validation(self, systolic):
        with pytest.raises(ParameterError):
            run_sampling_distribution(systolic, n=9, replicates=100)
        with pytest.raises(ParameterError):
            run_sampling_distribution(systolic, n=100, replicates=99)

    def test_basic_invariants_and_location(self, systolic):
        report = run_sampling_distribution(systolic, n=100, replicates=300, master_seed=50)
        assert report.n == 100 and report.replicates == 300
        assert set(report.methods) == {"crude", "berry", "blomqvist", "true"}
        for summary in report.methods.values():
            assert summary.min <= summary.q1 <= summary.median <= summary.q3 <= summary.max
            assert summary.variance >= 0.0
            assert summary.n_failed == 0
        assert abs(report.methods["crude"].mean - (-0.309)) < 0.03
        assert abs(report.methods["blomqvist"].mean) < 0.03
        assert abs(report.methods["true"].mean) < 0.03
        # Berry concentrates near its own (non-zero) population value
        assert abs(report.methods["berry"].mean - 0.1013) < 0.03

    def test_default_error_spec_is_generative_repeatability(self, systolic):
        implicit = run_sampling_distribution(systolic, n=50, replicates=200, master_seed=51)
        explicit = run_sampling_distribution(
            systolic,
            n=50,
            replicates=200,
            master_seed=51,
            error_spec=ErrorSpec(repeatability=systolic.repeatability),
        )
        assert sampling_dist_doc(implicit) == sampling_dist_doc(explicit)

    def test_medians_converge_to_population_values(self, systolic):
        report = run_sampling_distribution(
            systolic,
            n=1000,
            replicates=4000,
            error_spec=ErrorSpec(repeatability=systolic.repeatability),
            master_seed=300,
        )
        for name, target in (
            ("crude", crude_slope_population(systolic)),
            ("berry", berry_slope_population(systolic)),
        ):
            summary = report.methods[name]
            se_median = 1.2533 * math.sqrt(summary.variance / 4000)
            assert abs(summary.median - target) <= 2.0 * se_median

    def test_absolute_delta2_form_has_finite_sample_bias(self, systolic):
        # plugging a fixed delta2 into resampled moments re-biases the
        # Blomqvist slope at N=100; the repeatability form does not
        fixed = run_sampling_distribution(
            systolic,
            n=100,
            replicates=1500,
            error_spec=ErrorSpec(delta2=82.81),
            master_seed=400,
        )
        ratio_form = run_sampling_distribution(
            systolic,
            n=100,
            replicates=1500,
            error_spec=ErrorSpec(repeatability=systolic.repeatability),
            master_seed=400,
        )
        bias_fixed = fixed.methods["blomqvist"].mean - 0.0
        bias_ratio = ratio_form.methods["blomqvist"].mean - 0.0
        assert 0.003 <= bias_fixed <= 0.025
        assert abs(bias_ratio) < abs(bias_fixed)
        assert fixed.methods["blomqvist"].variance > ratio_form.methods["blomqvist"].variance


class TestRunHeadToHead:
    def test_default_grid(self, systolic):
        report = run_head_to_head(systolic, n=20, replicates=100, master_seed=1)
        assert len(report.beta_grid) == 26
        assert report.beta_grid[0] == -2.0 and report.beta_grid[-1] == 0.5
        assert report.beta_grid[5] == -1.5

    def test_qualitative_shape_small(self):
        params = PopulationParams(141.0, 184.96, -20.0, 0.0, 100.0, 83.232)
        report = run_head_to_head(
            params, beta_grid=[-1.0, 0.0], n=100, replicates=2000, master_seed=55
        )
        rows = {row.beta: row for row in report.rows}
        assert rows[-1.0].p_crude_beats_blomqvist > 0.5
        assert rows[0.0].p_crude_beats_blomqvist < 0.5
        for row in report.rows:
            assert 0.0 <= row.p_crude_beats_berry <= 1.0
            assert 0.0 <= row.p_crude_beats_blomqvist <= 1.0

    def test_invariant_under_mu_and_alpha(self):
        variants = [
            PopulationParams(141.0, 184.96, -20.0, 0.0, 100.0, 83.232),
            PopulationParams(0.0, 184.96, 0.0, 0.0, 100.0, 83.232),
            PopulationParams(1000.0, 184.96, 50.0, 0.0, 100.0, 83.232),
        ]
        reports = [
            run_head_to_head(p, beta_grid=[-1.0, 0.0], n=100, replicates=2000, master_seed=55)
            for p in variants
        ]
        reference = reports[0]
        for other in reports[1:]:
            for a, b in zip(reference.rows, other.rows):
                assert a.p_crude_beats_berry == b.p_crude_beats_berry
                assert a.p_crude_beats_blomqvist == b.p_crude_beats_blomqvist


class TestRunBootstrapDemo:
    def test_figure4_style_verdict(self, systolic):
        report = run_bootstrap_demo(systolic, n=100, n_boot=10_000, master_seed=30)
        boot = report.bootstrap["crude"]
        assert boot.ci_low <= -0.3093 <= boot.ci_high
        assert report.decision is not None
        assert report.decision.repeatability == systolic.repeatability
        assert report.decision.rejected is False
        iv = report.repeatability_interval
        assert iv.low <= 0.69 <= iv.high

    def test_no_measurement_error_interval_hugs_one(self):
        params = PopulationParams(141.0, 184.96, -20.0, 0.0, 100.0, 0.0)
        report = run_bootstrap_demo(params, n=100, n_boot=4000, master_seed=11)
        assert abs(report.slopes["crude"].value) < 0.2
        iv = report.repeatability_interval
        assert iv.empty is False and iv.low_open is False
        assert iv.high == 1.0
        assert iv.low > 0.8

    def test_deterministic_rerun(self, systolic):
        a = run_bootstrap_demo(systolic, n=50, n_boot=500, n_perm=199, master_seed=9)
        b = run_bootstrap_demo(systolic, n=50, n_boot=500, n_perm=199, master_seed=9)
        assert canonical_json(analyze_doc(a)) == canonical_json(analyze_doc(b))


@pytest.fixture(scope="module")
def demo_sample():
    _, obs = draw_sample(
        PopulationParams(141.0, 184.96, -20.0, 0.0, 100.0, 82.81),
        80,
        derive_stream(SeedSpec(9, 0)),
    )
    return obs


class TestAnalyzeDataset:
    def test_report_sections_and_labels(self, demo_sample):
        report = analyze_dataset(demo_sample, n_boot=400, n_perm=199, master_seed=17)
        assert set(report.slopes) == {"crude", "berry"}
        assert set(report.bootstrap) == {"crude"}
        assert report.decision is None
        doc = analyze_doc(report)
        assert doc["tests"]["permutation"]["null"] == PERMUTATION_NULL_LABEL
        assert doc["tests"]["pitman"]["null"] == PITMAN_NULL_LABEL
        assert BERRY_NULL_WARNING in report.warnings
        assert BERRY_NULL_FORM_WARNING in report.warnings

    def test_crude_berry_sections_unchanged_by_error_spec(self, demo_sample):
        plain = analyze_dataset(demo_sample, n_boot=400, n_perm=199, master_seed=17)
        with_spec = analyze_dataset(
            demo_sample,
            error_spec=ErrorSpec(repeatability=0.69),
            n_boot=400,
            n_perm=199,
            master_seed=17,
        )
        a = json.loads(canonical_json(analyze_doc(plain)))
        b = json.loads(canonical_json(analyze_doc(with_spec)))
        assert a["stats"] == b["stats"]
        assert a["slopes"]["crude"] == b["slopes"]["crude"]
        assert a["slopes"]["berry"] == b["slopes"]["berry"]
        assert a["bootstrap"]["crude"] == b["bootstrap"]["crude"]
        assert a["repeatability_interval"] == b["repeatability_interval"]
        assert a["tests"] == b["tests"]
        assert "blomqvist" in b["slopes"] and "blomqvist" in b["bootstrap"]

    def test_known_r_resolution_order(self, demo_sample):
        explicit = analyze_dataset(
            demo_sample,
            error_spec=ErrorSpec(repeatability=0.5),
            known_r=0.62,
            n_boot=200,
            n_perm=99,
            master_seed=3,
        )
        assert explicit.config.known_r == 0.62
        assert explicit.config.known_r_source == "explicit"

        from_spec = analyze_dataset(
            demo_sample,
            error_spec=ErrorSpec(repeatability=0.5),
            n_boot=200,
            n_perm=99,
            master_seed=3,
        )
        assert from_spec.config.known_r == 0.5
        assert from_spec.config.known_r_source == "error_spec"

        implied = analyze_dataset(
            demo_sample,
            error_spec=ErrorSpec(delta2=80.0),
            n_boot=200,
            n_perm=99,
            master_seed=3,
        )
        stats = implied.stats
        assert implied.config.known_r == pytest.approx(1.0 - 80.0 / stats.var_x1, abs=1e-12)
        assert implied.config.known_r_source == "implied_from_delta2"
        assert implied.decision is not None
        assert implied.decision.null_value == pytest.approx(
            implied.config.known_r - 1.0, abs=1e-12
        )

    def test_negate_change_flips_reported_slopes_only(self, demo_sample):
        base = analyze_dataset(
            demo_sample,
            error_spec=ErrorSpec(repeatability=0.69),
            n_boot=400,
            n_perm=199,
            master_seed=17,
        )
        negated = analyze_dataset(
            demo_sample,
            error_spec=ErrorSpec(repeatability=0.69),
            n_boot=400,
            n_perm=199,
            master_seed=17,
            negate_change=True,
        )
        for method in ("crude", "berry", "blomqvist"):
            assert negated.slopes[method].value == -base.slopes[method].value
        nb, bb = negated.bootstrap["crude"], base.bootstrap["crude"]
        assert nb.point_estimate == -bb.point_estimate
        assert (nb.ci_low, nb.ci_high) == (-bb.ci_high, -bb.ci_low)
        assert np.array_equal(
            np.sort(-np.asarray(nb.replicates)), np.sort(np.asarray(bb.replicates))
        )
        assert negated.decision.null_value == -base.decision.null_value
        assert negated.decision.rejected == base.decision.rejected
        # x2 - x1 convention quantities are reported unchanged
        assert negated.repeatability_interval == base.repeatability_interval
        assert analyze_doc(negated)["tests"] == analyze_doc(base)["tests"]
        assert negated.stats == base.stats

    def test_config_embeds_inputs(self, demo_sample):
        report = analyze_dataset(
            demo_sample,
            error_spec=ErrorSpec(delta2=70.0),
            n_boot=250,
            level=0.9,
            n_perm=149,
            master_seed=23,
        )
        cfg = report.config
        assert cfg.n == 80
        assert cfg.n_boot == 250 and cfg.level == 0.9 and cfg.n_perm == 149
        assert cfg.master_seed == 23 and cfg.negate_change is False
        assert cfg.error_spec.delta2 == 70.0

    def test_rerun_from_embedded_config_is_byte_identical(self, demo_sample):
        report = analyze_dataset(
            demo_sample,
            error_spec=ErrorSpec(repeatability=0.69),
            n_boot=300,
            n_perm=99,
            master_seed=41,
        )
        cfg = report.config
        again = analyze_dataset(
            demo_sample,
            error_spec=cfg.error_spec,
            known_r=None,
            n_boot=cfg.n_boot,
            level=cfg.level,
            n_perm=cfg.n_perm,
            negate_change=cfg.negate_change,
            master_seed=cfg.master_seed,
        )
        assert canonical_json(analyze_doc(report)) == canonical_json(analyze_doc(again))
