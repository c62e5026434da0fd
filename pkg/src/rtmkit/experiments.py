"""Reproducible simulation studies and the end-to-end analysis pipeline.

Every experiment is a pure function of its configuration plus a master seed:
replicate ``i`` of an experiment uses the stream
``SeedSpec(master_seed, role_or_replicate_index)`` (see
:mod:`rtmkit.sampling`), so results are identical across reruns and
independent of evaluation order.  Fixed stream roles inside
:func:`analyze_dataset` (1 = crude bootstrap, 2 = Blomqvist bootstrap,
3 = permutation test; 0 is reserved for demo sample draws) guarantee that
adding or removing the optional Blomqvist analysis leaves the crude and
Berry sections of a report bit-identical.

Experiments
-----------
* :func:`run_sampling_distribution` — sampling distribution of the four
  slope estimators (crude, Berry, Blomqvist, true) over many draws from one
  population.
* :func:`run_head_to_head` — for a grid of differential effects ``beta``,
  the probability that the *uncorrected* crude slope lands closer to the
  true ``beta`` than each corrected estimator: corrections are not free, and
  near ``beta = -1`` (where the crude slope is unbiased) or under heavy
  error the correction can lose more often than it wins.
* :func:`run_bootstrap_demo` — one synthetic dataset analyzed end to end.
* :func:`analyze_dataset` — the full pipeline on user data: sample
  statistics, all applicable slopes, percentile bootstraps, the
  non-rejection repeatability interval, independence and variance-equality
  tests (with pitfall-labeled nulls), and an optional given-R decision.

Defaults follow desk-scale practice: when no measurement-error spec is
given, synthetic experiments use the scale-free repeatability form of the
generative truth, ``ErrorSpec(repeatability = sigma2/(sigma2+delta2))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DegenerateSampleError,
    InferenceFailureError,
    ParameterError,
    SingularityError,
)
from .estimators import (
    ErrorSpec,
    PitmanResult,
    SampleStats,
    SlopeEstimate,
    berry_slope,
    blomqvist_slope,
    crude_slope,
    pitman_test,
    sample_stats,
    true_slope,
)
from .inference import (
    BootstrapResult,
    NullDecision,
    PermutationResult,
    RepeatabilityInterval,
    bootstrap_slope,
    nonrejection_repeatability,
    permutation_test_independence,
    test_null_given_R,
    type1_quantile,
)
from .model import PopulationParams
from .sampling import ObservedSample, SeedSpec, derive_stream, draw_sample

__all__ = [
    "MethodSummary",
    "SamplingDistReport",
    "HeadToHeadRow",
    "HeadToHeadReport",
    "AnalyzeConfig",
    "AnalyzeReport",
    "BERRY_NULL_WARNING",
    "BERRY_NULL_FORM_WARNING",
    "PERMUTATION_NULL_LABEL",
    "PITMAN_NULL_LABEL",
    "run_sampling_distribution",
    "run_head_to_head",
    "run_bootstrap_demo",
    "analyze_dataset",
]

# Fixed stream roles (replicate_index values) inside analyze_dataset.
_ROLE_DEMO_SAMPLE = 0
_ROLE_BOOT_CRUDE = 1
_ROLE_BOOT_BLOMQVIST = 2
_ROLE_PERMUTATION = 3

BERRY_NULL_WARNING = (
    "Berry-adjusted slope: its expectation under 'no differential effect' is "
    "not 0 whenever the change carries innovation variance; compare it against "
    "the change-model null value (Berry population slope at beta = 0), never "
    "against 0."
)

BERRY_NULL_FORM_WARNING = (
    "A bivariate-normal closed form sometimes quoted for the Berry null value "
    "disagrees with the change-model evaluation; Monte Carlo supports the "
    "change-model value. The population report shows both values side by side."
)

PERMUTATION_NULL_LABEL = (
    "x1 independent of x2 (beta = -1); not a test of 'no differential effect'"
)

PITMAN_NULL_LABEL = (
    "var(x2) = var(x1); under 'no differential effect' the ratio is "
    "1 + nu2/var(x1) > 1, so this is not a test of beta = 0"
)


@dataclass(frozen=True)
class MethodSummary:
    """Location/spread/quartile summary of one estimator's sampling distribution."""

    mean: float
    variance: float
    min: float
    q1: float
    median: float
    q3: float
    max: float
    n_failed: int


@dataclass(frozen=True)
class SamplingDistReport:
    """Sampling distributions of the slope estimators under one population."""

    params: PopulationParams
    n: int
    replicates: int
    master_seed: int
    error_spec: ErrorSpec
    methods: dict  # method name -> MethodSummary


@dataclass(frozen=True)
class HeadToHeadRow:
    """Win probabilities of the crude slope against corrections at one beta."""

    beta: float
    p_crude_beats_berry: float
    p_crude_beats_blomqvist: float
    n_failed: int


@dataclass(frozen=True)
class HeadToHeadReport:
    """Crude-vs-corrections accuracy comparison over a beta grid."""

    params: PopulationParams
    n: int
    replicates: int
    master_seed: int
    error_spec: ErrorSpec
    beta_grid: tuple[float, ...]
    rows: tuple[HeadToHeadRow, ...]


@dataclass(frozen=True)
class AnalyzeConfig:
    """Everything needed to reproduce an analysis bit for bit."""

    n: int
    n_boot: int
    level: float
    n_perm: int
    master_seed: int
    negate_change: bool
    error_spec: Optional[ErrorSpec]
    known_r: Optional[float]
    known_r_source: Optional[str]
    params: Optional[PopulationParams] = None


@dataclass(frozen=True)
class AnalyzeReport:
    """Full analysis of one paired dataset.

    With ``config.negate_change`` true, slope values, bootstrap intervals and
    the decision section are reported for the negated change ``x1 - x2``
    (attrition convention); sample statistics, estimator auxiliaries, the
    repeatability interval (which always refers to the ``x2 - x1`` crude
    slope) and the two tests stay in the ``x2 - x1`` convention.
    """

    config: AnalyzeConfig
    stats: SampleStats
    slopes: dict  # method name -> SlopeEstimate
    bootstrap: dict  # method name -> BootstrapResult
    repeatability_interval: RepeatabilityInterval
    tests: dict  # "pitman" -> PitmanResult, "permutation" -> PermutationResult
    decision: Optional[NullDecision]
    warnings: tuple


def _default_error_spec(params: PopulationParams) -> ErrorSpec:
    if params.delta2 == 0:
        return ErrorSpec(repeatability=1.0)
    return ErrorSpec(repeatability=params.repeatability)


def _validate_counts(n: int, replicates: int) -> tuple[int, int]:
    for name, value, minimum in (("n", n, 10), ("replicates", replicates, 100)):
        if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
            raise ParameterError(f"{name} must be an integer, got {value!r}")
        if int(value) < minimum:
            raise ParameterError(f"{name} must be >= {minimum}, got {int(value)}")
    return int(n), int(replicates)


def _summary(values: np.ndarray, n_failed: int, method: str) -> MethodSummary:
    if values.size == 0:
        raise InferenceFailureError(
            f"every replicate failed for method {method!r}; nothing to summarize"
        )
    return MethodSummary(
        mean=float(values.mean()),
        variance=float(values.var(ddof=1)) if values.size > 1 else 0.0,
        min=float(values.min()),
        q1=type1_quantile(values, 0.25),
        median=type1_quantile(values, 0.50),
        q3=type1_quantile(values, 0.75),
        max=float(values.max()),
        n_failed=n_failed,
    )


def run_sampling_distribution(
    params: PopulationParams,
    n: int = 100,
    replicates: int = 1000,
    error_spec: Optional[ErrorSpec] = None,
    master_seed: int = 0,
) -> SamplingDistReport:
    """Sampling distributions of crude, Berry, Blomqvist and true slopes.

    Replicate ``i`` draws a fresh sample of size ``n`` from stream
    ``SeedSpec(master_seed, i)`` and computes all four estimators; estimator
    failures (degenerate resample, singular correction) are counted per
    method and excluded from its summary.  ``error_spec`` defaults to the
    repeatability form of the generative truth.
    """
    n, replicates = _validate_counts(n, replicates)
    if error_spec is None:
        error_spec = _default_error_spec(params)

    values = {method: np.full(replicates, np.nan) for method in ("crude", "berry", "blomqvist", "true")}
    for i in range(replicates):
        rng = derive_stream(SeedSpec(master_seed, i))
        latent, obs = draw_sample(params, n, rng)
        try:
            values["crude"][i] = crude_slope(obs).value
        except DegenerateSampleError:
            pass
        try:
            values["berry"][i] = berry_slope(obs)[1].value
        except DegenerateSampleError:
            pass
        try:
            values["blomqvist"][i] = blomqvist_slope(obs, error_spec)[1].value
        except (DegenerateSampleError, SingularityError):
            pass
        try:
            values["true"][i] = true_slope(latent).value
        except DegenerateSampleError:
            pass

    methods = {}
    for method, arr in values.items():
        good = arr[np.isfinite(arr)]
        methods[method] = _summary(good, int(replicates - good.size), method)
    return SamplingDistReport(
        params=params,
        n=n,
        replicates=replicates,
        master_seed=int(master_seed),
        error_spec=error_spec,
        methods=methods,
    )


def run_head_to_head(
    params: PopulationParams,
    beta_grid: Optional[Sequence[float]] = None,
    n: int = 100,
    replicates: int = 10_000,
    master_seed: int = 0,
    error_spec: Optional[ErrorSpec] = None,
) -> HeadToHeadReport:
    """P(crude closer to the true beta than each correction), per beta.

    For each ``beta`` in the grid (default -2.0 to 0.5 in steps of 0.1) and
    each replicate, a sample of size ``n`` is drawn from
    ``replace(params, beta=beta)`` using stream
    ``SeedSpec(master_seed, beta_index*replicates + replicate)``; the
    absolute errors ``|estimate - beta|`` of the crude, Berry and Blomqvist
    estimators are compared.  Replicates where any estimator fails are
    excluded from both probabilities and counted in ``n_failed``.
    """
    n, replicates = _validate_counts(n, replicates)
    if beta_grid is None:
        beta_grid = [round(-2.0 + 0.1 * k, 10) for k in range(26)]
    betas = [float(b) for b in beta_grid]
    if not betas:
        raise ParameterError("beta_grid must not be empty")
    for b in betas:
        if not math.isfinite(b):
            raise ParameterError(f"beta grid values must be finite, got {b!r}")
    if error_spec is None:
        error_spec = _default_error_spec(params)

    rows = []
    for bi, beta in enumerate(betas):
        cell = params.with_beta(beta)
        wins_berry = 0
        wins_blomqvist = 0
        valid = 0
        for rep in range(replicates):
            rng = derive_stream(SeedSpec(master_seed, bi * replicates + rep))
            _, obs = draw_sample(cell, n, rng)
            try:
                err_crude = abs(crude_slope(obs).value - beta)
                err_berry = abs(berry_slope(obs)[1].value - beta)
                err_blomqvist = abs(blomqvist_slope(obs, error_spec)[1].value - beta)
            except (DegenerateSampleError, SingularityError):
                continue
            valid += 1
            wins_berry += err_crude < err_berry
            wins_blomqvist += err_crude < err_blomqvist
        if valid == 0:
            raise InferenceFailureError(
                f"every replicate failed at beta = {beta}; cannot form win probabilities"
            )
        rows.append(
            HeadToHeadRow(
                beta=beta,
                p_crude_beats_berry=wins_berry / valid,
                p_crude_beats_blomqvist=wins_blomqvist / valid,
                n_failed=replicates - valid,
            )
        )
    return HeadToHeadReport(
        params=params,
        n=n,
        replicates=replicates,
        master_seed=int(master_seed),
        error_spec=error_spec,
        beta_grid=tuple(betas),
        rows=tuple(rows),
    )


def _negate_bootstrap(boot: BootstrapResult) -> BootstrapResult:
    flipped = -boot.replicates
    flipped.flags.writeable = False
    return replace(
        boot,
        point_estimate=-boot.point_estimate,
        ci_low=-boot.ci_high,
        ci_high=-boot.ci_low,
        replicates=flipped,
    )


def analyze_dataset(
    obs: ObservedSample,
    *,
    error_spec: Optional[ErrorSpec] = None,
    known_r: Optional[float] = None,
    n_boot: int = 10_000,
    level: float = 0.95,
    n_perm: int = 999,
    negate_change: bool = False,
    master_seed: int = 0,
    generating_params: Optional[PopulationParams] = None,
    extra_warnings: Sequence[str] = (),
) -> AnalyzeReport:
    """Full change-vs-baseline analysis of one paired dataset.

    Always computes sample statistics, crude and Berry slopes, a crude-slope
    percentile bootstrap, the non-rejection repeatability interval, Pitman's
    variance-equality test and the x1-x2 independence permutation test.
    When ``error_spec`` is given, adds the Blomqvist slope and its
    bootstrap.  A given-R decision is made when a repeatability is
    available, resolved in order: explicit ``known_r``; a
    repeatability-form ``error_spec``; the value ``1 - delta2/var1_hat``
    implied by an absolute-``delta2`` spec.

    ``generating_params`` is only for synthetic demos: it embeds the true
    population in the report config.  ``extra_warnings`` (e.g. from CSV
    ingestion) are prepended to the report's warning list.
    """
    stats = sample_stats(obs)

    slopes = {"crude": crude_slope(obs), "berry": berry_slope(obs)[1]}
    if error_spec is not None:
        slopes["blomqvist"] = blomqvist_slope(obs, error_spec)[1]

    bootstrap = {
        "crude": bootstrap_slope(
            obs,
            "crude",
            n_boot=n_boot,
            level=level,
            rng=derive_stream(SeedSpec(master_seed, _ROLE_BOOT_CRUDE)),
        )
    }
    if error_spec is not None:
        bootstrap["blomqvist"] = bootstrap_slope(
            obs,
            "blomqvist",
            error_spec=error_spec,
            n_boot=n_boot,
            level=level,
            rng=derive_stream(SeedSpec(master_seed, _ROLE_BOOT_BLOMQVIST)),
        )

    interval = nonrejection_repeatability(bootstrap["crude"].ci_low, bootstrap["crude"].ci_high)

    tests = {
        "pitman": pitman_test(obs),
        "permutation": permutation_test_independence(
            obs, n_perm, derive_stream(SeedSpec(master_seed, _ROLE_PERMUTATION))
        ),
    }

    if known_r is not None:
        known_r_value, known_r_source = float(known_r), "explicit"
    elif error_spec is not None and error_spec.repeatability is not None:
        known_r_value, known_r_source = error_spec.repeatability, "error_spec"
    elif error_spec is not None:
        known_r_value = 1.0 - error_spec.delta2 / stats.var_x1
        known_r_source = "implied_from_delta2"
    else:
        known_r_value, known_r_source = None, None

    decision = (
        test_null_given_R(bootstrap["crude"], known_r_value)
        if known_r_value is not None
        else None
    )

    if negate_change:
        slopes = {
            method: replace(est, value=-est.value) for method, est in slopes.items()
        }
        bootstrap = {method: _negate_bootstrap(b) for method, b in bootstrap.items()}
        if decision is not None:
            decision = NullDecision(
                method=decision.method,
                repeatability=decision.repeatability,
                null_value=-decision.null_value,
                ci_low=-decision.ci_high,
                ci_high=-decision.ci_low,
                rejected=decision.rejected,
            )

    warnings = list(extra_warnings)
    warnings.append(BERRY_NULL_WARNING)
    warnings.append(BERRY_NULL_FORM_WARNING)
    for method in ("crude", "blomqvist"):
        boot = bootstrap.get(method)
        if boot is not None and boot.failure_warning:
            warnings.append(
                f"{method} bootstrap: {boot.n_failed} of {boot.n_boot} resamples "
                "were degenerate and were dropped (more than 1%); treat the "
                "interval with caution."
            )

    config = AnalyzeConfig(
        n=stats.n,
        n_boot=bootstrap["crude"].n_boot,
        level=bootstrap["crude"].level,
        n_perm=tests["permutation"].n_permutations,
        master_seed=int(master_seed),
        negate_change=bool(negate_change),
        error_spec=error_spec,
        known_r=known_r_value,
        known_r_source=known_r_source,
        params=generating_params,
    )
    return AnalyzeReport(
        config=config,
        stats=stats,
        slopes=slopes,
        bootstrap=bootstrap,
        repeatability_interval=interval,
        tests=tests,
        decision=decision,
        warnings=tuple(warnings),
    )


def run_bootstrap_demo(
    params: PopulationParams,
    n: int = 100,
    n_boot: int = 10_000,
    level: float = 0.95,
    n_perm: int = 999,
    master_seed: int = 0,
    error_spec: Optional[ErrorSpec] = None,
    known_r: Optional[float] = None,
) -> AnalyzeReport:
    """Draw one synthetic dataset and analyze it end to end.

    The sample comes from stream ``SeedSpec(master_seed, 0)``; the analysis
    then proceeds exactly as :func:`analyze_dataset` with the same master
    seed.  Because the population is known, ``known_r`` defaults to the true
    repeatability, demonstrating the given-R decision against the
    generative truth.  No Blomqvist analysis is run unless ``error_spec``
    is supplied.
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or int(n) < 10:
        raise ParameterError(f"n must be an integer >= 10, got {n!r}")
    rng = derive_stream(SeedSpec(master_seed, _ROLE_DEMO_SAMPLE))
    _, obs = draw_sample(params, int(n), rng)
    if known_r is None:
        known_r = params.repeatability
    return analyze_dataset(
        obs,
        error_spec=error_spec,
        known_r=known_r,
        n_boot=n_boot,
        level=level,
        n_perm=n_perm,
        master_seed=master_seed,
        generating_params=params,
    )
