"""Resampling inference for change-on-baseline slopes.

Bootstrap
---------
:func:`bootstrap_slope` resamples whole ``(x1, x2)`` pairs with replacement
(Efron & Tibshirani 1993), recomputes the requested slope estimator on each
resample — including re-resolving a repeatability-type error spec against
the resample's own baseline variance — and forms a percentile confidence
interval.  Quantiles are type-1 (inverse ECDF): the ``p``-quantile of ``m``
sorted values is the ``k``-th order statistic with ``k = ceil(p*m)``, taking
the lower order statistic at exact boundaries.  Degenerate resamples (zero
baseline variance; zero follow-up variance for the Berry estimator;
non-positive estimated signal variance for the Blomqvist estimator) are
dropped and counted; a warning flag is raised when more than 1% of the
requested replicates fail.

Repeatability interval
----------------------
Under no differential effect the crude slope has expectation ``R - 1``, so a
crude-slope confidence interval ``[lo, hi]`` translates into the set of
repeatability values that would *not* be rejected:
``[1 + lo, 1 + hi] ∩ (0, 1]``.  :func:`nonrejection_repeatability` performs
that interval arithmetic; :func:`test_null_given_R` gives the point decision
when ``R`` is known.

Permutation test
----------------
:func:`permutation_test_independence` tests independence of ``x1`` and
``x2`` by permuting the ``x2`` column and comparing absolute Pearson
correlations, with the add-one Monte Carlo correction
``p = (1 + #{|r_perm| >= |r_obs|}) / (n_perm + 1)``.  Independence of the
two occasions corresponds to ``beta = -1`` in the change model (the trait
carries nothing over), *not* to "no differential effect" — the report
labels carry that caveat.

All randomness comes from the caller-supplied generator; resampling-index
and permutation matrices are drawn in fixed-size chunks whose layout is a
pure function of the problem size, so results are reproducible from the
seed alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    DegenerateSampleError,
    InferenceFailureError,
    ParameterError,
    UsageError,
)
from .estimators import ErrorSpec, berry_slope, blomqvist_slope, crude_slope
from .sampling import ObservedSample

__all__ = [
    "BOOTSTRAP_METHODS",
    "BootstrapResult",
    "RepeatabilityInterval",
    "NullDecision",
    "PermutationResult",
    "type1_quantile",
    "bootstrap_slope",
    "nonrejection_repeatability",
    "test_null_given_R",
    "permutation_test_independence",
]

#: Methods supported by :func:`bootstrap_slope` (the true slope needs latent data).
BOOTSTRAP_METHODS = ("crude", "berry", "blomqvist")

#: Target element count for resampling chunks; the chunk layout is a pure
#: function of (replicates, n), keeping results independent of memory size.
_CHUNK_TARGET = 4_000_000

#: Fraction of failed replicates above which a warning is raised.
_FAILURE_WARNING_FRACTION = 0.01


@dataclass(frozen=True)
class BootstrapResult:
    """Percentile-bootstrap summary for one slope method.

    ``replicates`` holds the successful replicate estimates in generation
    order (length ``n_boot - n_failed``).
    """

    method: str
    point_estimate: float
    level: float
    ci_low: float
    ci_high: float
    n_boot: int
    n_failed: int
    failure_warning: bool
    replicates: np.ndarray


@dataclass(frozen=True)
class RepeatabilityInterval:
    """Repeatability values not rejected by a crude-slope confidence interval.

    ``low``/``high`` are ``None`` when ``empty`` is true.  ``low_open``
    marks clipping at 0 (repeatability must be positive, so a reported low
    endpoint of 0 is open).
    """

    low: Optional[float]
    high: Optional[float]
    empty: bool
    low_open: bool


@dataclass(frozen=True)
class NullDecision:
    """Decision on 'no differential effect' given a known repeatability."""

    method: str
    repeatability: float
    null_value: float
    ci_low: float
    ci_high: float
    rejected: bool


@dataclass(frozen=True)
class PermutationResult:
    """Monte Carlo permutation test of x1-x2 independence (beta = -1)."""

    observed_statistic: float
    p_value: float
    n_permutations: int


def type1_quantile(values: np.ndarray, p: float) -> float:
    """Type-1 (inverse-ECDF) quantile: ``k = ceil(p*m)``-th order statistic.

    At exact boundaries (``p*m`` integral) the lower order statistic is
    taken; a small absolute epsilon guards against ``p*m`` landing a hair
    above an integer in floating point.
    """
    if not 0.0 < p < 1.0:
        raise ParameterError(f"quantile level must lie in (0, 1), got {p!r}")
    arr = np.sort(np.asarray(values, dtype=np.float64))
    if arr.size == 0:
        raise ParameterError("quantile of an empty sequence is undefined")
    return _type1_from_sorted(arr, p)


def _type1_from_sorted(sorted_values: np.ndarray, p: float) -> float:
    m = sorted_values.size
    k = math.ceil(p * m - 1e-9)
    k = min(max(k, 1), m)
    return float(sorted_values[k - 1])


def _chunk_sizes(total: int, n: int) -> list[int]:
    rows = max(1, _CHUNK_TARGET // max(n, 1))
    sizes = []
    remaining = total
    while remaining > 0:
        take = min(rows, remaining)
        sizes.append(take)
        remaining -= take
    return sizes


def _row_moments(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row-wise ddof=1 variances and covariance of two equally shaped matrices."""
    n = a.shape[1]
    dev_a = a - a.mean(axis=1, keepdims=True)
    dev_b = b - b.mean(axis=1, keepdims=True)
    var_a = np.einsum("ij,ij->i", dev_a, dev_a) / (n - 1)
    var_b = np.einsum("ij,ij->i", dev_b, dev_b) / (n - 1)
    cov = np.einsum("ij,ij->i", dev_a, dev_b) / (n - 1)
    return var_a, var_b, cov


def bootstrap_slope(
    obs: ObservedSample,
    method: str,
    *,
    error_spec: Optional[ErrorSpec] = None,
    n_boot: int = 10_000,
    level: float = 0.95,
    rng: np.random.Generator,
) -> BootstrapResult:
    """Percentile bootstrap of one slope estimator on paired data.

    Pairs are resampled with replacement; the estimator is fully recomputed
    on each resample (a repeatability-type ``error_spec`` resolves its
    ``delta2`` against each resample's own baseline variance).

    Raises
    ------
    ParameterError
        If ``n_boot < 100`` or ``level`` is not inside (0, 1).
    UsageError
        If ``method`` is unknown, or ``error_spec`` presence does not match
        the method (required for Blomqvist, meaningless otherwise).
    InferenceFailureError
        If every resample was degenerate.
    """
    if method not in BOOTSTRAP_METHODS:
        raise UsageError(
            f"unknown bootstrap method {method!r}; expected one of {BOOTSTRAP_METHODS}"
        )
    if not isinstance(n_boot, (int, np.integer)) or isinstance(n_boot, bool):
        raise ParameterError(f"n_boot must be an integer, got {n_boot!r}")
    n_boot = int(n_boot)
    if n_boot < 100:
        raise ParameterError(f"n_boot must be >= 100, got {n_boot}")
    if not (isinstance(level, (int, float)) and 0.0 < float(level) < 1.0):
        raise ParameterError(f"level must lie in (0, 1), got {level!r}")
    level = float(level)
    if method == "blomqvist":
        if error_spec is None:
            raise UsageError("the Blomqvist bootstrap requires an error_spec")
    elif error_spec is not None:
        raise UsageError(f"error_spec is only meaningful for the Blomqvist method, not {method!r}")

    # Point estimate on the original sample (propagates estimator errors).
    if method == "crude":
        point = crude_slope(obs).value
    elif method == "berry":
        point = berry_slope(obs)[1].value
    else:
        point = blomqvist_slope(obs, error_spec)[1].value

    n = obs.n
    x1 = obs.x1
    x2 = obs.x2
    kept: list[np.ndarray] = []
    n_failed = 0
    for rows in _chunk_sizes(n_boot, n):
        idx = rng.integers(0, n, size=(rows, n))
        v1, v2, cov = _row_moments(x1[idx], x2[idx])
        valid = v1 > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            crude = cov / v1 - 1.0
            if method == "crude":
                values = crude
            elif method == "berry":
                valid &= v2 > 0
                r = cov / np.sqrt(v1 * v2)
                values = crude + (1.0 - r)
            else:
                delta2 = (
                    np.full(rows, error_spec.delta2)
                    if error_spec.delta2 is not None
                    else (1.0 - error_spec.repeatability) * v1
                )
                signal = v1 - delta2
                valid &= signal > 0
                values = (crude * v1 + delta2) / signal
        kept.append(values[valid])
        n_failed += int(rows - valid.sum())

    replicates = np.concatenate(kept) if kept else np.empty(0)
    if replicates.size == 0:
        raise InferenceFailureError(
            f"all {n_boot} bootstrap resamples were degenerate for method {method!r}"
        )
    sorted_reps = np.sort(replicates)
    alpha = 1.0 - level
    ci_low = _type1_from_sorted(sorted_reps, alpha / 2.0)
    ci_high = _type1_from_sorted(sorted_reps, 1.0 - alpha / 2.0)
    replicates = replicates.copy()
    replicates.flags.writeable = False
    return BootstrapResult(
        method=method,
        point_estimate=point,
        level=level,
        ci_low=ci_low,
        ci_high=ci_high,
        n_boot=n_boot,
        n_failed=n_failed,
        failure_warning=n_failed > _FAILURE_WARNING_FRACTION * n_boot,
        replicates=replicates,
    )


def nonrejection_repeatability(ci_low: float, ci_high: float) -> RepeatabilityInterval:
    """Repeatability values compatible with a crude-slope confidence interval.

    A repeatability ``R`` is not rejected when ``R - 1`` lies inside
    ``[ci_low, ci_high]``; intersecting with the admissible range ``(0, 1]``
    gives ``[max(0, 1 + ci_low), min(1, 1 + ci_high)]``, empty when
    ``1 + ci_high <= 0`` or ``1 + ci_low > 1``, and open at a low endpoint
    of 0.
    """
    for name, value in (("ci_low", ci_low), ("ci_high", ci_high)):
        if not (isinstance(value, (int, float)) and math.isfinite(float(value))):
            raise ParameterError(f"{name} must be a finite real number, got {value!r}")
    ci_low = float(ci_low)
    ci_high = float(ci_high)
    if ci_low > ci_high:
        raise ParameterError(
            f"ci_low must not exceed ci_high, got [{ci_low!r}, {ci_high!r}]"
        )
    lo_raw = 1.0 + ci_low
    hi_raw = 1.0 + ci_high
    if hi_raw <= 0.0 or lo_raw > 1.0:
        return RepeatabilityInterval(low=None, high=None, empty=True, low_open=False)
    return RepeatabilityInterval(
        low=max(0.0, lo_raw),
        high=min(1.0, hi_raw),
        empty=False,
        low_open=lo_raw <= 0.0,
    )


def test_null_given_R(boot: BootstrapResult, repeatability: float) -> NullDecision:
    """Decide 'no differential effect' from a crude-slope bootstrap and known R.

    The null value of the crude slope is ``R - 1``; the null is rejected
    when that value falls outside the bootstrap confidence interval.

    Raises
    ------
    UsageError
        If ``boot`` is not a crude-slope bootstrap.
    ParameterError
        If ``repeatability`` is outside (0, 1].
    """
    if boot.method != "crude":
        raise UsageError(
            f"the given-R null decision needs a crude-slope bootstrap, got {boot.method!r}"
        )
    r = repeatability
    if not (isinstance(r, (int, float)) and math.isfinite(float(r)) and 0.0 < float(r) <= 1.0):
        raise ParameterError(f"repeatability must lie in (0, 1], got {repeatability!r}")
    r = float(r)
    null_value = r - 1.0
    rejected = not (boot.ci_low <= null_value <= boot.ci_high)
    return NullDecision(
        method=boot.method,
        repeatability=r,
        null_value=null_value,
        ci_low=boot.ci_low,
        ci_high=boot.ci_high,
        rejected=rejected,
    )


def permutation_test_independence(
    obs: ObservedSample, n_perm: int, rng: np.random.Generator
) -> PermutationResult:
    """Two-sided Monte Carlo permutation test of x1-x2 independence.

    The ``x2`` column is permuted ``n_perm`` times; the statistic is the
    Pearson correlation, compared in absolute value; the p-value uses the
    add-one correction.  In the change model, independence means the trait
    carries nothing from baseline to follow-up, i.e. ``beta = -1``; a small
    p-value does *not* indicate a differential effect.

    Raises
    ------
    ParameterError
        If ``n_perm < 99``.
    DegenerateSampleError
        If ``n < 3`` or either column has zero variance.
    """
    if not isinstance(n_perm, (int, np.integer)) or isinstance(n_perm, bool):
        raise ParameterError(f"n_perm must be an integer, got {n_perm!r}")
    n_perm = int(n_perm)
    if n_perm < 99:
        raise ParameterError(f"n_perm must be >= 99, got {n_perm}")
    n = obs.n
    if n < 3:
        raise DegenerateSampleError(f"the permutation test needs n >= 3, got n = {n}")

    x1 = obs.x1
    x2 = obs.x2
    dev1 = x1 - x1.mean()
    ss1 = float(dev1 @ dev1)
    dev2 = x2 - x2.mean()
    ss2 = float(dev2 @ dev2)
    if ss1 <= 0 or ss2 <= 0:
        raise DegenerateSampleError(
            "permutation test undefined: zero sample variance in "
            + ("x1" if ss1 <= 0 else "x2")
        )
    scale = math.sqrt(ss1 * ss2)
    r_obs = float(dev1 @ dev2) / scale

    # |corr| of permuted columns; means and sums of squares are permutation-
    # invariant, so each permuted correlation is one inner product.
    exceed = 0
    for rows in _chunk_sizes(n_perm, n):
        block = np.tile(dev2, (rows, 1))
        rng.permuted(block, axis=1, out=block)
        r_perm = block @ dev1 / scale
        exceed += int(np.count_nonzero(np.abs(r_perm) >= abs(r_obs)))
    p = (1.0 + exceed) / (n_perm + 1.0)
    return PermutationResult(
        observed_statistic=r_obs, p_value=min(1.0, p), n_permutations=n_perm
    )
