"""Sample statistics and slope estimators for paired (x1, x2) data.

All slope estimators regress an (adjusted) change on the observed baseline
``x1`` and are computed from one shared set of sample moments (means,
``ddof=1`` variances and covariance), so the algebraic identities between
them hold to rounding error on any sample:

* crude:      slope of ``d = x2 - x1`` on ``x1``; equals ``cov12/var1 - 1``.
* Berry:      slope of ``d_B = (x2 - m2) - r*(x1 - m1)`` on ``x1``
              (Berry et al. 1984); equals ``crude + (1 - r)`` where ``r`` is
              the sample Pearson correlation.
* Blomqvist:  slope of ``d_e = (x2 - m2) + B*(x1 - m1)`` on ``x1``
              (Blomqvist 1977), where ``B`` depends on the measurement-error
              variance ``delta2`` supplied from outside the sample — either
              directly or as a repeatability ``R`` with
              ``delta2_hat = (1 - R) * var1_hat``; equals
              ``(crude*var1 + delta2) / (var1 - delta2)``.
* true:       slope of ``X2 - X1`` on ``X1`` for error-free (latent) pairs;
              the estimand benchmark in simulation studies.

The two ``delta2`` conventions differ in finite samples: the repeatability
form rescales the crude slope by ``1/R`` and is exactly unbiased for
``beta`` at every sample size (the crude slope's expectation is exactly
``(1 + beta)*R - 1``), while the absolute-``delta2`` plug-in form has a
small positive finite-sample ratio bias (~ +0.013 at n = 100 under the
systolic defaults).  Both are supported; see :class:`ErrorSpec`.

Pitman's (1939) test for equality of the x1 and x2 variances in paired data
is included because of its historical use as a regression-to-the-mean
screen: it correlates sums with differences.  It is *not* a test of "no
differential effect" — under ``beta = 0`` with innovation variance
``nu2 > 0`` the variance ratio is ``1 + nu2/var(x1) > 1`` and the test
rejects with power growing in ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats as _scipy_stats

from .errors import DegenerateSampleError, ParameterError
from .model import blomqvist_B_coefficient, blomqvist_invert
from .sampling import LatentSample, ObservedSample

__all__ = [
    "SLOPE_METHODS",
    "SampleStats",
    "SlopeEstimate",
    "ErrorSpec",
    "PitmanResult",
    "sample_stats",
    "crude_slope",
    "berry_slope",
    "blomqvist_slope",
    "true_slope",
    "pitman_test",
]

#: Slope-method names used in reports and requests.
SLOPE_METHODS = ("crude", "berry", "blomqvist", "true")


@dataclass(frozen=True)
class SampleStats:
    """Means, ``ddof=1`` variances/covariance and Pearson correlation."""

    n: int
    mean_x1: float
    mean_x2: float
    var_x1: float
    var_x2: float
    cov_x1x2: float
    pearson_r: float


@dataclass(frozen=True)
class SlopeEstimate:
    """One estimated slope plus method-specific auxiliary values."""

    method: str
    value: float
    auxiliary: dict


@dataclass(frozen=True)
class ErrorSpec:
    """Measurement-error specification for the Blomqvist correction.

    Exactly one of ``delta2`` (absolute error variance, >= 0) or
    ``repeatability`` (``R`` in (0, 1]; ``delta2`` is then re-derived from
    each sample as ``(1 - R) * var1_hat``) must be given.
    """

    delta2: Optional[float] = None
    repeatability: Optional[float] = None

    def __post_init__(self) -> None:
        if (self.delta2 is None) == (self.repeatability is None):
            raise ParameterError(
                "exactly one of delta2 or repeatability must be specified"
            )
        if self.delta2 is not None:
            value = float(self.delta2)
            if not math.isfinite(value) or value < 0:
                raise ParameterError(f"delta2 must be a finite variance >= 0, got {self.delta2!r}")
            object.__setattr__(self, "delta2", value)
        else:
            value = float(self.repeatability)
            if not math.isfinite(value) or not 0.0 < value <= 1.0:
                raise ParameterError(
                    f"repeatability must lie in (0, 1], got {self.repeatability!r}"
                )
            object.__setattr__(self, "repeatability", value)

    @property
    def kind(self) -> str:
        return "delta2" if self.delta2 is not None else "repeatability"

    def resolve_delta2(self, var_x1: float) -> float:
        """Effective error variance for a sample with baseline variance ``var_x1``."""
        if self.delta2 is not None:
            return self.delta2
        return (1.0 - self.repeatability) * var_x1


@dataclass(frozen=True)
class PitmanResult:
    """Pitman's paired equality-of-variances test: corr(x1+x2, x2-x1)."""

    statistic: float
    p_value: float
    n: int


def _moments(x1: np.ndarray, x2: np.ndarray) -> tuple[int, float, float, float, float, float]:
    n = int(x1.size)
    mean1 = float(np.mean(x1))
    mean2 = float(np.mean(x2))
    dev1 = x1 - mean1
    dev2 = x2 - mean2
    var1 = float(dev1 @ dev1) / (n - 1)
    var2 = float(dev2 @ dev2) / (n - 1)
    cov = float(dev1 @ dev2) / (n - 1)
    return n, mean1, mean2, var1, var2, cov


def sample_stats(obs: ObservedSample) -> SampleStats:
    """All first/second sample moments of ``(x1, x2)``.

    Raises
    ------
    DegenerateSampleError
        If either column has zero variance (Pearson correlation undefined).
    """
    n, mean1, mean2, var1, var2, cov = _moments(obs.x1, obs.x2)
    if var1 <= 0 or var2 <= 0:
        raise DegenerateSampleError(
            "Pearson correlation undefined: zero sample variance in "
            + ("x1" if var1 <= 0 else "x2")
        )
    return SampleStats(
        n=n,
        mean_x1=mean1,
        mean_x2=mean2,
        var_x1=var1,
        var_x2=var2,
        cov_x1x2=cov,
        pearson_r=cov / math.sqrt(var1 * var2),
    )


def crude_slope(obs: ObservedSample) -> SlopeEstimate:
    """Slope of the observed change ``x2 - x1`` on ``x1``: ``cov12/var1 - 1``.

    Raises
    ------
    DegenerateSampleError
        If ``var(x1) = 0``.
    """
    _, _, _, var1, _, cov = _moments(obs.x1, obs.x2)
    if var1 <= 0:
        raise DegenerateSampleError("crude slope undefined: zero sample variance in x1")
    return SlopeEstimate(method="crude", value=cov / var1 - 1.0, auxiliary={"var_x1": var1})


def berry_slope(obs: ObservedSample) -> tuple[np.ndarray, SlopeEstimate]:
    """Berry-adjusted change and its slope on ``x1``.

    Returns the adjusted-change vector ``d_B = (x2 - m2) - r*(x1 - m1)`` and
    the estimate ``crude + (1 - r)``; regressing the returned vector on
    ``x1`` reproduces the estimate to rounding error.

    Raises
    ------
    DegenerateSampleError
        If either column has zero variance (``r`` undefined).
    """
    stats = sample_stats(obs)
    r = stats.pearson_r
    crude = stats.cov_x1x2 / stats.var_x1 - 1.0
    value = crude + (1.0 - r)
    adjusted = (obs.x2 - stats.mean_x2) - r * (obs.x1 - stats.mean_x1)
    return adjusted, SlopeEstimate(
        method="berry", value=value, auxiliary={"pearson_r": r, "crude": crude}
    )


def blomqvist_slope(
    obs: ObservedSample, error_spec: ErrorSpec
) -> tuple[np.ndarray, SlopeEstimate]:
    """Blomqvist-corrected change and its slope on ``x1``.

    The crude slope is de-attenuated with the externally supplied error
    variance: ``(crude*var1 + delta2) / (var1 - delta2)``, with ``delta2``
    resolved from ``error_spec`` (possibly via the sample's own ``var1``
    for a repeatability-form ``error_spec``).  Returns the adjusted-change vector
    ``d_e = (x2 - m2) + B*(x1 - m1)`` and the estimate; regressing the
    returned vector on ``x1`` reproduces the estimate to rounding error.

    Raises
    ------
    DegenerateSampleError
        If ``var(x1) = 0``.
    SingularityError
        If the resolved ``delta2 >= var1`` (estimated signal variance
        non-positive).
    """
    _, mean1, mean2, var1, _, cov = _moments(obs.x1, obs.x2)
    if var1 <= 0:
        raise DegenerateSampleError("Blomqvist slope undefined: zero sample variance in x1")
    crude = cov / var1 - 1.0
    delta2 = error_spec.resolve_delta2(var1)
    value = blomqvist_invert(crude, var1, delta2)
    B = blomqvist_B_coefficient(crude, var1, delta2)
    adjusted = (obs.x2 - mean2) + B * (obs.x1 - mean1)
    return adjusted, SlopeEstimate(
        method="blomqvist",
        value=value,
        auxiliary={
            "B": B,
            "delta2": delta2,
            "error_spec_kind": error_spec.kind,
            "crude": crude,
        },
    )


def true_slope(latent: LatentSample) -> SlopeEstimate:
    """Slope of the latent change ``X2 - X1`` on ``X1`` (simulation benchmark).

    Raises
    ------
    DegenerateSampleError
        If ``var(X1) = 0``.
    """
    _, _, _, var1, _, cov = _moments(latent.X1, latent.X2)
    if var1 <= 0:
        raise DegenerateSampleError("true slope undefined: zero sample variance in X1")
    return SlopeEstimate(method="true", value=cov / var1 - 1.0, auxiliary={"var_X1": var1})


def pitman_test(obs: ObservedSample) -> PitmanResult:
    """Pitman's test for ``var(x2) = var(x1)`` in paired data.

    The statistic is the Pearson correlation of ``x1 + x2`` with
    ``x1 - x2``; under the equal-variance null it follows the usual
    correlation null distribution, so the p-value is two-sided Student-t
    with ``n - 2`` degrees of freedom.  When the sums or the differences
    are exactly constant (e.g. ``x2 = x1 + c``), the statistic is 0 and the
    p-value 1.

    This is *not* a test of "no differential effect": under ``beta = 0``
    with ``nu2 > 0`` the population variance ratio exceeds 1.

    Raises
    ------
    DegenerateSampleError
        If ``n < 3`` or either column has zero variance.
    """
    n, _, _, var1, var2, _ = _moments(obs.x1, obs.x2)
    if n < 3:
        raise DegenerateSampleError(f"Pitman's test needs n >= 3, got n = {n}")
    if var1 <= 0 or var2 <= 0:
        raise DegenerateSampleError(
            "Pitman's test undefined: zero sample variance in "
            + ("x1" if var1 <= 0 else "x2")
        )
    sums = obs.x1 + obs.x2
    diffs = obs.x1 - obs.x2
    _, _, _, var_s, var_d, cov_sd = _moments(sums, diffs)
    if var_s <= 0 or var_d <= 0:
        return PitmanResult(statistic=0.0, p_value=1.0, n=n)
    r = cov_sd / math.sqrt(var_s * var_d)
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return PitmanResult(statistic=r, p_value=0.0, n=n)
    t = r * math.sqrt(n - 2) / math.sqrt(1.0 - r * r)
    p = 2.0 * float(_scipy_stats.t.sf(abs(t), df=n - 2))
    return PitmanResult(statistic=r, p_value=min(1.0, p), n=n)
