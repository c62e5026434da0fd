"""Closed-form population theory for change-vs-baseline analysis.

Generative change model
-----------------------
A latent trait ``X1 ~ Normal(mu, sigma2)`` evolves to

    X2 = X1 + (alpha + beta * X1) + xi,      xi  ~ Normal(0, nu2)

and both occasions are observed with independent measurement error

    x1 = X1 + e1,   x2 = X2 + e2,            e1, e2 ~ Normal(0, delta2)

``beta`` is the differential effect of interest: ``beta = 0`` means the true
change ``alpha + beta*X1 + xi`` does not depend on the baseline trait.

Regressing the observed change ``d = x2 - x1`` on the observed baseline
``x1`` gives the *crude* population slope

    beta_c = (beta * sigma2 - delta2) / (sigma2 + delta2)

which is biased toward -1 by measurement error: at ``beta = 0`` it equals
``R - 1`` where ``R = sigma2 / (sigma2 + delta2)`` is the test-retest
repeatability of the baseline measurement.  This is the classic regression-
to-the-mean artifact (Gardner & Heady 1973; Hayes 1988).

Two published corrections are modeled here:

* Berry et al. (1984) replace ``d`` with the adjusted change
  ``d_B = x2 - rho * x1`` (centered), where ``rho = corr(x1, x2)``.  Its
  population slope against ``x1`` is

      beta_B = (1 + beta) * sigma2 / (sigma2 + delta2) - rho
             = beta_c + (1 - rho).

  Crucially, ``beta_B`` is *not* zero under the null ``beta = 0`` whenever
  the change carries innovation variance ``nu2 > 0`` — comparing it against
  zero is a pitfall.  The correct null value is ``berry_slope_population``
  evaluated at ``beta = 0`` (see :func:`null_berry_slope`).  A bivariate-
  normal closed form sometimes quoted for this null,

      (delta2 / var_x1) * (1 / sqrt(1 + nu2 / var_x1) - 1),

  disagrees with the change-model value; Monte Carlo evaluation of the
  generative model supports the change-model value, so that closed form is
  exposed only as :func:`null_berry_slope_bivariate` for side-by-side
  reporting.

* Blomqvist (1977) inverts the attenuation analytically: given the crude
  slope and the error variance ``delta2``,

      beta = (beta_c * var_x1 + delta2) / (var_x1 - delta2),

  with ``var_x1 = sigma2 + delta2``.  Equivalently the adjusted change
  ``d_e = (x2 - mean(x2)) + B * (x1 - mean(x1))`` with

      B = (1 + beta_c) * delta2 / (var_x1 - delta2) - 1

  has population slope ``beta`` against ``x1``.  The inversion is singular
  when the estimated signal variance ``var_x1 - delta2`` is non-positive.

Pitfall quantities
------------------
``rho_star`` is the baseline/follow-up correlation under ``beta = 0``; it is
strictly below the repeatability ``R`` whenever ``nu2 > 0``, so using it as a
stand-in for ``R`` over-corrects (Kelly & Price 2005 discuss the choice of
correction coefficient).  ``null_variance_ratio`` is ``var(x2)/var(x1)``
under ``beta = 0``, equal to ``1 + nu2/var_x1``; it exceeds 1 whenever
``nu2 > 0``, which is why variance-equality tests (e.g. Pitman's) are not
tests of ``beta = 0``.

The numeric defaults :data:`SYSTOLIC` are the classic systolic blood-pressure
values of Gardner & Heady (1973): mu = 141, sigma = 13.6, alpha = -20,
nu = 10, delta = 9.1 (all in mmHg).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

from .errors import ParameterError, SingularityError

__all__ = [
    "PopulationParams",
    "PopulationMoments",
    "PopulationSlopes",
    "SweepRow",
    "SYSTOLIC",
    "population_moments",
    "crude_slope_population",
    "berry_slope_population",
    "population_slopes",
    "blomqvist_invert",
    "blomqvist_B_coefficient",
    "null_crude_slope",
    "null_berry_slope",
    "null_berry_slope_bivariate",
    "rho_star",
    "null_variance_ratio",
    "population_sweep",
]


def _require_finite(name: str, value: float) -> float:
    try:
        out = float(value)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"{name} must be a real number, got {value!r}") from exc
    if not math.isfinite(out):
        raise ParameterError(f"{name} must be finite, got {out!r}")
    return out


@dataclass(frozen=True)
class PopulationParams:
    """Parameters of the generative change model.

    ``sigma2``, ``nu2`` and ``delta2`` are variances (non-negative); the
    observed baseline variance ``sigma2 + delta2`` must be positive.
    """

    mu: float
    sigma2: float
    alpha: float
    beta: float
    nu2: float
    delta2: float

    def __post_init__(self) -> None:
        for name in ("mu", "sigma2", "alpha", "beta", "nu2", "delta2"):
            object.__setattr__(self, name, _require_finite(name, getattr(self, name)))
        for name in ("sigma2", "nu2", "delta2"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} is a variance and must be >= 0, got {getattr(self, name)!r}")
        if self.sigma2 + self.delta2 <= 0:
            raise ParameterError("observed baseline variance sigma2 + delta2 must be > 0")

    @property
    def var_x1(self) -> float:
        """Observed baseline variance ``sigma2 + delta2``."""
        return self.sigma2 + self.delta2

    @property
    def repeatability(self) -> float:
        """Test-retest repeatability ``R = sigma2 / (sigma2 + delta2)``."""
        return self.sigma2 / self.var_x1

    @property
    def noise_ratio(self) -> float:
        """Measurement-error ratio ``delta2 / sigma2`` (requires sigma2 > 0)."""
        if self.sigma2 <= 0:
            raise ParameterError("noise ratio delta2/sigma2 is undefined when sigma2 = 0")
        return self.delta2 / self.sigma2

    def with_beta(self, beta: float) -> "PopulationParams":
        return replace(self, beta=beta)


#: Gardner & Heady (1973) systolic blood-pressure parameters (mmHg):
#: mu = 141, sigma = 13.6, alpha = -20, beta = 0, nu = 10, delta = 9.1,
#: stated as exact variance literals.
SYSTOLIC = PopulationParams(
    mu=141.0, sigma2=184.96, alpha=-20.0, beta=0.0, nu2=100.0, delta2=82.81
)


@dataclass(frozen=True)
class PopulationMoments:
    """First and second moments of the observed pair ``(x1, x2)``."""

    mean_x1: float
    var_x1: float
    mean_x2: float
    var_x2: float
    cov_x1x2: float
    rho: float
    repeatability: float


@dataclass(frozen=True)
class PopulationSlopes:
    """Population regression slopes of (adjusted) change on observed baseline."""

    crude: float
    berry: float
    true_beta: float
    crude_bias: float  # crude - true_beta


@dataclass(frozen=True)
class SweepRow:
    """One cell of a (beta, delta2/sigma2) population sweep."""

    beta: float
    noise_ratio: float
    crude_slope: float
    berry_slope: float
    rho: float


def population_moments(params: PopulationParams) -> PopulationMoments:
    """Exact moments of ``(x1, x2)`` under the generative change model.

    Raises
    ------
    ParameterError
        If ``var(x2) = 0`` (e.g. ``beta = -1`` with ``nu2 = delta2 = 0``),
        where the correlation is undefined.
    """
    one_plus_beta = 1.0 + params.beta
    var_x1 = params.var_x1
    var_x2 = one_plus_beta**2 * params.sigma2 + params.nu2 + params.delta2
    if var_x2 <= 0:
        raise ParameterError(
            "var(x2) = 0 under these parameters; the x1-x2 correlation is undefined"
        )
    cov = one_plus_beta * params.sigma2
    return PopulationMoments(
        mean_x1=params.mu,
        var_x1=var_x1,
        mean_x2=one_plus_beta * params.mu + params.alpha,
        var_x2=var_x2,
        cov_x1x2=cov,
        rho=cov / math.sqrt(var_x1 * var_x2),
        repeatability=params.repeatability,
    )


def crude_slope_population(params: PopulationParams) -> float:
    """Population slope of the observed change ``x2 - x1`` on ``x1``.

    ``beta_c = (beta * sigma2 - delta2) / (sigma2 + delta2)``.  Equal to
    ``beta`` only when ``delta2 = 0`` (that limit is returned exactly);
    equal to ``R - 1`` under ``beta = 0``.
    """
    if params.delta2 == 0.0:
        return params.beta
    return (params.beta * params.sigma2 - params.delta2) / params.var_x1


def berry_slope_population(params: PopulationParams) -> float:
    """Population slope of the Berry-adjusted change ``x2 - rho*x1`` on ``x1``.

    ``beta_B = (1 + beta) * sigma2 / (sigma2 + delta2) - rho``, identically
    ``crude + (1 - rho)``.  Not zero under ``beta = 0`` unless ``nu2 = 0``
    (and ``delta2`` effects cancel): compare against
    :func:`null_berry_slope`, never against 0.
    """
    moments = population_moments(params)
    return (1.0 + params.beta) * params.sigma2 / params.var_x1 - moments.rho


def population_slopes(params: PopulationParams) -> PopulationSlopes:
    """Bundle of crude and Berry population slopes plus the crude bias."""
    crude = crude_slope_population(params)
    return PopulationSlopes(
        crude=crude,
        berry=berry_slope_population(params),
        true_beta=params.beta,
        crude_bias=crude - params.beta,
    )


def blomqvist_invert(beta_c: float, var_x1: float, delta2: float) -> float:
    """Blomqvist (1977) inversion of the crude slope given the error variance.

    ``beta = (beta_c * var_x1 + delta2) / (var_x1 - delta2)``.

    Raises
    ------
    ParameterError
        If ``delta2 < 0`` or ``var_x1 <= 0``.
    SingularityError
        If ``var_x1 - delta2 <= 0`` (estimated signal variance non-positive).
    """
    beta_c = _require_finite("beta_c", beta_c)
    var_x1 = _require_finite("var_x1", var_x1)
    delta2 = _require_finite("delta2", delta2)
    if delta2 < 0:
        raise ParameterError(f"delta2 is a variance and must be >= 0, got {delta2!r}")
    if var_x1 <= 0:
        raise ParameterError(f"var_x1 must be > 0, got {var_x1!r}")
    signal = var_x1 - delta2
    if signal <= 0:
        raise SingularityError(
            "estimated signal variance non-positive: "
            f"var_x1 - delta2 = {signal!r} (var_x1={var_x1!r}, delta2={delta2!r})"
        )
    if delta2 == 0.0:
        return beta_c
    return (beta_c * var_x1 + delta2) / signal


def blomqvist_B_coefficient(beta_c: float, var_x1: float, delta2: float) -> float:
    """Adjustment coefficient ``B`` of the Blomqvist-corrected change.

    The corrected change is ``d_e = (x2 - mean(x2)) + B * (x1 - mean(x1))``
    with ``B = (1 + beta_c) * delta2 / (var_x1 - delta2) - 1``; regressing
    ``d_e`` on ``x1`` recovers :func:`blomqvist_invert`'s slope, since
    ``slope(x2 on x1) + B = beta_c + 1 + B``.  Same domain and errors as
    :func:`blomqvist_invert`.
    """
    beta_c = _require_finite("beta_c", beta_c)
    var_x1 = _require_finite("var_x1", var_x1)
    delta2 = _require_finite("delta2", delta2)
    if delta2 < 0:
        raise ParameterError(f"delta2 is a variance and must be >= 0, got {delta2!r}")
    if var_x1 <= 0:
        raise ParameterError(f"var_x1 must be > 0, got {var_x1!r}")
    signal = var_x1 - delta2
    if signal <= 0:
        raise SingularityError(
            "estimated signal variance non-positive: "
            f"var_x1 - delta2 = {signal!r} (var_x1={var_x1!r}, delta2={delta2!r})"
        )
    return (1.0 + beta_c) * delta2 / signal - 1.0


def null_crude_slope(repeatability: float) -> float:
    """Expected crude slope under ``beta = 0`` given repeatability ``R``.

    ``R - 1``: the crude slope should be compared against this, not 0.

    Raises
    ------
    ParameterError
        If ``R`` is outside ``(0, 1]``.
    """
    r = _require_finite("repeatability", repeatability)
    if not 0.0 < r <= 1.0:
        raise ParameterError(f"repeatability must lie in (0, 1], got {r!r}")
    return r - 1.0


def null_berry_slope(params: PopulationParams) -> float:
    """Berry population slope under the null ``beta = 0``.

    Evaluates :func:`berry_slope_population` with ``beta`` forced to 0 (any
    ``beta`` on ``params`` is ignored).  This is the value the Berry-adjusted
    slope should be compared against; it is nonzero whenever ``nu2 > 0``.
    """
    return berry_slope_population(params.with_beta(0.0))


def null_berry_slope_bivariate(params: PopulationParams) -> float:
    """Bivariate-normal closed form sometimes quoted for the Berry null.

    ``(delta2 / var_x1) * (1 / sqrt(1 + nu2 / var_x1) - 1)``.

    This expression disagrees with :func:`null_berry_slope` under the
    generative change model (Monte Carlo supports the change-model value);
    it is provided so both values can be reported side by side.  Do not use
    it as the comparison point.
    """
    var_x1 = params.var_x1
    return (params.delta2 / var_x1) * (1.0 / math.sqrt(1.0 + params.nu2 / var_x1) - 1.0)


def rho_star(params: PopulationParams) -> float:
    """Baseline/follow-up correlation under ``beta = 0``.

    ``rho* = sigma2 / sqrt((sigma2 + delta2) * (sigma2 + delta2 + nu2))``.
    Strictly below the repeatability ``R`` whenever ``nu2 > 0``; plugging it
    in where ``R`` belongs over-corrects.  Computed as the ``beta = 0``
    correlation so it matches :func:`population_moments` bit for bit.
    """
    return population_moments(params.with_beta(0.0)).rho


def null_variance_ratio(params: PopulationParams) -> float:
    """``var(x2) / var(x1)`` under ``beta = 0``: ``1 + nu2 / var_x1``.

    Exceeds 1 whenever ``nu2 > 0``, so equality-of-variance tests (Pitman's)
    reject under the no-differential-effect null and are not tests of
    ``beta = 0``.
    """
    return 1.0 + params.nu2 / params.var_x1


def population_sweep(
    params: PopulationParams,
    beta_values: Sequence[float],
    noise_ratio_values: Sequence[float],
) -> list[SweepRow]:
    """Crude and Berry population slopes over a (beta, delta2/sigma2) grid.

    For each ``beta`` in ``beta_values`` (outer loop) and each noise ratio
    ``q = delta2/sigma2`` in ``noise_ratio_values`` (inner loop), evaluates
    the slopes at ``replace(params, beta=beta, delta2=q*sigma2)``.  ``mu``
    and ``alpha`` do not enter any slope; rows depend only on
    ``(beta, q, nu2/sigma2)``.

    Raises
    ------
    ParameterError
        If ``sigma2 = 0`` (ratios undefined), any ratio is negative, or a
        grid cell makes the x1-x2 correlation undefined.
    """
    if params.sigma2 <= 0:
        raise ParameterError("population_sweep requires sigma2 > 0")
    betas = [_require_finite("beta", b) for b in beta_values]
    ratios = [_require_finite("noise_ratio", q) for q in noise_ratio_values]
    for q in ratios:
        if q < 0:
            raise ParameterError(f"noise ratio delta2/sigma2 must be >= 0, got {q!r}")
    rows: list[SweepRow] = []
    for beta in betas:
        for q in ratios:
            cell = replace(params, beta=beta, delta2=q * params.sigma2)
            moments = population_moments(cell)
            rows.append(
                SweepRow(
                    beta=beta,
                    noise_ratio=q,
                    crude_slope=crude_slope_population(cell),
                    berry_slope=berry_slope_population(cell),
                    rho=moments.rho,
                )
            )
    return rows
