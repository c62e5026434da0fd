"""Seeded sampling from the generative change model.

Reproducibility contract
------------------------
All randomness in the package flows through :class:`SeedSpec`, a
(master_seed, replicate_index) pair mapped to an independent PCG64 stream via
``SeedSequence(master_seed, spawn_key=(replicate_index,))``.  Replicate
streams are therefore independent by construction, derivable in any order,
and stable across runs and platforms for a fixed numpy generation: the same
SeedSpec always yields the same draws.

:func:`draw_sample` consumes its generator in a fixed documented order
(X1 deviations, change innovations xi, baseline errors e1, follow-up errors
e2 — one ``standard_normal`` call each), so samples are bit-reproducible
from (params, n, SeedSpec) alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, ParameterError
from .model import PopulationParams

__all__ = [
    "SeedSpec",
    "derive_stream",
    "LatentSample",
    "ObservedSample",
    "draw_sample",
]

_MAX_SEED = 2**63 - 1


@dataclass(frozen=True)
class SeedSpec:
    """A master seed plus a replicate index, naming one independent stream."""

    master_seed: int
    replicate_index: int = 0

    def __post_init__(self) -> None:
        for name in ("master_seed", "replicate_index"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise ParameterError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
            if not 0 <= int(value) <= _MAX_SEED:
                raise ParameterError(f"{name} must lie in [0, 2**63), got {value!r}")

    def child(self, replicate_index: int) -> "SeedSpec":
        """The stream with the same master seed and a different replicate index."""
        return SeedSpec(self.master_seed, replicate_index)


def derive_stream(seed: SeedSpec) -> np.random.Generator:
    """Independent PCG64 generator for one (master_seed, replicate_index)."""
    sequence = np.random.SeedSequence(seed.master_seed, spawn_key=(seed.replicate_index,))
    return np.random.Generator(np.random.PCG64(sequence))


def _as_column(name: str, values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise DataError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite values")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class LatentSample:
    """Error-free trait values ``(X1, X2)``: equal-length 1-D float arrays."""

    X1: np.ndarray
    X2: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "X1", _as_column("X1", self.X1))
        object.__setattr__(self, "X2", _as_column("X2", self.X2))
        if self.X1.shape != self.X2.shape:
            raise DataError(
                f"X1 and X2 must have equal length, got {self.X1.size} and {self.X2.size}"
            )
        if self.X1.size < 2:
            raise DataError(f"a sample needs at least 2 observations, got {self.X1.size}")

    @property
    def n(self) -> int:
        return int(self.X1.size)


@dataclass(frozen=True)
class ObservedSample:
    """Observed measurements ``(x1, x2)``: equal-length 1-D float arrays."""

    x1: np.ndarray
    x2: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "x1", _as_column("x1", self.x1))
        object.__setattr__(self, "x2", _as_column("x2", self.x2))
        if self.x1.shape != self.x2.shape:
            raise DataError(
                f"x1 and x2 must have equal length, got {self.x1.size} and {self.x2.size}"
            )
        if self.x1.size < 2:
            raise DataError(f"a sample needs at least 2 observations, got {self.x1.size}")

    @property
    def n(self) -> int:
        return int(self.x1.size)

    @property
    def change(self) -> np.ndarray:
        """Observed change ``d = x2 - x1``."""
        return self.x2 - self.x1


def draw_sample(
    params: PopulationParams, n: int, rng: np.random.Generator
) -> tuple[LatentSample, ObservedSample]:
    """Draw ``n`` paired observations from the generative change model.

    Generation order (fixed for reproducibility): latent baseline
    ``X1 = mu + sigma*z``, change innovation ``xi``, then measurement errors
    ``e1`` and ``e2`` — four ``standard_normal(n)`` calls, always all four,
    so streams align across parameter settings with the same ``n``.  With
    ``nu2 = delta2 = 0`` the zero-variance terms vanish exactly:
    ``X2 = (1+beta)*X1 + alpha`` and ``x = X`` bitwise.

    Raises
    ------
    DataError
        If ``n < 2``.
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise DataError(f"sample size n must be an integer, got {n!r}")
    n = int(n)
    if n < 2:
        raise DataError(f"sample size n must be >= 2, got {n}")

    sigma = np.sqrt(params.sigma2)
    nu = np.sqrt(params.nu2)
    delta = np.sqrt(params.delta2)

    X1 = params.mu + sigma * rng.standard_normal(n)
    xi = nu * rng.standard_normal(n)
    X2 = (1.0 + params.beta) * X1 + params.alpha + xi
    e1 = delta * rng.standard_normal(n)
    e2 = delta * rng.standard_normal(n)

    latent = LatentSample(X1=X1, X2=X2)
    observed = ObservedSample(x1=X1 + e1, x2=X2 + e2)
    return latent, observed
