"""Pydantic request/response models for the rtmkit service.

Requests are validated structurally here (types, exactly-one-of choices);
numeric domain rules (variance signs, level ranges, ...) live in the core
modules, whose errors the app maps to structured ``{"error": {code,
message}}`` bodies.  Response bodies for reports are canonical pre-serialized
JSON/CSV produced by :mod:`rtmkit.serialize` — pydantic response models are
used where they do not interfere with canonical float formatting.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, model_validator

from ..estimators import ErrorSpec
from ..model import PopulationParams

__all__ = [
    "ParamsModel",
    "ErrorSpecFields",
    "HealthResponse",
    "ErrorBody",
    "ErrorResponse",
    "PopulationReportRequest",
    "SweepRequest",
    "SimulateRequest",
    "AdjustedChangeRequest",
    "SamplingDistRequest",
    "HeadToHeadRequest",
    "BootDemoRequest",
    "AnalyzeRequest",
    "DEFAULT_SWEEP_BETAS",
    "DEFAULT_SWEEP_NOISE_RATIOS",
]

#: Default sweep grid: the three classic differential effects over a fine
#: measurement-error ratio axis, 0 to 2 in steps of 0.05.
DEFAULT_SWEEP_BETAS = (0.0, -0.5, -1.5)
DEFAULT_SWEEP_NOISE_RATIOS = tuple(round(0.05 * k, 10) for k in range(41))


class _StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ParamsModel(_StrictModel):
    """Generative change-model parameters; defaults are the systolic values."""

    mu: float = 141.0
    sigma2: float = 184.96
    alpha: float = -20.0
    beta: float = 0.0
    nu2: float = 100.0
    delta2: float = 82.81

    def to_core(self) -> PopulationParams:
        return PopulationParams(
            mu=self.mu,
            sigma2=self.sigma2,
            alpha=self.alpha,
            beta=self.beta,
            nu2=self.nu2,
            delta2=self.delta2,
        )


class ErrorSpecFields(_StrictModel):
    """Measurement-error spec: exactly one of delta2 / repeatability."""

    delta2: Optional[float] = None
    repeatability: Optional[float] = None

    @model_validator(mode="after")
    def _exactly_one(self) -> "ErrorSpecFields":
        if (self.delta2 is None) == (self.repeatability is None):
            raise ValueError("specify exactly one of delta2 or repeatability")
        return self

    def to_core(self) -> ErrorSpec:
        if self.delta2 is not None:
            return ErrorSpec(delta2=self.delta2)
        return ErrorSpec(repeatability=self.repeatability)


class HealthResponse(BaseModel):
    status: str
    version: str


class ErrorBody(BaseModel):
    code: str
    message: str


class ErrorResponse(BaseModel):
    error: ErrorBody


class PopulationReportRequest(_StrictModel):
    params: ParamsModel = ParamsModel()


class SweepRequest(_StrictModel):
    params: ParamsModel = ParamsModel()
    betas: list[float] = list(DEFAULT_SWEEP_BETAS)
    noise_ratios: list[float] = list(DEFAULT_SWEEP_NOISE_RATIOS)


class SimulateRequest(_StrictModel):
    params: ParamsModel = ParamsModel()
    n: int = 100
    master_seed: int = 0
    replicate_index: int = 0
    with_latent: bool = False


class AdjustedChangeRequest(_StrictModel):
    """Adjusted-change vector for a dataset; data as arrays or CSV text."""

    x1: Optional[list[float]] = None
    x2: Optional[list[float]] = None
    csv_text: Optional[str] = None
    method: Literal["berry", "blomqvist"] = "berry"
    error_spec: Optional[ErrorSpecFields] = None
    negate_change: bool = False

    @model_validator(mode="after")
    def _data_choice(self) -> "AdjustedChangeRequest":
        arrays = self.x1 is not None or self.x2 is not None
        if arrays and self.csv_text is not None:
            raise ValueError("give either x1/x2 arrays or csv_text, not both")
        if not arrays and self.csv_text is None:
            raise ValueError("no data: give x1/x2 arrays or csv_text")
        if arrays and (self.x1 is None or self.x2 is None):
            raise ValueError("both x1 and x2 arrays are required")
        return self


class SamplingDistRequest(_StrictModel):
    params: ParamsModel = ParamsModel()
    n: int = 100
    replicates: int = 1000
    master_seed: int = 0
    error_spec: Optional[ErrorSpecFields] = None


class HeadToHeadRequest(_StrictModel):
    params: ParamsModel = ParamsModel()
    beta_grid: Optional[list[float]] = None
    n: int = 100
    replicates: int = 10_000
    master_seed: int = 0
    error_spec: Optional[ErrorSpecFields] = None
    format: Literal["json", "csv"] = "json"


class BootDemoRequest(_StrictModel):
    params: ParamsModel = ParamsModel()
    n: int = 100
    n_boot: int = 10_000
    level: float = 0.95
    n_perm: int = 999
    master_seed: int = 0
    error_spec: Optional[ErrorSpecFields] = None
    known_r: Optional[float] = None


class AnalyzeRequest(_StrictModel):
    """Full analysis of user data; data as arrays or CSV text."""

    x1: Optional[list[float]] = None
    x2: Optional[list[float]] = None
    csv_text: Optional[str] = None
    n_boot: int = 10_000
    level: float = 0.95
    n_perm: int = 999
    master_seed: int = 0
    error_spec: Optional[ErrorSpecFields] = None
    known_r: Optional[float] = None
    negate_change: bool = False

    @model_validator(mode="after")
    def _data_choice(self) -> "AnalyzeRequest":
        arrays = self.x1 is not None or self.x2 is not None
        if arrays and self.csv_text is not None:
            raise ValueError("give either x1/x2 arrays or csv_text, not both")
        if not arrays and self.csv_text is None:
            raise ValueError("no data: give x1/x2 arrays or csv_text")
        if arrays and (self.x1 is None or self.x2 is None):
            raise ValueError("both x1 and x2 arrays are required")
        return self
