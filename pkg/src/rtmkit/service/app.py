"""FastAPI service exposing the rtmkit analysis surface.

Report endpoints return canonical bodies produced by
:mod:`rtmkit.serialize` (12-significant-digit JSON or fixed-format CSV), so
identical requests yield byte-identical responses.  Core-module errors are
mapped to structured ``{"error": {"code", "message"}}`` bodies whose codes
drive the command-line client's exit statuses.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response

from .. import __version__
from ..dataio import read_sample_csv, sample_to_csv
from ..errors import RtmError, UsageError
from ..estimators import berry_slope, blomqvist_slope
from ..experiments import analyze_dataset, run_bootstrap_demo, run_head_to_head, run_sampling_distribution
from ..model import population_sweep
from ..sampling import ObservedSample, SeedSpec, derive_stream, draw_sample
from ..serialize import (
    adjusted_change_csv,
    analyze_doc,
    canonical_json,
    head_to_head_csv,
    head_to_head_doc,
    population_report_doc,
    sampling_dist_doc,
    sweep_csv,
)
from .schemas import (
    AdjustedChangeRequest,
    AnalyzeRequest,
    BootDemoRequest,
    HeadToHeadRequest,
    HealthResponse,
    PopulationReportRequest,
    SamplingDistRequest,
    SimulateRequest,
    SweepRequest,
)

__all__ = ["app", "create_app"]

_HTTP_STATUS = {
    "usage": 400,
    "parameter": 400,
    "data": 422,
    "degenerate": 422,
    "inference": 422,
    "singularity": 422,
}

_JSON = "application/json"
_CSV = "text/csv; charset=utf-8"


def _json_response(doc: dict) -> Response:
    return Response(content=canonical_json(doc), media_type=_JSON)


def _csv_response(text: str) -> Response:
    return Response(content=text, media_type=_CSV)


def _error_response(status_code: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status_code, content={"error": {"code": code, "message": message}}
    )


def _resolve_sample(request) -> tuple[ObservedSample, list[str]]:
    if request.csv_text is not None:
        return read_sample_csv(request.csv_text)
    return ObservedSample(x1=request.x1, x2=request.x2), []


def create_app() -> FastAPI:
    app = FastAPI(
        title="rtmkit",
        version=__version__,
        description=(
            "Change-vs-baseline analysis under regression to the mean: population "
            "theory, seeded simulation experiments, and bootstrap inference."
        ),
    )

    @app.exception_handler(RtmError)
    async def _rtm_error_handler(request: Request, exc: RtmError) -> JSONResponse:
        return _error_response(_HTTP_STATUS.get(exc.code, 400), exc.code, str(exc))

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError) -> JSONResponse:
        details = "; ".join(
            f"{'.'.join(str(part) for part in err.get('loc', ()))}: {err.get('msg', 'invalid')}"
            for err in exc.errors()
        )
        return _error_response(400, "usage", f"invalid request: {details}")

    @app.exception_handler(Exception)
    async def _internal_handler(request: Request, exc: Exception) -> JSONResponse:
        return _error_response(500, "internal", f"{type(exc).__name__}: {exc}")

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/population/report")
    def population_report(request: PopulationReportRequest) -> Response:
        """Population moments, slopes, null values and pitfall quantities (JSON)."""
        return _json_response(population_report_doc(request.params.to_core()))

    @app.post("/population/sweep")
    def population_sweep_endpoint(request: SweepRequest) -> Response:
        """Crude/Berry population slopes over a (beta, noise-ratio) grid (CSV)."""
        rows = population_sweep(request.params.to_core(), request.betas, request.noise_ratios)
        return _csv_response(sweep_csv(rows))

    @app.post("/simulate")
    def simulate(request: SimulateRequest) -> Response:
        """One seeded sample from the generative model (CSV)."""
        rng = derive_stream(SeedSpec(request.master_seed, request.replicate_index))
        latent, obs = draw_sample(request.params.to_core(), request.n, rng)
        return _csv_response(sample_to_csv(obs, latent if request.with_latent else None))

    @app.post("/estimators/adjusted-change")
    def adjusted_change(request: AdjustedChangeRequest) -> Response:
        """Berry- or Blomqvist-adjusted change vector for a dataset (CSV)."""
        obs, _ = _resolve_sample(request)
        if request.method == "berry":
            if request.error_spec is not None:
                raise UsageError("error_spec is only meaningful for the Blomqvist method")
            adjusted, _ = berry_slope(obs)
        else:
            if request.error_spec is None:
                raise UsageError("the Blomqvist adjustment requires an error_spec")
            adjusted, _ = blomqvist_slope(obs, request.error_spec.to_core())
        if request.negate_change:
            adjusted = -adjusted
        return _csv_response(adjusted_change_csv(adjusted))

    @app.post("/experiments/sampling-dist")
    def sampling_dist(request: SamplingDistRequest) -> Response:
        """Sampling distributions of the four slope estimators (JSON)."""
        report = run_sampling_distribution(
            request.params.to_core(),
            n=request.n,
            replicates=request.replicates,
            error_spec=request.error_spec.to_core() if request.error_spec else None,
            master_seed=request.master_seed,
        )
        return _json_response(sampling_dist_doc(report))

    @app.post("/experiments/head-to-head")
    def head_to_head(request: HeadToHeadRequest) -> Response:
        """Crude-vs-corrections win probabilities per beta (JSON or CSV)."""
        report = run_head_to_head(
            request.params.to_core(),
            beta_grid=request.beta_grid,
            n=request.n,
            replicates=request.replicates,
            master_seed=request.master_seed,
            error_spec=request.error_spec.to_core() if request.error_spec else None,
        )
        if request.format == "csv":
            return _csv_response(head_to_head_csv(report))
        return _json_response(head_to_head_doc(report))

    @app.post("/experiments/boot-demo")
    def boot_demo(request: BootDemoRequest) -> Response:
        """One synthetic dataset analyzed end to end (JSON analyze report)."""
        report = run_bootstrap_demo(
            request.params.to_core(),
            n=request.n,
            n_boot=request.n_boot,
            level=request.level,
            n_perm=request.n_perm,
            master_seed=request.master_seed,
            error_spec=request.error_spec.to_core() if request.error_spec else None,
            known_r=request.known_r,
        )
        return _json_response(analyze_doc(report))

    @app.post("/analyze")
    def analyze(request: AnalyzeRequest) -> Response:
        """Full analysis of user data (JSON analyze report)."""
        obs, warnings = _resolve_sample(request)
        report = analyze_dataset(
            obs,
            error_spec=request.error_spec.to_core() if request.error_spec else None,
            known_r=request.known_r,
            n_boot=request.n_boot,
            level=request.level,
            n_perm=request.n_perm,
            negate_change=request.negate_change,
            master_seed=request.master_seed,
            extra_warnings=warnings,
        )
        return _json_response(analyze_doc(report))

    return app


app = create_app()
