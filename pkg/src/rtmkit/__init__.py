"""rtmkit: change-vs-baseline analysis under regression to the mean.

When the same trait is measured twice with error, the regression slope of
the observed change on the observed baseline is biased toward -1 even when
the true change does not depend on the trait at all.  This package bundles
the closed-form population theory of that artifact, the classical
corrections (Berry et al. 1984; Blomqvist 1977), seeded simulation
experiments that measure what the corrections actually buy, and a bootstrap
inference pipeline for real paired datasets — behind a FastAPI service and
a thin command-line client (``rtmkit``).
"""

from .errors import (
    DataError,
    DegenerateSampleError,
    InferenceFailureError,
    ParameterError,
    RtmError,
    SingularityError,
    UsageError,
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
from .experiments import (
    AnalyzeConfig,
    AnalyzeReport,
    HeadToHeadReport,
    HeadToHeadRow,
    MethodSummary,
    SamplingDistReport,
    analyze_dataset,
    run_bootstrap_demo,
    run_head_to_head,
    run_sampling_distribution,
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
from .model import (
    SYSTOLIC,
    PopulationMoments,
    PopulationParams,
    PopulationSlopes,
    SweepRow,
    berry_slope_population,
    blomqvist_B_coefficient,
    blomqvist_invert,
    crude_slope_population,
    null_berry_slope,
    null_berry_slope_bivariate,
    null_crude_slope,
    null_variance_ratio,
    population_moments,
    population_slopes,
    population_sweep,
    rho_star,
)
from .sampling import LatentSample, ObservedSample, SeedSpec, derive_stream, draw_sample

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "RtmError",
    "UsageError",
    "ParameterError",
    "DataError",
    "DegenerateSampleError",
    "InferenceFailureError",
    "SingularityError",
    # model
    "PopulationParams",
    "PopulationMoments",
    "PopulationSlopes",
    "SweepRow",
    "SYSTOLIC",
    "population_moments",
    "population_slopes",
    "crude_slope_population",
    "berry_slope_population",
    "blomqvist_invert",
    "blomqvist_B_coefficient",
    "null_crude_slope",
    "null_berry_slope",
    "null_berry_slope_bivariate",
    "rho_star",
    "null_variance_ratio",
    "population_sweep",
    # sampling
    "SeedSpec",
    "derive_stream",
    "LatentSample",
    "ObservedSample",
    "draw_sample",
    # estimators
    "ErrorSpec",
    "SampleStats",
    "SlopeEstimate",
    "PitmanResult",
    "sample_stats",
    "crude_slope",
    "berry_slope",
    "blomqvist_slope",
    "true_slope",
    "pitman_test",
    # inference
    "BootstrapResult",
    "RepeatabilityInterval",
    "NullDecision",
    "PermutationResult",
    "type1_quantile",
    "bootstrap_slope",
    "nonrejection_repeatability",
    "test_null_given_R",
    "permutation_test_independence",
    # experiments
    "MethodSummary",
    "SamplingDistReport",
    "HeadToHeadRow",
    "HeadToHeadReport",
    "AnalyzeConfig",
    "AnalyzeReport",
    "run_sampling_distribution",
    "run_head_to_head",
    "run_bootstrap_demo",
    "analyze_dataset",
]
