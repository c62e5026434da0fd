"""Exception hierarchy for rtmkit.

Every error raised by the core modules derives from :class:`RtmError` and
carries a stable machine-readable ``code``.  The service layer maps codes to
structured HTTP error bodies and the command-line client maps them to process
exit codes, so the classes here are the single source of truth for failure
semantics:

====================  ============  =========
class                 code          exit code
====================  ============  =========
UsageError            usage         1
ParameterError        parameter     1
DataError             data          2
DegenerateSampleError degenerate    2
InferenceFailureError inference     2
SingularityError      singularity   3
====================  ============  =========
"""

from __future__ import annotations

__all__ = [
    "RtmError",
    "UsageError",
    "ParameterError",
    "DataError",
    "DegenerateSampleError",
    "InferenceFailureError",
    "SingularityError",
    "EXIT_CODES",
]


class RtmError(Exception):
    """Base class for all rtmkit errors."""

    code = "error"
    exit_code = 2


class UsageError(RtmError):
    """The request itself is malformed (bad flag combination, bad enum value)."""

    code = "usage"
    exit_code = 1


class ParameterError(RtmError):
    """A numeric argument is outside its mathematical domain."""

    code = "parameter"
    exit_code = 1


class DataError(RtmError):
    """Input data could not be ingested (bad CSV, wrong shape, too short)."""

    code = "data"
    exit_code = 2


class DegenerateSampleError(RtmError):
    """A sample statistic is undefined on this data (e.g. zero variance)."""

    code = "degenerate"
    exit_code = 2


class InferenceFailureError(RtmError):
    """A resampling procedure produced no usable replicates."""

    code = "inference"
    exit_code = 2


class SingularityError(RtmError):
    """A variance correction is singular (estimated signal variance non-positive)."""

    code = "singularity"
    exit_code = 3


EXIT_CODES = {
    cls.code: cls.exit_code
    for cls in (
        RtmError,
        UsageError,
        ParameterError,
        DataError,
        DegenerateSampleError,
        InferenceFailureError,
        SingularityError,
    )
}
