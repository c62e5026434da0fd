"""Canonical report serialization: deterministic JSON and CSV bodies.

Reports are rendered once, here, in a canonical form shared by the service
and the command-line client:

* JSON — every float is rounded to 12 significant digits before dumping
  (``float(f"{x:.12g}")``), objects keep their construction order, output is
  two-space indented and ends with a newline.  Rerunning a report with the
  same configuration and seed yields byte-identical output.
* Sweep and head-to-head CSVs — 6 significant digits per numeric cell.
* Sample / bootstrap-replicate / adjusted-change CSVs — shortest
  round-trip (``repr``) floats, so values parse back bit-identically.

:data:`ANALYZE_REPORT_SCHEMA` is the published JSON Schema (draft-07) for
the analyze report body.
"""

from __future__ import annotations

import json
import math
from typing import Optional

import numpy as np

from .errors import ParameterError
from .estimators import ErrorSpec, PitmanResult, SampleStats, SlopeEstimate
from .experiments import (
    PERMUTATION_NULL_LABEL,
    PITMAN_NULL_LABEL,
    AnalyzeReport,
    BERRY_NULL_FORM_WARNING,
    BERRY_NULL_WARNING,
    HeadToHeadReport,
    SamplingDistReport,
)
from .inference import BootstrapResult, NullDecision, PermutationResult, RepeatabilityInterval
from .model import (
    PopulationParams,
    SweepRow,
    berry_slope_population,
    crude_slope_population,
    null_berry_slope,
    null_berry_slope_bivariate,
    null_crude_slope,
    null_variance_ratio,
    population_moments,
    rho_star,
)

__all__ = [
    "canonical_json",
    "params_doc",
    "error_spec_doc",
    "population_report_doc",
    "sweep_csv",
    "sampling_dist_doc",
    "head_to_head_doc",
    "head_to_head_csv",
    "analyze_doc",
    "replicates_csv",
    "adjusted_change_csv",
    "ANALYZE_REPORT_SCHEMA",
]


def _canonical(value):
    if value is None or isinstance(value, (str, bool)):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if not math.isfinite(v):
            raise ParameterError(f"non-finite value {v!r} cannot appear in a report")
        return float(f"{v:.12g}")
    if isinstance(value, np.ndarray):
        return [_canonical(item) for item in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_canonical(item) for item in value]
    if isinstance(value, dict):
        return {str(key): _canonical(item) for key, item in value.items()}
    raise TypeError(f"cannot serialize {type(value).__name__} into a report")


def canonical_json(doc: dict) -> str:
    """Deterministic JSON text: 12-significant-digit floats, 2-space indent."""
    return json.dumps(_canonical(doc), indent=2, ensure_ascii=False) + "\n"


def _g6(value: float) -> str:
    return f"{float(value):.6g}"


def params_doc(params: PopulationParams) -> dict:
    return {
        "mu": params.mu,
        "sigma2": params.sigma2,
        "alpha": params.alpha,
        "beta": params.beta,
        "nu2": params.nu2,
        "delta2": params.delta2,
    }


def error_spec_doc(spec: Optional[ErrorSpec]) -> Optional[dict]:
    if spec is None:
        return None
    if spec.delta2 is not None:
        return {"kind": "delta2", "value": spec.delta2}
    return {"kind": "repeatability", "value": spec.repeatability}


def population_report_doc(params: PopulationParams) -> dict:
    """Population moments, slopes, null values and pitfall quantities."""
    moments = population_moments(params)
    crude = crude_slope_population(params)
    return {
        "params": params_doc(params),
        "moments": {
            "mean_x1": moments.mean_x1,
            "var_x1": moments.var_x1,
            "mean_x2": moments.mean_x2,
            "var_x2": moments.var_x2,
            "cov_x1x2": moments.cov_x1x2,
            "rho": moments.rho,
            "repeatability": moments.repeatability,
        },
        "slopes": {
            "crude": crude,
            "berry": berry_slope_population(params),
            "true_beta": params.beta,
            "crude_bias": crude - params.beta,
        },
        "nulls": {
            "crude_given_R": null_crude_slope(moments.repeatability)
            if moments.repeatability > 0
            else None,
            "berry_change_model": null_berry_slope(params),
            "berry_bivariate_form": null_berry_slope_bivariate(params),
        },
        "pitfalls": {
            "rho_star": rho_star(params),
            "null_variance_ratio": null_variance_ratio(params),
        },
        "warnings": [BERRY_NULL_WARNING, BERRY_NULL_FORM_WARNING],
    }


def sweep_csv(rows: list[SweepRow]) -> str:
    """Population sweep table: 6-significant-digit cells."""
    lines = ["beta,noise_ratio,crude_slope,berry_slope,rho"]
    for row in rows:
        lines.append(
            ",".join(
                _g6(value)
                for value in (row.beta, row.noise_ratio, row.crude_slope, row.berry_slope, row.rho)
            )
        )
    return "\n".join(lines) + "\n"


def _stats_doc(stats: SampleStats) -> dict:
    return {
        "n": stats.n,
        "mean_x1": stats.mean_x1,
        "mean_x2": stats.mean_x2,
        "var_x1": stats.var_x1,
        "var_x2": stats.var_x2,
        "cov_x1x2": stats.cov_x1x2,
        "pearson_r": stats.pearson_r,
    }


def _slope_doc(est: SlopeEstimate) -> dict:
    return {"method": est.method, "value": est.value, "auxiliary": dict(est.auxiliary)}


def _bootstrap_doc(boot: BootstrapResult) -> dict:
    return {
        "method": boot.method,
        "point_estimate": boot.point_estimate,
        "level": boot.level,
        "ci_low": boot.ci_low,
        "ci_high": boot.ci_high,
        "n_boot": boot.n_boot,
        "n_failed": boot.n_failed,
        "failure_warning": boot.failure_warning,
        "replicates": boot.replicates,
    }


def _interval_doc(interval: RepeatabilityInterval) -> dict:
    return {
        "low": interval.low,
        "high": interval.high,
        "empty": interval.empty,
        "low_open": interval.low_open,
    }


def _pitman_doc(result: PitmanResult) -> dict:
    return {
        "statistic": result.statistic,
        "p_value": result.p_value,
        "n": result.n,
        "null": PITMAN_NULL_LABEL,
    }


def _permutation_doc(result: PermutationResult) -> dict:
    return {
        "observed_statistic": result.observed_statistic,
        "p_value": result.p_value,
        "n_permutations": result.n_permutations,
        "null": PERMUTATION_NULL_LABEL,
    }


def _decision_doc(decision: Optional[NullDecision]) -> Optional[dict]:
    if decision is None:
        return None
    return {
        "method": decision.method,
        "repeatability": decision.repeatability,
        "null_value": decision.null_value,
        "ci_low": decision.ci_low,
        "ci_high": decision.ci_high,
        "rejected": decision.rejected,
    }


def sampling_dist_doc(report: SamplingDistReport) -> dict:
    return {
        "config": {
            "params": params_doc(report.params),
            "n": report.n,
            "replicates": report.replicates,
            "master_seed": report.master_seed,
            "error_spec": error_spec_doc(report.error_spec),
        },
        "methods": {
            method: {
                "mean": summary.mean,
                "variance": summary.variance,
                "min": summary.min,
                "q1": summary.q1,
                "median": summary.median,
                "q3": summary.q3,
                "max": summary.max,
                "n_failed": summary.n_failed,
            }
            for method, summary in report.methods.items()
        },
    }


def head_to_head_doc(report: HeadToHeadReport) -> dict:
    return {
        "config": {
            "params": params_doc(report.params),
            "n": report.n,
            "replicates": report.replicates,
            "master_seed": report.master_seed,
            "error_spec": error_spec_doc(report.error_spec),
            "beta_grid": list(report.beta_grid),
        },
        "rows": [
            {
                "beta": row.beta,
                "p_crude_beats_berry": row.p_crude_beats_berry,
                "p_crude_beats_blomqvist": row.p_crude_beats_blomqvist,
                "n_failed": row.n_failed,
            }
            for row in report.rows
        ],
    }


def head_to_head_csv(report: HeadToHeadReport) -> str:
    lines = ["beta,p_crude_beats_berry,p_crude_beats_blomqvist,n_failed"]
    for row in report.rows:
        lines.append(
            f"{_g6(row.beta)},{_g6(row.p_crude_beats_berry)},"
            f"{_g6(row.p_crude_beats_blomqvist)},{row.n_failed}"
        )
    return "\n".join(lines) + "\n"


def analyze_doc(report: AnalyzeReport) -> dict:
    config = report.config
    return {
        "config": {
            "n": config.n,
            "n_boot": config.n_boot,
            "level": config.level,
            "n_perm": config.n_perm,
            "master_seed": config.master_seed,
            "negate_change": config.negate_change,
            "error_spec": error_spec_doc(config.error_spec),
            "known_r": config.known_r,
            "known_r_source": config.known_r_source,
            "params": params_doc(config.params) if config.params is not None else None,
        },
        "stats": _stats_doc(report.stats),
        "slopes": {method: _slope_doc(est) for method, est in report.slopes.items()},
        "bootstrap": {method: _bootstrap_doc(b) for method, b in report.bootstrap.items()},
        "repeatability_interval": _interval_doc(report.repeatability_interval),
        "tests": {
            "pitman": _pitman_doc(report.tests["pitman"]),
            "permutation": _permutation_doc(report.tests["permutation"]),
        },
        "decision": _decision_doc(report.decision),
        "warnings": list(report.warnings),
    }


def replicates_csv(values) -> str:
    """Bootstrap replicate export: one ``slope`` column, round-trip floats."""
    lines = ["slope"]
    for value in np.asarray(values, dtype=np.float64):
        lines.append(repr(float(value)))
    return "\n".join(lines) + "\n"


def adjusted_change_csv(values) -> str:
    """Adjusted-change export: one ``d_adj`` column, round-trip floats."""
    lines = ["d_adj"]
    for value in np.asarray(values, dtype=np.float64):
        lines.append(repr(float(value)))
    return "\n".join(lines) + "\n"


_NUMBER = {"type": "number"}
_NUMBER_OR_NULL = {"type": ["number", "null"]}
_STRING = {"type": "string"}
_BOOLEAN = {"type": "boolean"}
_INTEGER = {"type": "integer"}

_PARAMS_SCHEMA = {
    "type": "object",
    "required": ["mu", "sigma2", "alpha", "beta", "nu2", "delta2"],
    "additionalProperties": False,
    "properties": {name: _NUMBER for name in ("mu", "sigma2", "alpha", "beta", "nu2", "delta2")},
}

_ERROR_SPEC_SCHEMA = {
    "oneOf": [
        {"type": "null"},
        {
            "type": "object",
            "required": ["kind", "value"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["delta2", "repeatability"]},
                "value": _NUMBER,
            },
        },
    ]
}

_SLOPE_SCHEMA = {
    "type": "object",
    "required": ["method", "value", "auxiliary"],
    "additionalProperties": False,
    "properties": {
        "method": {"enum": ["crude", "berry", "blomqvist", "true"]},
        "value": _NUMBER,
        "auxiliary": {"type": "object"},
    },
}

_BOOTSTRAP_SCHEMA = {
    "type": "object",
    "required": [
        "method",
        "point_estimate",
        "level",
        "ci_low",
        "ci_high",
        "n_boot",
        "n_failed",
        "failure_warning",
        "replicates",
    ],
    "additionalProperties": False,
    "properties": {
        "method": {"enum": ["crude", "berry", "blomqvist"]},
        "point_estimate": _NUMBER,
        "level": _NUMBER,
        "ci_low": _NUMBER,
        "ci_high": _NUMBER,
        "n_boot": _INTEGER,
        "n_failed": _INTEGER,
        "failure_warning": _BOOLEAN,
        "replicates": {"type": "array", "items": _NUMBER},
    },
}

#: Published JSON Schema (draft-07) for the analyze report body.
ANALYZE_REPORT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "rtmkit analyze report",
    "type": "object",
    "required": [
        "config",
        "stats",
        "slopes",
        "bootstrap",
        "repeatability_interval",
        "tests",
        "decision",
        "warnings",
    ],
    "additionalProperties": False,
    "properties": {
        "config": {
            "type": "object",
            "required": [
                "n",
                "n_boot",
                "level",
                "n_perm",
                "master_seed",
                "negate_change",
                "error_spec",
                "known_r",
                "known_r_source",
                "params",
            ],
            "additionalProperties": False,
            "properties": {
                "n": _INTEGER,
                "n_boot": _INTEGER,
                "level": _NUMBER,
                "n_perm": _INTEGER,
                "master_seed": _INTEGER,
                "negate_change": _BOOLEAN,
                "error_spec": _ERROR_SPEC_SCHEMA,
                "known_r": _NUMBER_OR_NULL,
                "known_r_source": {
                    "oneOf": [
                        {"type": "null"},
                        {"enum": ["explicit", "error_spec", "implied_from_delta2"]},
                    ]
                },
                "params": {"oneOf": [{"type": "null"}, _PARAMS_SCHEMA]},
            },
        },
        "stats": {
            "type": "object",
            "required": ["n", "mean_x1", "mean_x2", "var_x1", "var_x2", "cov_x1x2", "pearson_r"],
            "additionalProperties": False,
            "properties": {
                "n": _INTEGER,
                "mean_x1": _NUMBER,
                "mean_x2": _NUMBER,
                "var_x1": _NUMBER,
                "var_x2": _NUMBER,
                "cov_x1x2": _NUMBER,
                "pearson_r": _NUMBER,
            },
        },
        "slopes": {
            "type": "object",
            "required": ["crude", "berry"],
            "additionalProperties": False,
            "properties": {
                "crude": _SLOPE_SCHEMA,
                "berry": _SLOPE_SCHEMA,
                "blomqvist": _SLOPE_SCHEMA,
            },
        },
        "bootstrap": {
            "type": "object",
            "required": ["crude"],
            "additionalProperties": False,
            "properties": {
                "crude": _BOOTSTRAP_SCHEMA,
                "blomqvist": _BOOTSTRAP_SCHEMA,
            },
        },
        "repeatability_interval": {
            "type": "object",
            "required": ["low", "high", "empty", "low_open"],
            "additionalProperties": False,
            "properties": {
                "low": _NUMBER_OR_NULL,
                "high": _NUMBER_OR_NULL,
                "empty": _BOOLEAN,
                "low_open": _BOOLEAN,
            },
        },
        "tests": {
            "type": "object",
            "required": ["pitman", "permutation"],
            "additionalProperties": False,
            "properties": {
                "pitman": {
                    "type": "object",
                    "required": ["statistic", "p_value", "n", "null"],
                    "additionalProperties": False,
                    "properties": {
                        "statistic": _NUMBER,
                        "p_value": _NUMBER,
                        "n": _INTEGER,
                        "null": _STRING,
                    },
                },
                "permutation": {
                    "type": "object",
                    "required": ["observed_statistic", "p_value", "n_permutations", "null"],
                    "additionalProperties": False,
                    "properties": {
                        "observed_statistic": _NUMBER,
                        "p_value": _NUMBER,
                        "n_permutations": _INTEGER,
                        "null": _STRING,
                    },
                },
            },
        },
        "decision": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "required": [
                        "method",
                        "repeatability",
                        "null_value",
                        "ci_low",
                        "ci_high",
                        "rejected",
                    ],
                    "additionalProperties": False,
                    "properties": {
                        "method": {"enum": ["crude"]},
                        "repeatability": _NUMBER,
                        "null_value": _NUMBER,
                        "ci_low": _NUMBER,
                        "ci_high": _NUMBER,
                        "rejected": _BOOLEAN,
                    },
                },
            ]
        },
        "warnings": {"type": "array", "items": _STRING},
    },
}
