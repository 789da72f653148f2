"""
JSON Schemas for emitted and persisted documents

This module contains the JSON schemas of the documents tailvar reads and writes.
Loaders check incoming documents against the `required` lists before building
domain objects from them.
"""

from typing import Any, Dict, List

from tailvar.utils.errors import DataError

# Schema for series diagnostics (the `stats` command)
DIAGNOSTICS_SCHEMA = {
    "type": "object",
    "properties": {
        "n": {"type": "integer"},
        "mean": {"type": "number", "description": "Sample mean, percent"},
        "sd": {"type": "number", "description": "Sample standard deviation, percent"},
        "min": {"type": "number"},
        "max": {"type": "number"},
        "skewness": {"type": "number"},
        "excess_kurtosis": {"type": "number", "description": "Kurtosis minus 3"},
        "ks_stat": {"type": "number", "description": "KS distance to the fitted normal"},
        "ljung_box": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "lags": {"type": "integer"},
                    "statistic": {"type": "number"},
                    "p_value": {"type": "number"},
                    "squared": {"type": "boolean"}
                },
                "required": ["lags", "statistic", "p_value", "squared"]
            }
        }
    },
    "required": ["n", "mean", "sd", "min", "max", "skewness", "excess_kurtosis", "ks_stat", "ljung_box"]
}

# Schema for a persisted GARCH model (the `fit` command)
GARCH_MODEL_SCHEMA = {
    "type": "object",
    "properties": {
        "c": {"type": "number"},
        "phi": {"type": "number"},
        "a0": {"type": "number"},
        "a1": {"type": "number"},
        "b1": {"type": "number"},
        "df": {"type": "number"},
        "innovation": {"type": "string", "enum": ["t", "normal"]},
        "loglik": {"type": "number"},
        "mu_next": {"type": "number"},
        "sigma_next": {"type": "number"},
        "n": {"type": "integer"},
        "eq12_integral": {"type": "number"},
        "stationary": {"type": "boolean"},
        "param_se": {"type": "object"},
        "diagnostics": {"type": "object"},
        "sigma": {"type": "array", "items": {"type": "number"}},
        "z": {"type": "array", "items": {"type": "number"}}
    },
    "required": ["c", "phi", "a0", "a1", "b1", "df", "loglik", "mu_next", "sigma_next",
                 "n", "eq12_integral", "sigma", "z"]
}

# Schema for the Monte Carlo report (the `simulate` command)
MC_REPORT_SCHEMA = {
    "type": "object",
    "properties": {
        "config": {"type": "object"},
        "completed": {"type": "integer"},
        "failures": {"type": "integer"},
        "alpha_mean": {"type": ["number", "null"]},
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "p": {"type": "number"},
                    "horizon": {"type": "integer"},
                    "mean_pred": {"type": "number"},
                    "sd_pred": {"type": "number"},
                    "empirical": {"type": "number"},
                    "theoretical": {"type": "number"},
                    "rel_error": {"type": "number"},
                    "paper_ref": {"type": ["number", "null"]}
                },
                "required": ["p", "horizon", "mean_pred", "sd_pred", "empirical", "paper_ref"]
            }
        }
    },
    "required": ["config", "completed", "failures", "rows"]
}


def missing_fields(document: Dict[str, Any], schema: Dict[str, Any]) -> List[str]:
    """Return the schema's required top-level keys absent from `document`."""
    return [key for key in schema.get("required", []) if key not in document]


def check_document(document: Any, schema: Dict[str, Any], what: str) -> Dict[str, Any]:
    """
    Check a loaded document against a schema's required keys.

    Args:
        document: The loaded JSON value
        schema: One of the schemas above
        what: Human-readable name used in error messages

    Returns:
        The document, unchanged
    """
    if not isinstance(document, dict):
        raise DataError(f"{what} must be a JSON object")
    missing = missing_fields(document, schema)
    if missing:
        raise DataError(f"{what} is missing required fields: {', '.join(missing)}")
    return document
