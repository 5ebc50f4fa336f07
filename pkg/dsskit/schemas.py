"""各命令 --json 输出的 JSON Schema (draft-07)。"""

from typing import Any, Dict

_NUMBER = {"type": "number"}
_INT = {"type": "integer"}
_STRING = {"type": "string"}
_BOOL = {"type": "boolean"}
_NULLABLE_NUMBER = {"type": ["number", "null"]}


def _object(properties: Dict[str, Any], required=None) -> Dict[str, Any]:
    return {
        "type": "object",
        "properties": properties,
        "required": list(required if required is not None else properties),
    }


BREAKDOWN = _object(
    {k: _NUMBER for k in ("a", "b", "x_B_L", "x_R_F", "x_B_F", "dss")}
)

CRITICALITY = {"type": "string", "enum": ["SC", "NSC"]}

SCENARIO = {
    "oneOf": [
        _object({k: _NUMBER for k in ("d_V", "delta_v", "t_BR", "v_L")}),
        _object({k: _NUMBER for k in ("x_L", "x_F", "v_L", "v_F", "t_BR")}),
    ]
}

COVERAGE = _object(
    {
        "states": _INT,
        "covered": _INT,
        "total": _INT,
        "fraction": _NUMBER,
        "hits": {"type": "object", "additionalProperties": _INT},
        "speed_hits": {"type": "object", "additionalProperties": _INT},
        "accel_hits": {"type": "object", "additionalProperties": _INT},
        "missing": {"type": "array", "items": _STRING},
    }
)

EVAL = _object(
    {
        "scenario": SCENARIO,
        "env": _object({k: _NUMBER for k in ("g", "mu", "l_V")}),
        "breakdown": BREAKDOWN,
        "criticality": CRITICALITY,
        "threshold": _NUMBER,
    }
)

EVAL_SUITE = _object(
    {
        "cases": {
            "type": "array",
            "items": _object(
                {
                    "id": _STRING,
                    "stored_dss": _NUMBER,
                    "dss": _NUMBER,
                    "difference": _NUMBER,
                    "criticality": CRITICALITY,
                }
            ),
        },
        "max_difference": _NUMBER,
        "passed": _BOOL,
    }
)

CLASSIFY = _object(
    {
        "dss": _NUMBER,
        "criticality": CRITICALITY,
        "threshold": _NUMBER,
        "speed_relevant": _INT,
        "accel_relevant": _INT,
    },
    required=["dss", "criticality", "threshold"],
)

TEST_CASE = _object(
    {
        "id": _STRING,
        "axis": _STRING,
        "criticality": CRITICALITY,
        "description": _STRING,
        "params": SCENARIO,
        "expected_dss": _NUMBER,
        "breakdown": BREAKDOWN,
        "boundary": _NUMBER,
        "offset": _NUMBER,
    }
)

SUITE = _object(
    {
        "form": {"type": "string", "enum": ["relative", "absolute"]},
        "cases": {"type": "array", "items": TEST_CASE},
        "skipped": {
            "type": "array",
            "items": _object({"axis": _STRING, "reason": _STRING}),
        },
        "config": {"type": "object"},
        "provenance": _object(
            {"tool_version": _STRING, "created_at": _STRING, "rng": {"type": "object"}},
            required=["tool_version", "rng"],
        ),
    }
)

SIMULATE = _object(
    {
        "collided": _BOOL,
        "min_gap": _NUMBER,
        "stop_time": _NUMBER,
        "final_gap": _NUMBER,
        "collision_time": _NULLABLE_NUMBER,
        "completed": _BOOL,
        "leader_travel": _NUMBER,
        "follower_travel": _NUMBER,
        "coverage": COVERAGE,
    },
    required=[
        "collided",
        "min_gap",
        "stop_time",
        "final_gap",
        "collision_time",
        "completed",
    ],
)

VERIFY = _object(
    {
        "total": _INT,
        "checked": _INT,
        "excluded": _INT,
        "fraction": _NUMBER,
        "max_form_error": _NUMBER,
        "passed": _BOOL,
        "disagreements": {"type": "array", "items": {"type": "object"}},
        "seed": _INT,
        "rng": {"type": "object"},
    }
)

SWEEP = _object(
    {
        "axes": {"type": "array", "items": _STRING, "minItems": 2, "maxItems": 2},
        "shape": {"type": "array", "items": _INT, "minItems": 2, "maxItems": 2},
        "points": {"type": "array", "items": {"type": "object"}},
        "coverage": COVERAGE,
    }
)

SCHEMAS: Dict[str, Dict[str, Any]] = {
    "eval": EVAL,
    "eval-suite": EVAL_SUITE,
    "classify": CLASSIFY,
    "derive": SUITE,
    "simulate": SIMULATE,
    "verify": VERIFY,
    "sweep": SWEEP,
}


def get_schema(name: str) -> Dict[str, Any]:
    """带 $schema 与 title 的完整 schema。"""
    return {
        "$schema": "http://json-schema.org/draft-07/schema#",
        "title": f"dsskit {name}",
        **SCHEMAS[name],
    }
