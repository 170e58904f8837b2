"""JSON conversion and the published output schemas."""

from __future__ import annotations

import json
from fractions import Fraction


def to_jsonable(obj):
    """Rationals become "p/q" strings, codes become text; floats stay floats."""
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, bytes):
        return obj.decode()
    if isinstance(obj, dict):
        return {(k.decode() if isinstance(k, bytes) else str(k)): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    return obj


def dumps(doc) -> str:
    return json.dumps(to_jsonable(doc), indent=2, sort_keys=True) + "\n"


_RATIONAL = {"type": "string", "pattern": r"^-?\d+/\d+$"}
_NUMBER_OR_NULL = {"type": ["number", "null"]}

SCHEMAS = {
    "count": {
        "type": "object",
        "required": ["command", "graph"],
        "properties": {
            "command": {"const": "count"},
            "graph": {"type": "object", "required": ["n", "m"]},
            "hom": {"type": "integer"},
            "inj": {"type": "integer"},
            "ind": {"type": "integer"},
            "t": {"type": ["string", "number"]},
            "log_t": {"type": "number"},
            "i_profiles": {
                "type": "object",
                "additionalProperties": {
                    "type": "object",
                    "additionalProperties": {"type": "integer"},
                },
            },
        },
    },
    "cgf": {
        "type": "object",
        "required": ["command", "k", "f", "f_bridge"],
        "properties": {
            "command": {"const": "cgf"},
            "k": {"type": "integer"},
            "f": {"type": "number"},
            "f_bridge": {"type": "number"},
            "lambda_norm_inf": {"type": "number"},
        },
    },
    "cumulant": {
        "type": "object",
        "required": ["command", "k", "pairs", "direct"],
        "properties": {
            "command": {"const": "cumulant"},
            "pairs": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
            "direct": _RATIONAL,
            "decomposition": _RATIONAL,
            "agree": {"type": "boolean"},
        },
    },
    "catalog": {
        "type": "object",
        "required": ["command", "l", "patterns"],
        "properties": {
            "command": {"const": "catalog"},
            "l": {"type": "integer"},
            "patterns": {"type": "array"},
            "E": {"type": "array", "items": {"type": "array", "items": _RATIONAL}},
            "P": {"type": "array", "items": {"type": "array", "items": _RATIONAL}},
            "K": {"type": "array", "items": {"type": "array", "items": _RATIONAL}},
            "report": {"type": "object"},
        },
    },
    "taylor": {
        "type": "object",
        "required": ["command", "k", "order", "coefficients"],
        "properties": {
            "command": {"const": "taylor"},
            "coefficients": {"type": "array"},
            "radius": {"type": "number"},
            "evaluations": {"type": "array"},
        },
    },
    "diagnose": {
        "type": "object",
        "required": ["command", "columns", "rows"],
        "properties": {
            "command": {"const": "diagnose"},
            "columns": {"type": "array", "items": {"type": "string"}},
            "rows": {"type": "array"},
            "slopes": {"type": "object", "additionalProperties": _NUMBER_OR_NULL},
        },
    },
    "verify": {
        "type": "object",
        "required": ["command", "tier", "ok", "checks"],
        "properties": {
            "command": {"const": "verify"},
            "ok": {"type": "boolean"},
            "checks": {
                "type": "array",
                "items": {"type": "object", "required": ["name", "ok"]},
            },
        },
    },
}
