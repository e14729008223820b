"""JSON schemas for every file the CLI reads or writes."""

from __future__ import annotations

import jsonschema

from .errors import SchemaViolation

_NUM = {"type": "number"}
_PAIR = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}

_CHANNEL = {
    "type": "array",
    "minItems": 1,
    "items": {
        "type": "object",
        "required": ["lo", "hi", "slope", "intercept"],
        "properties": {k: _NUM for k in ("lo", "hi", "slope", "intercept")},
    },
}

LOSS = {
    "type": "object",
    "required": ["spec_digest", "capacity", "load_range", "da_regions", "rt_regions", "joint"],
    "properties": {
        "spec_digest": {"type": "string"},
        "capacity": {"type": "number", "exclusiveMinimum": 0},
        "load_range": _PAIR,
        "da_regions": _CHANNEL,
        "rt_regions": _CHANNEL,
        "joint": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["da_id", "rt_id", "beta_yhat", "beta_l", "beta_y", "beta_0"],
                "properties": {
                    "da_id": {"type": "integer", "minimum": 0},
                    "rt_id": {"type": "integer", "minimum": 0},
                    **{k: _NUM for k in ("beta_yhat", "beta_l", "beta_y", "beta_0")},
                },
            },
        },
    },
}

_VALIDATION = {
    "type": "object",
    "required": ["n_samples", "failures", "max_map_error", "max_cost_error", "ok"],
    "properties": {
        "n_samples": {"type": "integer"},
        "failures": {"type": "integer"},
        "max_map_error": _NUM,
        "max_cost_error": _NUM,
        "ok": {"type": "boolean"},
    },
}

REGION_REPORT = {
    "type": "object",
    "required": ["K_D", "K_R", "n_joint", "spec_digest", "da_regions", "rt_regions", "joint", "validation"],
    "properties": {
        "K_D": {"type": "integer", "minimum": 1},
        "K_R": {"type": "integer", "minimum": 1},
        "n_joint": {"type": "integer", "minimum": 1},
        "spec_digest": {"type": "string"},
        "da_regions": _CHANNEL,
        "rt_regions": _CHANNEL,
        "joint": {"type": "array"},
        "validation": {
            "type": "object",
            "required": ["day_ahead", "real_time"],
            "properties": {"day_ahead": _VALIDATION, "real_time": _VALIDATION},
        },
    },
}

METRICS = {
    "type": "object",
    "required": ["mode", "seed", "epochs", "rmse", "ams", "wall_time"],
    "properties": {
        "mode": {"enum": ["value", "quality", "diffopt"]},
        "seed": {"type": "integer"},
        "epochs": {"type": "integer", "minimum": 0},
        "rmse": _NUM,
        "ams": _NUM,
        "wall_time": {"type": "number", "minimum": 0},
        "loss_trace": {"type": "array", "items": _NUM},
    },
}

EVALUATION = {
    "type": "object",
    "required": ["rmse", "ams", "n_samples", "spec_digest"],
    "properties": {
        "rmse": _NUM,
        "ams": _NUM,
        "n_samples": {"type": "integer", "minimum": 0},
        "spec_digest": {"type": "string"},
    },
}

CHECKPOINT = {
    "type": "object",
    "required": ["capacity", "feat_mean", "feat_std", "params"],
    "properties": {
        "capacity": {"type": "number", "exclusiveMinimum": 0},
        "feat_mean": {"type": "array", "items": _NUM},
        "feat_std": {"type": "array", "items": _NUM},
        "params": {"type": "array", "minItems": 2},
        "seed": {"type": "integer"},
    },
}

SLICE = {
    "type": "object",
    "required": ["l", "y", "breakpoints", "segments"],
    "properties": {
        "l": _NUM,
        "y": _NUM,
        "breakpoints": {"type": "array", "items": _NUM},
        "segments": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["yhat_lo", "yhat_hi", "slope"],
                "properties": {k: _NUM for k in ("yhat_lo", "yhat_hi", "slope")},
            },
        },
    },
}

CONFIG = {
    "type": "object",
    "properties": {
        "spec": {"type": ["string", "object"]},
        "train": {
            "type": "object",
            "properties": {
                "learning_rate": {"type": "number", "exclusiveMinimum": 0},
                "batch_size": {"type": "integer", "minimum": 1},
                "epochs": {"type": "integer", "minimum": 0},
                "hidden": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                "seed": {"type": "integer"},
            },
            "additionalProperties": False,
        },
        "data": {
            "type": "object",
            "properties": {
                "train": {"type": "string"},
                "test": {"type": "string"},
                "n_train": {"type": "integer", "minimum": 1},
                "n_test": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer"},
            },
            "additionalProperties": False,
        },
        "loss": {"type": "string"},
        "derive_seed": {"type": "integer"},
    },
    "additionalProperties": False,
}


def check(doc, schema, what: str):
    """Raise SchemaViolation with the offending JSON path on failure."""
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaViolation(f"{what}: {where}: {exc.message}") from None
