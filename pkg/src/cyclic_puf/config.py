"""Experiment configuration documents: JSON schemas, defaults and validation."""
from __future__ import annotations

import copy
import zlib

import jsonschema
import numpy as np

from .errors import ConfigError

_VARIATION = {
    "type": "object",
    "properties": {
        "mu": {"type": "number", "exclusiveMinimum": 0},
        "sigma_random": {"type": "number", "minimum": 0},
        "sigma_systematic": {"type": "number", "minimum": 0},
        "jitter_sigma": {"type": "number", "minimum": 0},
    },
    "additionalProperties": False,
}

_TRAIN = {
    "type": "object",
    "properties": {
        "learning_rate": {"type": "number", "exclusiveMinimum": 0},
        "epochs": {"type": "integer", "minimum": 1},
        "batch_size": {"type": "integer", "minimum": 1},
        "hidden": {"type": "integer", "minimum": 1},
        "init_scale": {"type": "number", "exclusiveMinimum": 0},
    },
    "additionalProperties": False,
}

_CATEGORY = {"enum": ["apuf", "ropuf", "bpuf"]}

TABLE1_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "Modeling-attack experiment (acyclic, cyclic and faulty cyclic PUFs)",
    "type": "object",
    "properties": {
        "kind": {"const": "table1"},
        "seed": {"type": "integer", "minimum": 0},
        "challenge_width": {"type": "integer", "minimum": 1},
        "num_challenges": {"type": "integer", "minimum": 5},
        "cycles": {"type": "integer", "minimum": 1},
        "model": {"enum": ["lr", "mlp"]},
        "variation": _VARIATION,
        "train": _TRAIN,
        "designs": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "category": _CATEGORY,
                    "taps": {"type": "integer", "minimum": 0},
                    "faults": {"type": "integer", "minimum": 0},
                    "feature_map": {"enum": ["parity", "raw", "raw+parity"]},
                },
                "required": ["category", "taps", "faults"],
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}

TABLE2_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "Functional-metrics experiment (acyclic vs cyclic PUF populations)",
    "type": "object",
    "properties": {
        "kind": {"const": "table2"},
        "seed": {"type": "integer", "minimum": 0},
        "challenge_width": {"type": "integer", "minimum": 1},
        "response_width": {"type": "integer", "minimum": 1},
        "k": {"type": "integer", "minimum": 2},
        "m": {"type": "integer", "minimum": 1},
        "s": {"type": "integer", "minimum": 1},
        "cycles": {"type": "integer", "minimum": 1},
        "designs": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "category": _CATEGORY,
                    "taps": {"type": "integer", "minimum": 0},
                    "variation": _VARIATION,
                },
                "required": ["category", "taps"],
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}

# Bench defaults for variation: a strongly shared (lot-level) delay bias for the
# arbiter and butterfly designs, an unbiased lot for the ring oscillator.
BIASED_VARIATION = {"mu": 1.0, "sigma_random": 0.01, "sigma_systematic": 0.05, "jitter_sigma": 0.005}
UNBIASED_VARIATION = {"mu": 1.0, "sigma_random": 0.05, "sigma_systematic": 0.0, "jitter_sigma": 0.005}

TABLE1_DEFAULTS = {
    "kind": "table1",
    "seed": 0,
    "challenge_width": 64,
    "num_challenges": 20000,
    "cycles": 4,
    "model": "lr",
    "variation": dict(UNBIASED_VARIATION),
    "train": {"learning_rate": 0.05, "epochs": 50, "batch_size": 256, "hidden": 64, "init_scale": 0.1},
    "designs": [
        {"category": "apuf", "taps": 4, "faults": 2, "feature_map": "parity"},
        {"category": "ropuf", "taps": 16, "faults": 11, "feature_map": "raw"},
        {"category": "bpuf", "taps": 12, "faults": 7, "feature_map": "parity"},
    ],
}

TABLE2_DEFAULTS = {
    "kind": "table2",
    "seed": 0,
    "challenge_width": 4,
    "response_width": 4,
    "k": 10,
    "m": 256,
    "s": 8,
    "cycles": 64,
    "designs": [
        {"category": "apuf", "taps": 4, "variation": dict(BIASED_VARIATION)},
        {"category": "ropuf", "taps": 4, "variation": dict(UNBIASED_VARIATION)},
        {"category": "bpuf", "taps": 4, "variation": dict(BIASED_VARIATION)},
    ],
}

# Default attack features: the ring-oscillator response is additive in the raw
# challenge bits, the other two in the parity transform.
DEFAULT_FEATURE_MAP = {"apuf": "parity", "ropuf": "raw", "bpuf": "parity"}

SCHEMAS = {"table1": TABLE1_SCHEMA, "table2": TABLE2_SCHEMA}
DEFAULTS = {"table1": TABLE1_DEFAULTS, "table2": TABLE2_DEFAULTS}


def resolve(doc: dict, kind: str) -> dict:
    """Validate ``doc`` and fill in defaults; the result is fully explicit."""
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("experiment config must be a JSON object")
    try:
        jsonschema.validate(doc, SCHEMAS[kind])
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config {path}: {exc.message}") from None
    out = copy.deepcopy(DEFAULTS[kind])
    for key, value in doc.items():
        if key in ("variation", "train"):
            out[key].update(value)
        else:
            out[key] = copy.deepcopy(value)
    if kind == "table1":
        for d in out["designs"]:
            d.setdefault("feature_map", DEFAULT_FEATURE_MAP[d["category"]])
            if d["taps"] > out["challenge_width"]:
                raise ConfigError(f"{d['category']}: {d['taps']} taps exceed challenge width")
    else:
        for d in out["designs"]:
            d["variation"] = {**UNBIASED_VARIATION, **d.get("variation", {})}
            if d["taps"] > out["challenge_width"]:
                raise ConfigError(f"{d['category']}: {d['taps']} taps exceed challenge width")
    return out


def derive_seed(base: int, *labels) -> int:
    """Stable 32-bit child seed for a named sub-experiment."""
    words = [int(base)] + [zlib.crc32(str(x).encode()) if not isinstance(x, int) else x for x in labels]
    return int(np.random.SeedSequence(words).generate_state(1)[0])
