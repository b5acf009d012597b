"""Curvature reports and their JSON encoding.

Complex numbers are written as ``[re, im]`` pairs, matrices row-major as
nested lists, and non-finite floats as the strings ``"inf"``, ``"-inf"`` and
``"nan"`` so that every report is strict JSON.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

SCHEMA = "curvlab/1"

_NONFINITE = {"inf": math.inf, "-inf": -math.inf, "nan": math.nan}


def encode_value(value):
    """Turn numpy data into JSON-compatible python objects."""
    if isinstance(value, dict):
        return {str(k): encode_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [encode_value(v) for v in value]
    if isinstance(value, np.ndarray):
        if np.iscomplexobj(value):
            if value.ndim == 0:
                return encode_value(complex(value))
            return [encode_value(v) for v in value]
        return encode_value(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [encode_value(float(value.real)), encode_value(float(value.imag))]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def decode_float(value):
    if isinstance(value, str):
        return _NONFINITE[value]
    return float(value)


def decode_complex_matrix(rows) -> np.ndarray:
    """Parse a row-major matrix whose entries are numbers or ``[re, im]`` pairs."""
    def entry(v):
        if isinstance(v, (list, tuple)):
            if len(v) != 2:
                raise ValidationError("complex entries must be [re, im] pairs")
            return complex(float(v[0]), float(v[1]))
        return complex(float(v))

    return np.array([[entry(v) for v in row] for row in rows], dtype=complex)


@dataclass
class CurvatureReport:
    """Result of a curvature computation.

    ``mode`` is ``"exact_pencil"`` when every per-site value comes from a
    pencil eigenvalue, and ``"sampled"`` when an infimum over samples was
    taken, in which case ``samples`` and ``seed`` are recorded.
    """

    kind: str
    bound: float
    per_site: dict = field(default_factory=dict)
    witness: dict | None = None
    mode: str = "exact_pencil"
    samples: int | None = None
    seed: int | None = None
    tolerances: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        mode = {"name": self.mode}
        if self.mode == "sampled":
            mode.update(samples=self.samples, seed=self.seed)
        return encode_value(
            {
                "schema": SCHEMA,
                "kind": self.kind,
                "bound": self.bound,
                "per_site": self.per_site,
                "witness": self.witness,
                "mode": mode,
                "tolerances": self.tolerances,
                "details": self.details,
            }
        )

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "CurvatureReport":
        mode = data["mode"]
        return cls(
            kind=data["kind"],
            bound=decode_float(data["bound"]),
            per_site={k: decode_float(v) for k, v in data["per_site"].items()},
            witness=data.get("witness"),
            mode=mode["name"],
            samples=mode.get("samples"),
            seed=mode.get("seed"),
            tolerances=data.get("tolerances", {}),
            details=data.get("details", {}),
        )


def dumps(obj) -> str:
    return json.dumps(encode_value(obj), indent=2, sort_keys=True, allow_nan=False)


_number = {"oneOf": [{"type": "number"}, {"enum": ["inf", "-inf", "nan"]}]}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "curvlab report",
    "type": "object",
    "required": ["schema", "kind", "bound", "per_site", "mode", "tolerances"],
    "properties": {
        "schema": {"const": SCHEMA},
        "kind": {"type": "string"},
        "bound": _number,
        "per_site": {"type": "object", "additionalProperties": _number},
        "witness": {"type": ["object", "null"]},
        "mode": {
            "type": "object",
            "required": ["name"],
            "properties": {
                "name": {"enum": ["exact_pencil", "sampled"]},
                "samples": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer"},
            },
        },
        "tolerances": {"type": "object"},
        "details": {"type": "object"},
    },
}
