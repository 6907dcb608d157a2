"""JSON encoding helpers for complex scalars and vectors."""

from __future__ import annotations

import json

import numpy as np


def complex_to_json(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def complex_from_json(d) -> complex:
    if isinstance(d, (int, float)) and not isinstance(d, bool):
        return complex(d)
    return complex(d["re"], d.get("im", 0.0))


def vector_to_json(v) -> list[dict]:
    return [complex_to_json(z) for z in np.asarray(v).ravel()]


def vector_from_json(items) -> np.ndarray:
    return np.array([complex_from_json(x) for x in items], dtype=complex)


def dumps(obj) -> str:
    """Stable serialization: sorted keys, fixed indent, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"
