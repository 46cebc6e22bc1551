"""JSON / CSV serialization for matrices, factorizations and reports.

Matrix JSON::

    {"rows": 2, "cols": 2, "field": "real", "data": [1, 0, 0, 1]}

``data`` is row-major; complex matrices store ``[re, im]`` pairs (real ones
may as well). Factorization JSON::

    {"size": r, "field": "complex", "E": [matrix, ...], "F": [matrix, ...]}
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .exceptions import PsdRankError
from .factorizations import PsdFactorization
from .linalg import field_of

__all__ = [
    "MalformedInputError",
    "matrix_to_json",
    "matrix_from_json",
    "factorization_to_json",
    "factorization_from_json",
    "load_matrix",
    "save_matrix",
    "load_factorization",
    "save_factorization",
    "round_floats",
    "dumps_report",
]

REPORT_DIGITS = 12


class MalformedInputError(PsdRankError, ValueError):
    """An input file does not follow the expected schema."""


def matrix_to_json(m) -> dict[str, Any]:
    arr = np.asarray(m)
    if arr.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    field = field_of(arr)
    flat = arr.ravel()
    if field == "real":
        data = [float(x) for x in np.real(flat)]
    else:
        data = [[float(z.real), float(z.imag)] for z in flat]
    return {"rows": int(arr.shape[0]), "cols": int(arr.shape[1]), "field": field, "data": data}


def matrix_from_json(obj: Any, where: str = "matrix") -> np.ndarray:
    if not isinstance(obj, dict):
        raise MalformedInputError(f"{where}: expected a JSON object")
    for key in ("rows", "cols", "data"):
        if key not in obj:
            raise MalformedInputError(f"{where}: missing field {key!r}")
    rows, cols = obj["rows"], obj["cols"]
    if not (isinstance(rows, int) and isinstance(cols, int)) or rows < 1 or cols < 1:
        raise MalformedInputError(f"{where}: fields 'rows' and 'cols' must be positive integers")
    field = obj.get("field", "real")
    if field not in ("real", "complex"):
        raise MalformedInputError(f"{where}: field 'field' must be 'real' or 'complex'")
    data = obj["data"]
    if not isinstance(data, list) or len(data) != rows * cols:
        raise MalformedInputError(f"{where}: field 'data' must hold rows*cols = {rows * cols} entries")
    values = []
    for idx, entry in enumerate(data):
        if isinstance(entry, (int, float)) and not isinstance(entry, bool):
            values.append(complex(entry, 0.0))
        elif (isinstance(entry, list) and len(entry) == 2
              and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)):
            values.append(complex(entry[0], entry[1]))
        else:
            raise MalformedInputError(f"{where}: field 'data' entry {idx} is not a number or [re, im] pair")
    arr = np.array(values, dtype=complex).reshape(rows, cols)
    if field == "real":
        if np.any(arr.imag != 0):
            raise MalformedInputError(f"{where}: field 'data' has imaginary parts but field is 'real'")
        return arr.real.copy()
    return arr


def factorization_to_json(fact: PsdFactorization) -> dict[str, Any]:
    field = fact.field
    conv = (lambda x: np.real(x)) if field == "real" else (lambda x: x)
    return {
        "size": fact.size,
        "field": field,
        "E": [matrix_to_json(conv(e)) for e in fact.e_factors],
        "F": [matrix_to_json(conv(f)) for f in fact.f_factors],
    }


def factorization_from_json(obj: Any) -> PsdFactorization:
    if not isinstance(obj, dict):
        raise MalformedInputError("factorization: expected a JSON object")
    for key in ("size", "E", "F"):
        if key not in obj:
            raise MalformedInputError(f"factorization: missing field {key!r}")
    size = obj["size"]
    if not isinstance(size, int) or size < 1:
        raise MalformedInputError("factorization: field 'size' must be a positive integer")
    stacks = []
    for key in ("E", "F"):
        if not isinstance(obj[key], list) or not obj[key]:
            raise MalformedInputError(f"factorization: field {key!r} must be a nonempty list")
        mats = [matrix_from_json(m, f"factorization.{key}[{i}]") for i, m in enumerate(obj[key])]
        for i, m in enumerate(mats):
            if m.shape != (size, size):
                raise MalformedInputError(f"factorization.{key}[{i}]: expected {size}x{size}, got {m.shape}")
        stacks.append(np.array(mats))
    return PsdFactorization(stacks[0], stacks[1])


def _read_json(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"{path}: invalid JSON ({exc})") from None


def load_matrix(path: str | Path) -> np.ndarray:
    """Read a matrix from JSON or (real-valued) CSV, chosen by file suffix."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
        try:
            arr = np.array([[float(c) for c in r] for r in rows])
        except ValueError as exc:
            raise MalformedInputError(f"{path}: non-numeric CSV entry ({exc})") from None
        if arr.ndim != 2 or arr.size == 0:
            raise MalformedInputError(f"{path}: CSV rows must be nonempty and of equal length")
        return arr
    return matrix_from_json(_read_json(path), str(path))


def _write_json(obj: Any, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True)
        fh.write("\n")


def save_matrix(m, path: str | Path) -> None:
    _write_json(matrix_to_json(m), path)


def load_factorization(path: str | Path) -> PsdFactorization:
    return factorization_from_json(_read_json(path))


def save_factorization(fact: PsdFactorization, path: str | Path) -> None:
    _write_json(factorization_to_json(fact), path)


def round_floats(obj: Any, digits: int = REPORT_DIGITS) -> Any:
    """Round every float in a nested structure to ``digits`` significant digits."""
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if not math.isfinite(x) else float(f"{x:.{digits}g}")
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return round_floats(obj.tolist(), digits)
    if isinstance(obj, dict):
        return {str(k): round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, digits) for v in obj]
    return obj


def dumps_report(obj: Any) -> str:
    """Deterministic JSON text: sorted keys, floats at 12 significant digits."""
    payload = round_floats(obj)
    if isinstance(payload, dict):
        payload.setdefault("schema", 1)
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"
