"""File formats used by the command line tool."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .combinatorics import Margins


def matrix_to_json(M) -> dict:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError("expected a 2-dimensional matrix")
    return {"rows": int(M.shape[0]), "cols": int(M.shape[1]),
            "entries": [float(x) for x in M.ravel()]}


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows, cols, entries = int(obj["rows"]), int(obj["cols"]), obj["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"not a matrix object: {exc}") from exc
    if rows < 0 or cols < 0 or len(entries) != rows * cols:
        raise ValueError(f"expected {rows}x{cols} entries, got {len(entries)}")
    M = np.array(entries, dtype=float).reshape(rows, cols)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def margins_from_json(obj) -> Margins:
    try:
        return Margins(obj["m"], obj["n"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"not a margins object: {exc}") from exc


def read_json(path) -> object:
    return json.loads(Path(path).read_text())


def _format(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError("cannot serialize non-finite float")
        s = format(x, ".17g")
        if "e" not in s and "." not in s and "n" not in s:
            s += ".0"
        return s
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_format(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_format(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _format(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with floats written to 17 significant digits."""
    return _format(obj, indent, 0)
