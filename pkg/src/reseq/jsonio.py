"""Deterministic JSON serialization for pipeline artifacts.

Floats are written with 17 significant digits so identical doubles always
produce identical bytes, across runs and platforms.
"""

from __future__ import annotations

import json
import math

import numpy as np


def dumps(obj, indent: int = 0) -> str:
    """Serialize like json.dumps but with deterministic float formatting."""
    return "".join(_emit(obj, indent, 0))


def dump(obj, path, indent: int = 2) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps(obj, indent=indent))
        f.write("\n")


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite float {x!r} cannot appear in an artifact")
    return format(x, ".17g")


def _emit(obj, indent: int, depth: int):
    pad = "\n" + " " * (indent * (depth + 1)) if indent else ""
    close = "\n" + " " * (indent * depth) if indent else ""
    sep = ": " if indent else ":"
    if isinstance(obj, dict):
        if not obj:
            yield "{}"
            return
        yield "{"
        for k, (key, val) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be str, got {type(key)}")
            if k:
                yield ","
            yield pad
            yield json.dumps(key, ensure_ascii=False)
            yield sep
            yield from _emit(val, indent, depth + 1)
        yield close + "}"
    elif isinstance(obj, (list, tuple, np.ndarray)):
        items = obj.tolist() if isinstance(obj, np.ndarray) else obj
        if not len(items):
            yield "[]"
            return
        yield "["
        for k, val in enumerate(items):
            if k:
                yield ","
            yield pad
            yield from _emit(val, indent, depth + 1)
        yield close + "]"
    elif isinstance(obj, bool) or obj is None:
        yield json.dumps(obj)
    elif isinstance(obj, (float, np.floating)):
        yield _fmt_float(float(obj))
    elif isinstance(obj, (int, np.integer)):
        yield str(int(obj))
    elif isinstance(obj, str):
        yield json.dumps(obj, ensure_ascii=False)
    else:
        raise TypeError(f"cannot serialize {type(obj)}")
