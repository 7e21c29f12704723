"""Canonical, byte-stable JSON for run reports.

Keys are sorted, floats are written with 17 significant digits (enough to
round-trip any double), rationals as ``"num/den"`` strings and non-finite
floats as the strings ``"inf"``, ``"-inf"`` and ``"nan"``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import __version__


def plain(obj):
    """Convert report objects into JSON-ready builtins (floats left as floats)."""
    if hasattr(obj, "to_json"):
        return plain(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def format_float(v: float) -> str:
    if math.isnan(v):
        return '"nan"'
    if math.isinf(v):
        return '"inf"' if v > 0 else '"-inf"'
    return format(v, ".17g")


def _write(obj, indent: int, level: int, out: list) -> None:
    pad = "\n" + " " * (indent * (level + 1))
    end = "\n" + " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            out.append(("," if i else "") + pad + json.dumps(key) + ": ")
            _write(obj[key], indent, level + 1, out)
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        out.append("[")
        for i, v in enumerate(obj):
            out.append(("," if i else "") + pad)
            _write(v, indent, level + 1, out)
        out.append(end + "]")
    elif isinstance(obj, bool) or obj is None:
        out.append(json.dumps(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    else:
        out.append(json.dumps(obj, ensure_ascii=False))


def dumps(obj, indent: int = 2) -> str:
    """Canonical JSON text for ``obj`` (anything :func:`plain` accepts)."""
    out: list = []
    _write(plain(obj), indent, 0, out)
    return "".join(out) + "\n"


def digest(data: bytes | None) -> str | None:
    return None if data is None else "sha256:" + hashlib.sha256(data).hexdigest()


@dataclass
class RunReport:
    command: list
    mode: str  # "exact" or "float"
    result: dict
    input_digest: str | None = None
    version: str = __version__
    status: str = "ok"

    def to_json(self) -> dict:
        return {
            "command": list(self.command),
            "input_digest": self.input_digest,
            "mode": self.mode,
            "result": self.result,
            "status": self.status,
            "version": self.version,
        }

    def dumps(self) -> str:
        return dumps(self)
