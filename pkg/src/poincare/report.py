"""Deterministic JSON output with 17 significant digits for every float."""

from __future__ import annotations

import datetime as _dt
import json
import math

import numpy as np

from . import __version__

# excluded when two reports are compared for reproducibility
VOLATILE_KEYS = ("timestamp",)


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1)) if indent else ""
    end = " " * (indent * level) if indent else ""
    sep = ",\n" if indent else ","
    nl = "\n" if indent else ""
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            return json.dumps(repr(x))
        return format(x, ".17g")
    if isinstance(obj, (complex, np.complexfloating)):
        return _encode([obj.real, obj.imag], indent, level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}:{' ' if indent else ''}{_encode(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{" + nl + sep.join(items) + nl + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in seq]
        return "[" + nl + sep.join(items) + nl + end + "]"
    if hasattr(obj, "to_dict"):
        return _encode(obj.to_dict(), indent, level)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int | None = 2) -> str:
    """JSON text in which every float is written with ``%.17g``."""
    return _encode(obj, indent, 0)


def envelope(command: str, config: dict, result: dict, *, status: str) -> dict:
    """Report body: results at top level, then status, echoed configuration,
    library version and a timestamp."""
    out = dict(result)
    out.update({
        "command": command,
        "status": status,
        "version": __version__,
        "config": config,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    })
    return out


def strip_volatile(report: dict) -> dict:
    return {k: v for k, v in report.items() if k not in VOLATILE_KEYS}
