"""Deterministic CSV/JSON serialization of reports and sweeps.

Floats are written with ``repr`` (shortest round-trip form, 17 significant
digits at most) and no wall-clock data, so equal inputs give byte-identical
files.
"""

from __future__ import annotations

import io
import json
import math
import sys
from dataclasses import asdict, is_dataclass
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np

from ..engine import TpaReport
from ..errors import OutputError
from .runner import SweepResult

CSV_HEADER = "x_value,x_unit,rate_per_s,enhancement_factor,separation_s_m"


def _jsonable(obj):
    if is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if callable(obj):
        return getattr(obj, "__name__", repr(obj))
    return obj


def to_json(payload: Any) -> str:
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _num(value) -> str:
    return "" if value is None else repr(float(value))


def _comment_block(parameters: dict, config_hash: str) -> list[str]:
    lines = [f"# config_hash: {config_hash}", "# parameters:"]
    lines += [f"#   {key} = {parameters[key]!r}" for key in sorted(parameters)]
    return lines


def csv_rows(rows, parameters: dict, config_hash: str) -> str:
    """Rows are (x_value, x_unit, rate, enhancement, separation) tuples."""
    if not rows:
        raise ValueError("refusing to emit an empty result")
    buf = io.StringIO()
    for line in _comment_block(parameters, config_hash):
        buf.write(line + "\n")
    buf.write(CSV_HEADER + "\n")
    for x, unit, rate, enh, sep in rows:
        x_text = x if isinstance(x, str) else _num(x)
        buf.write(f"{x_text},{unit},{_num(rate)},{_num(enh)},{_num(sep)}\n")
    return buf.getvalue()


def render(result, fmt: str) -> str:
    """Text form of a :class:`TpaReport`, :class:`SweepResult` or plain dict payload."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"format must be csv or json, got {fmt!r}")
    if isinstance(result, SweepResult):
        if not result.rows:
            raise ValueError("refusing to emit an empty sweep")
        if fmt == "json":
            return to_json(result)
        rows = [(r.x_value, result.unit, r.rate_per_s, r.enhancement_factor, r.separation_s_m)
                for r in result.rows]
        return csv_rows(rows, result.parameters, result.config_hash)
    if isinstance(result, TpaReport):
        params = result.inputs_echo.get("parameters", {})
        chash = result.inputs_echo.get("config_hash", "")
        if fmt == "json":
            payload = result.to_dict()
            payload["parameters"] = params
            payload["config_hash"] = chash
            return to_json(payload)
        return csv_rows([("", "", result.rate_R2, result.enhancement_factor, result.separation_s)],
                        params, chash)
    if isinstance(result, dict) and "csv_rows" in result:
        if fmt == "json":
            return to_json({k: v for k, v in result.items() if k != "csv_rows"})
        return csv_rows(result["csv_rows"], result.get("parameters", {}),
                        result.get("config_hash", ""))
    if isinstance(result, dict) and "table_header" in result:
        if fmt == "json":
            return to_json({k: v for k, v in result.items() if k not in ("table_header", "table_rows")})
        buf = io.StringIO()
        for line in _comment_block(result.get("parameters", {}), result.get("config_hash", "")):
            buf.write(line + "\n")
        buf.write(result["table_header"] + "\n")
        for row in result["table_rows"]:
            buf.write(",".join(v if isinstance(v, str) else _num(v) for v in row) + "\n")
        return buf.getvalue()
    if fmt == "json":
        return to_json(result)
    raise ValueError("this result only has a JSON form")


def emit(result, fmt: str, path=None) -> str:
    """Write ``result`` to ``path`` (stdout when empty or None); returns the text."""
    text = render(result, fmt)
    if not path or str(path) == "-":
        sys.stdout.write(text)
        return text
    target = Path(path)
    try:
        target.write_text(text)
    except OSError as exc:
        raise OutputError(f"cannot write {target}: {exc.strerror or exc}") from exc
    return text
