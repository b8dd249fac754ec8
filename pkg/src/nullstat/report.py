"""Byte-reproducible JSON and CSV report emission (17 significant digits)."""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from . import __version__

__all__ = ["to_plain", "dumps_json", "dumps_csv", "format_float", "build_report",
           "REPORT_SCHEMA_ID"]

REPORT_SCHEMA_ID = "nullstat/report/1"


def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == 0.0:
        return "0"  # no signed zeros in reports
    return "%.17g" % x


def to_plain(obj):
    """Convert numpy containers and scalars to plain Python values."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_dict"):
        return to_plain(obj.to_dict())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(obj, out, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, k in enumerate(sorted(obj)):
            out.append(f"{pad}{json.dumps(k)}: ")
            _emit(obj[k], out, indent, level + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        if all(not isinstance(v, (dict, list)) for v in obj):
            out.append("[" + ", ".join(_scalar(v) for v in obj) + "]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad)
            _emit(v, out, indent, level + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "]")
    else:
        out.append(_scalar(obj))


def _scalar(v):
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return json.dumps(v)
    if isinstance(v, float):
        return format_float(v)
    raise TypeError(type(v))


def dumps_json(obj, indent=2) -> str:
    out = []
    _emit(to_plain(obj), out, indent, 0)
    return "".join(out) + "\n"


def _csv_cell(v):
    if isinstance(v, float):
        return format_float(v).strip('"')
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (list, tuple)):
        return ";".join(_csv_cell(x) for x in v)
    return str(v)


def dumps_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_csv_cell(to_plain(v)) for v in r])
    return buf.getvalue()


def build_report(command, manifest, payload, status, error=None):
    rep = {
        "schema": REPORT_SCHEMA_ID,
        "engine": {"name": "nullstat", "version": __version__},
        "command": command,
        "manifest_digest": manifest.digest if manifest is not None else None,
        "fixture": manifest.fixture if manifest is not None else None,
        "run": manifest.run if manifest is not None else None,
        "status": status,
        "payload": payload,
    }
    if error is not None:
        rep["error"] = error
    return rep
