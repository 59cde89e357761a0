"""CSV and JSON serialization of check reports."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable

import numpy as np

from .checks import CheckReport

FIXED_COLUMNS = ("lhs", "rhs", "ratio")


def format_value(v) -> str:
    """17 significant digits for floats (round-trip exact); ``inf``/``nan``
    spelled out; everything else via ``str``."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.17g}"
    return "" if v is None else str(v)


def _ordered_keys(dicts: Iterable[dict]) -> list:
    keys = []
    for d in dicts:
        for k in d:
            if k not in keys:
                keys.append(k)
    return keys


def columns(report: CheckReport) -> list:
    """``check_id``, sweep parameters, ``lhs, rhs, ratio``, then extras."""
    params = _ordered_keys(r["params"] for r in report.rows)
    extra = _ordered_keys(r["extra"] for r in report.rows)
    return ["check_id"] + params + list(FIXED_COLUMNS) + extra


def to_csv(report: CheckReport) -> str:
    cols = columns(report)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for r in report.rows:
        flat = {"check_id": report.check_id, **r["params"], "lhs": r["lhs"], "rhs": r["rhs"],
                "ratio": r["ratio"], **r["extra"]}
        writer.writerow([format_value(flat.get(c)) for c in cols])
    return buf.getvalue()


def jsonable(obj):
    """Recursively convert numpy scalars and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def dump_json(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n"
