"""CSV and JSON ledger reports.

CSV columns are fixed (see ``COLUMNS``); reals are written with 9 significant
digits; magnitudes below 1e-12 and ``-0`` are written as ``0`` so equal runs give identical bytes.
The runtime column is left empty unless timing was requested.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Sequence

import numpy as np

from .scenarios import COLUMNS, ReportRow


# roundoff below this is printed as 0
ZERO_SNAP = 1e-12


def fmt_real(v) -> str:
    if v is None:
        return ""
    v = float(v)
    if abs(v) < ZERO_SNAP:
        v = 0.0
    s = f"{v:.9g}"
    return "0" if s == "-0" else s


def _cell(row: ReportRow, col: str) -> str:
    v = getattr(row, col)
    if col == "saturated":
        return "true" if v else "false"
    if isinstance(v, float) or (v is None and col == "runtime"):
        return fmt_real(v)
    return str(v)


def to_csv(rows: Sequence[ReportRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_cell(r, c) for c in COLUMNS])
    return buf.getvalue()


def _json_real(v):
    if v is None:
        return None
    v = float(v)
    return 0.0 if abs(v) < ZERO_SNAP else v


def row_dict(r: ReportRow, transcripts: bool = False) -> dict:
    d = {}
    for c in COLUMNS:
        v = getattr(r, c)
        d[c] = _json_real(v) if isinstance(v, float) or c == "runtime" else v
    if transcripts and r.transcripts is not None:
        d["transcripts"] = r.transcripts
    return d


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"{type(o).__name__} is not JSON serializable")


def to_json(rows: Sequence[ReportRow], transcripts: bool = False) -> str:
    body = {"columns": list(COLUMNS), "rows": [row_dict(r, transcripts) for r in rows]}
    return json.dumps(body, indent=2, default=_default) + "\n"


def render(rows: Sequence[ReportRow], fmt: str = "csv", transcripts: bool = False) -> str:
    if fmt == "csv":
        return to_csv(rows)
    if fmt == "json":
        return to_json(rows, transcripts)
    raise ValueError(f"unknown report format {fmt!r}")
