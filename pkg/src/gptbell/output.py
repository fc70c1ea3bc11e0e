"""Rendering of result documents as text, canonical JSON or CSV."""
from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

SIG_DIGITS = 12


def _canon(obj):
    if isinstance(obj, dict):
        return {str(k): _canon(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canon(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _canon(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        x = float(f"{x:.{SIG_DIGITS}g}")
        return 0.0 if x == 0 else x
    return obj


def to_json(doc: dict) -> str:
    """Canonical JSON: sorted keys, floats at 12 significant digits.

    Parsing the output and calling this again gives identical text.
    """
    return json.dumps(_canon(doc), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def fmt(x, digits: int = 6) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "yes" if x else "no"
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            return "n/a"
        return f"{x:.{digits}f}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "(" + ", ".join(fmt(v, digits) for v in x) + ")"
    if x is None:
        return "-"
    return str(x)


def to_csv(rows: list, columns: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow(["" if r.get(c) is None else _csv_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def _csv_cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(_canon(v)) if math.isfinite(v) else ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return v


def to_text(doc: dict) -> str:
    """Key/value summary followed by an aligned table when the document has one."""
    lines = [f"# {doc.get('command', '')} {doc.get('space', '')}".rstrip()]
    for key, val in doc.get("summary", []):
        lines.append(f"{key:<28} {fmt(val)}")
    for note in doc.get("notes", []):
        lines.append(note)
    table = doc.get("table")
    if table:
        cols = doc["columns"]
        cells = [[fmt(r.get(c)) for c in cols] for r in table]
        widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
        lines.append("")
        lines.append("  ".join(c.rjust(w) for c, w in zip(cols, widths)))
        for row in cells:
            lines.append("  ".join(v.rjust(w) for v, w in zip(row, widths)))
    return "\n".join(lines) + "\n"
