"""CSV and JSON artifact writers used by the runner."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .analysis import report_json

__all__ = ["write_json", "write_rows", "write_field", "write_fields"]


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_json(path, doc) -> Path:
    """Deterministic JSON (sorted keys, trailing newline)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report_json(doc) + "\n")
    return path


def write_rows(path, rows, columns=None) -> Path:
    """Write a list of dicts; ``columns`` fixes the order (default: keys of the first row)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = list(rows)
    if columns is None:
        columns = list(rows[0]) if rows else []
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])
    return path


def write_field(path, grid, u, name="value") -> Path:
    """Two-column CSV (node, value) of a grid field."""
    u = np.asarray(u, dtype=float)
    rows = [{"node": x, name: v} for x, v in zip(grid.nodes.tolist(), u.tolist())]
    return write_rows(path, rows, ["node", name])


def write_fields(path, grid, fields, labels) -> Path:
    """One CSV with a node column and one column per field."""
    cols = ["node"] + [str(l) for l in labels]
    data = np.column_stack([grid.nodes] + [np.asarray(f, float) for f in fields])
    rows = [dict(zip(cols, r)) for r in data.tolist()]
    return write_rows(path, rows, cols)
