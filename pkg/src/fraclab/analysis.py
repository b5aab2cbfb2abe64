"""Boundary exponent fits, Richardson extrapolation and JSON reports."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "ExponentFit",
    "Richardson",
    "fit_boundary_exponent",
    "fit_window",
    "richardson",
    "make_report",
    "report_json",
    "REPORT_SCHEMA",
    "LAYER_CELLS",
    "WINDOW_FRACTION",
]

REPORT_SCHEMA = "fraclab-report/1"
LAYER_CELLS = 5
WINDOW_FRACTION = 0.2


@dataclass(frozen=True)
class ExponentFit:
    exponent: float
    log_correction: bool
    r2: float
    window: tuple
    intercept: float = 0.0
    samples: int = 0

    def as_dict(self):
        return {"exponent": self.exponent, "log_correction": self.log_correction,
                "r2": self.r2, "window": list(self.window), "intercept": self.intercept,
                "samples": self.samples}


class Richardson(NamedTuple):
    value: float
    order: float
    degenerate: bool


def fit_window(grid):
    """Boolean mask of nodes with (LAYER_CELLS + 1) h <= d <= WINDOW_FRACTION R."""
    d = grid.distance
    lo = (LAYER_CELLS + 1) * grid.h * (1 - 1e-9)
    hi = WINDOW_FRACTION * grid.domain.R
    return (d >= lo) & (d <= hi)


def fit_boundary_exponent(u, grid, model: str = "power") -> ExponentFit:
    """Least-squares fit of log u against log d on the boundary window.

    ``model='power'`` fits u ~ c d^gamma; ``model='powerlog'`` fits
    u ~ c d^gamma log(D/d) with D = 2 diam fixed.  r2 is measured against the
    variance of log u in both cases so the two are comparable.
    """
    if model not in ("power", "powerlog"):
        raise ValueError(f"model must be 'power' or 'powerlog', got {model!r}")
    u = np.asarray(u, dtype=float)
    mask = fit_window(grid)
    d = grid.distance[mask]
    y = u[mask]
    if d.size < 3:
        raise ValueError("fewer than 3 nodes in the fit window; refine the grid")
    if np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise ValueError("field must be positive and finite on the fit window")
    ly = np.log(y)
    lx = np.log(d)
    target = ly
    if model == "powerlog":
        D = 2.0 * grid.domain.diameter
        target = ly - np.log(np.log(D / d))
    X = np.stack([np.ones_like(lx), lx], axis=1)
    coef, *_ = np.linalg.lstsq(X, target, rcond=None)
    resid = target - X @ coef
    sst = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / sst if sst > 0 else 1.0
    return ExponentFit(exponent=float(coef[1]), log_correction=(model == "powerlog"),
                       r2=min(1.0, max(0.0, r2)), window=(float(d.min()), float(d.max())),
                       intercept=float(coef[0]), samples=int(d.size))


def richardson(v1: float, v2: float, v3: float) -> Richardson:
    """Extrapolate from values at h, h/2, h/4."""
    d1, d2 = v1 - v2, v2 - v3
    if d1 == 0 or d2 == 0 or d1 * d2 < 0:
        return Richardson(float(v3), float("nan"), True)
    p = math.log2(d1 / d2)
    if not np.isfinite(p) or p <= 0:
        return Richardson(float(v3), float(p), True)
    return Richardson(float(v3 + (v3 - v2) / (2 ** p - 1)), float(p), False)


def make_report(results=()) -> dict:
    """Aggregate check records into one document.

    Each record is a mapping with at least ``id`` and ``passed``; records are
    sorted by id so the document is independent of execution order.
    """
    checks = []
    for rec in results:
        rec = dict(rec)
        if "id" not in rec or "passed" not in rec:
            raise ValueError("every check needs 'id' and 'passed'")
        rec["passed"] = bool(rec["passed"])
        checks.append(rec)
    checks.sort(key=lambda r: (str(r["id"]).zfill(8), r.get("name", "")))
    return {
        "schema": REPORT_SCHEMA,
        "checks": len(checks),
        "passed": sum(r["passed"] for r in checks),
        "results": checks,
    }


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def report_json(doc) -> str:
    """Deterministic JSON text (sorted keys, non-finite floats as strings)."""
    return json.dumps(_clean(doc), sort_keys=True, indent=2)
