"""Singular problem A u = f_n / ((u + 1/n)^sigma (d + 1/n)^alpha), f_n = min(n, f)."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize_scalar

from .errors import ConvergenceError, DomainError
from .grids import distance_weight, load_average
from .linear import solve_linear
from .operators import DiscreteOperator, apply, seminorm_sq
from .sublinear import interior_min

__all__ = [
    "SingularRun",
    "FSpec",
    "singular_solve",
    "power_seminorm_diag",
    "weighted_power_diag",
    "kato_gap",
    "power_gap_ratio",
    "power_gap_constant",
    "power_gap_check",
]


@dataclass(frozen=True)
class FSpec:
    """Datum f: kind 'constant' (value), 'power' (value * d^gamma) or 'table' (node data)."""

    kind: str = "constant"
    value: float = 1.0
    gamma: float = 0.0
    table: tuple = ()

    def cell_average(self, op):
        if self.kind == "constant":
            if self.value < 0:
                raise DomainError("f >= 0 required")
            return np.full(op.n, float(self.value))
        if self.kind == "power":
            if self.value < 0:
                raise DomainError("f >= 0 required")
            if self.gamma == 0:
                return np.full(op.n, float(self.value))
            return self.value * load_average(op.grid, -self.gamma, s=op.params.s)
        if self.kind == "table":
            f = np.asarray(self.table, dtype=float)
            if f.shape != (op.n,):
                raise ValueError(f"tabulated datum has {f.size} values, grid has {op.n} nodes")
            if np.any(f < 0):
                raise DomainError("f >= 0 required")
            return f
        raise ValueError(f"unknown datum kind {self.kind!r}")

    def describe(self):
        if self.kind == "table":
            return {"kind": "table", "size": len(self.table)}
        return {"kind": self.kind, "value": self.value, "gamma": self.gamma}


@dataclass(eq=False)
class SingularRun:
    sigma: float
    alpha: float
    f_spec: FSpec
    op: DiscreteOperator = field(repr=False)
    reg_indices: list = field(default_factory=list)
    fields: list = field(default_factory=list)
    interior_min: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    newton_iters: list = field(default_factory=list)
    fallback: list = field(default_factory=list)

    def as_rows(self):
        return [{"n": n, "interior_min": m, "residual": r, "newton_iters": it}
                for n, m, r, it in zip(self.reg_indices, self.interior_min,
                                       self.residuals, self.newton_iters)]


def _load(F, u, n, sigma):
    return F / (u + 1.0 / n) ** sigma


def _residual(op, F, u, n, sigma):
    load = _load(F, u, n, sigma)
    return float(np.abs(apply(op, u) - load).max() / np.abs(load).max())


def _newton(op, F, u, n, sigma, tol, max_iter):
    r = op.sqrt_mass
    res = _residual(op, F, u, n, sigma)
    it = 0
    while res > tol and it < max_iter:
        it += 1
        G = apply(op, u) - _load(F, u, n, sigma)
        # symmetric Jacobian in the variable sqrt(m) u: A + diag(sigma F (u+1/n)^{-sigma-1})
        J = op.A.copy()
        J[np.diag_indices(op.n)] += sigma * F / (u + 1.0 / n) ** (sigma + 1)
        du = sla.solve(J, r * G, assume_a="pos", check_finite=False) / r
        t = 1.0
        while t >= 1e-6:
            trial = u - t * du
            if np.all(trial > -1.0 / n):
                rt = _residual(op, F, trial, n, sigma)
                if rt < res:
                    break
            t *= 0.5
        else:
            return u, res, it, False
        u, res = trial, rt
    return u, res, it, res <= tol


def _picard(op, F, u, n, sigma, tol, max_iter=2000):
    """Relaxed lagged iteration, the fallback when Newton stagnates."""
    res = _residual(op, F, u, n, sigma)
    for _ in range(max_iter):
        if res <= tol:
            break
        u = 0.5 * u + 0.5 * solve_linear(op, _load(F, u, n, sigma))
        res = _residual(op, F, u, n, sigma)
    return u, res


def singular_solve(op: DiscreteOperator, sigma: float, alpha: float, f_spec=None,
                   schedule=(1, 10, 100), seed=None, tol: float = 1e-10,
                   max_newton: int = 100) -> SingularRun:
    """Solve the regularized problems for every n in ``schedule``.

    The first problem starts from ``seed`` (default: the linear solve with the
    denominator frozen at u = 0); later ones start from the previous solution.
    """
    if not sigma > 0:
        raise DomainError(f"sigma > 0 required, got sigma={sigma}")
    if not alpha >= 0:
        raise DomainError(f"alpha >= 0 required, got alpha={alpha}")
    f_spec = FSpec() if f_spec is None else f_spec
    sched = [int(n) for n in schedule]
    if any(b <= a for a, b in zip(sched, sched[1:])) or sched[0] < 1:
        raise ValueError(f"schedule must be increasing positive integers, got {sched}")
    fbar = f_spec.cell_average(op)
    run = SingularRun(sigma=sigma, alpha=alpha, f_spec=f_spec, op=op)
    u = None
    for n in sched:
        F = np.minimum(n, fbar)
        if alpha > 0:
            F = F * load_average(op.grid, alpha, shift=1.0 / n, s=op.params.s)
        if u is None:
            u = solve_linear(op, F * n ** sigma) if seed is None else np.asarray(seed, float)
        u, res, it, ok = _newton(op, F, u, n, sigma, tol, max_newton)
        used_fallback = False
        if not ok:
            used_fallback = True
            u, res = _picard(op, F, np.maximum(u, 0.0), n, sigma, tol)
            if res > tol:
                raise ConvergenceError(f"singular solve failed at n={n}",
                                       {"residual": res, "n": n})
        run.reg_indices.append(n)
        run.fields.append(u.copy())
        run.interior_min.append(interior_min(u, op.grid))
        run.residuals.append(res)
        run.newton_iters.append(it)
        run.fallback.append(used_fallback)
    return run


def power_seminorm_diag(run: SingularRun) -> list:
    """seminorm_sq(u_n^{(sigma+1)/2}) for every n of the run."""
    e = 0.5 * (run.sigma + 1.0)
    return [seminorm_sq(run.op, np.abs(u) ** e) for u in run.fields]


def weighted_power_diag(run: SingularRun, beta: float) -> list:
    """∫ u_n^{sigma+1} / d^beta for every n of the run."""
    s = run.op.params.s
    if not (0.0 < beta < 2 * s):
        raise DomainError(f"beta in (0, 2s) = (0, {2 * s}) required, got beta={beta}")
    w = distance_weight(run.op.grid, beta) * run.op.mass
    return [float((w * np.abs(u) ** (run.sigma + 1)).sum()) for u in run.fields]


def kato_gap(op: DiscreteOperator, u, sigma: float) -> float:
    """max of A(u^{sigma+1}) - (sigma+1) u^sigma A u, scaled by max |(sigma+1) u^sigma A u|.

    Nonpositive (up to roundoff) for u >= 0 by convexity and the sign
    structure of the discrete operator.
    """
    u = np.asarray(u, dtype=float)
    lhs = apply(op, u ** (sigma + 1))
    rhs = (sigma + 1) * u ** sigma * apply(op, u)
    return float((lhs - rhs).max() / np.abs(rhs).max())


def power_gap_ratio(a, b, sigma):
    """(a-b)(a^sigma-b^sigma) / |a^{(sigma+1)/2} - b^{(sigma+1)/2}|^2 (a != b)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    e = 0.5 * (sigma + 1)
    return (a - b) * (a ** sigma - b ** sigma) / (a ** e - b ** e) ** 2


def power_gap_constant(sigma: float) -> float:
    """Best c3 by minimizing the ratio over t = b/a in (0, 1) (it is homogeneous)."""
    g = lambda t: float(power_gap_ratio(1.0, t, sigma))
    res = minimize_scalar(g, bounds=(1e-9, 1 - 1e-6), method="bounded",
                          options={"xatol": 1e-12})
    # the infimum can sit at the endpoint t -> 1, where the ratio tends to 4 sigma/(sigma+1)^2
    return min(res.fun, g(1e-9), g(1 - 1e-6), 4 * sigma / (sigma + 1) ** 2)


def power_gap_check(sigma: float, pairs) -> dict:
    """Check the inequality with the minimized c3 on an array of (a, b) pairs."""
    pairs = np.asarray(pairs, dtype=float)
    a, b = pairs[:, 0], pairs[:, 1]
    keep = a != b
    c3 = power_gap_constant(sigma)
    lhs = (a - b) * (a ** sigma - b ** sigma)
    rhs = c3 * (a ** (0.5 * (sigma + 1)) - b ** (0.5 * (sigma + 1))) ** 2
    ok = lhs[keep] >= rhs[keep] * (1 - 1e-12)
    return {"sigma": sigma, "c3": c3, "pairs": int(keep.sum()), "passed": bool(ok.all()),
            "min_ratio": float(power_gap_ratio(a[keep], b[keep], sigma).min())}
