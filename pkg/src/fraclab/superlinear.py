"""Ground states for 1 < q < 2*_s - 1 and the critical radial quotient S(R).

Both problems minimize a quotient

    Q(v) = v.Kv / (∑ m_i w_i |v_i|^p)^{2/p}

for a cell-averaged singular weight ``w``; the minimizer of the normalized
problem solves K v = mu M w v^{p-1} with mu = v.Kv, and the rescaling
u = mu^{1/(p-2)} v turns it into K u = M w u^{p-1}.

The minimization is a projected gradient flow preconditioned by K^{-1}, with
Barzilai-Borwein steps and backtracking, followed by Newton on the rescaled
Euler-Lagrange system.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .constants import critical_exponent
from .errors import ConvergenceError, DomainError
from .grids import distance_weight
from .linear import hardy_constant
from .operators import DiscreteOperator, seminorm_sq

__all__ = [
    "GroundState",
    "CriticalReport",
    "SweepReport",
    "minimize_quotient",
    "ground_state",
    "apriori_sweep",
    "critical_SR",
    "scaling_check",
]


@dataclass(frozen=True, eq=False)
class GroundState:
    field: np.ndarray
    energy: float
    mp_level: float
    el_residual: float
    reg_index: int
    q: float
    iterations: int = 0


@dataclass(frozen=True, eq=False)
class CriticalReport:
    R: float
    n: int
    S_R: float
    minimizer: np.ndarray  # normalized: ∑ m w |phi|^p = 1
    normalization: float
    el_residual: float
    concentration_fraction: float
    radial_bound_const: float
    iterations: int = 0

    def as_dict(self):
        return {"R": self.R, "n": self.n, "S_R": self.S_R, "el_residual": self.el_residual,
                "normalization": self.normalization,
                "concentration_fraction": self.concentration_fraction,
                "radial_bound_const": self.radial_bound_const}


@dataclass(frozen=True, eq=False)
class SweepReport:
    reg_indices: list
    sup_norms: list
    sup_inf: float
    argmax_distance: list
    h: float
    hardy: float
    el_residuals: list
    states: list

    def as_dict(self):
        return {"reg_indices": self.reg_indices, "sup_norms": self.sup_norms,
                "sup_inf": self.sup_inf, "argmax_distance": self.argmax_distance,
                "h": self.h, "hardy": self.hardy, "el_residuals": self.el_residuals}


def _constraint(op, w, v, p):
    return float((op.mass * w * np.abs(v) ** p).sum())


def _normalize(op, w, v, p):
    v = np.abs(v)
    return v / _constraint(op, w, v, p) ** (1.0 / p)


def _el_residual(op, w, u, p):
    """Relative residual of K u = M w u^{p-1}."""
    load = op.mass * w * np.abs(u) ** (p - 1)
    return float(np.abs(op.stiffness_apply(u) - load).max() / np.abs(load).max())


def _newton(op, w, u, p, tol, max_iter=30):
    """Newton for K u = M w u^{p-1}; returns (u, relative residual)."""
    r = op.sqrt_mass
    K = op.A * r[:, None] * r[None, :]
    res = _el_residual(op, w, u, p)
    for _ in range(max_iter):
        if res <= tol:
            break
        F = op.stiffness_apply(u) - op.mass * w * u ** (p - 1)
        J = K.copy()
        J[np.diag_indices(op.n)] -= (p - 1) * op.mass * w * u ** (p - 2)
        du = sla.solve(J, F, assume_a="sym", check_finite=False)
        t = 1.0
        while t > 1e-4:
            trial = np.abs(u - t * du)
            rt = _el_residual(op, w, trial, p)
            if rt < res:
                break
            t *= 0.5
        else:
            break
        u, res = trial, rt
    return u, res


def minimize_quotient(op: DiscreteOperator, w, p, v0, gtol=1e-7, max_iter=20000):
    """Minimize v.Kv subject to ∑ m w |v|^p = 1; returns (v, mu, iterations)."""
    r = op.sqrt_mass

    def kinv(x):
        return op.solve_sym(x / r) / r

    v = _normalize(op, w, v0, p)
    E = float(v @ op.stiffness_apply(v))
    g = E * kinv(op.mass * w * v ** (p - 1)) - v  # preconditioned descent direction
    alpha = 1.0
    v_old = g_old = None
    for it in range(1, max_iter + 1):
        if v_old is not None:
            sv, yv = v - v_old, g_old - g
            den = float(sv @ op.stiffness_apply(yv))
            if den > 0:
                alpha = float(sv @ op.stiffness_apply(sv)) / den
            alpha = min(max(alpha, 1e-3), 10.0)
        while True:
            trial = _normalize(op, w, v + alpha * g, p)
            Et = float(trial @ op.stiffness_apply(trial))
            if Et <= E or alpha < 1e-8:
                break
            alpha *= 0.5
        v_old, g_old = v, g
        v, E = trial, Et
        g = E * kinv(op.mass * w * v ** (p - 1)) - v
        if np.abs(g).max() <= gtol * np.abs(v).max():
            break
    else:
        raise ConvergenceError(f"quotient minimization did not converge in {max_iter} steps",
                               {"gradient": float(np.abs(g).max()), "value": E})
    return v, E, it


def _initial(op):
    x = op.grid.nodes
    R = op.domain.R
    return (R * R - x * x) ** op.params.s


def ground_state(op: DiscreteOperator, q: float, n_reg, v0=None,
                 tol: float = 1e-10) -> GroundState:
    """Positive solution of A u = u^q / (d + 1/n)^{2s} at the ground-state level."""
    s = op.params.s
    if op.params.sobolev_ok:
        top = critical_exponent(op.params.N, s) - 1.0
    else:
        top = np.inf
    if not (1.0 < q < top):
        raise DomainError(f"1 < q < 2*_s - 1 = {top} required, got q={q}")
    if s < 0.5:
        warnings.warn(f"s = {s} < 1/2 lies outside the proven existence regime", stacklevel=2)
    w = distance_weight(op.grid, 2.0 * s, shift=1.0 / n_reg)
    if not np.all(np.isfinite(w)):
        raise ConvergenceError("constraint weight is not finite on this grid")
    p = q + 1.0
    v, mu, it = minimize_quotient(op, w, p, _initial(op) if v0 is None else v0)
    u = mu ** (1.0 / (q - 1.0)) * v
    u, res = _newton(op, w, u, p, tol)
    sem = seminorm_sq(op, u)
    energy = 0.5 * sem - float((op.mass * w * u ** p).sum()) / p
    return GroundState(field=u, energy=energy, mp_level=(q - 1) / (2 * (q + 1)) * sem,
                       el_residual=res, reg_index=int(n_reg), q=q, iterations=it)


def apriori_sweep(op: DiscreteOperator, q: float, schedule=(1, 10, 100, 1000)) -> SweepReport:
    """Ground states along a regularization schedule with the sup-norm diagnostics."""
    hardy = hardy_constant(op).constant
    states = []
    v0 = None
    for n in schedule:
        gs = ground_state(op, q, n, v0=v0)
        states.append(gs)
        v0 = gs.field
    sups = [float(g.field.max()) for g in states]
    dist = [float(op.grid.distance[np.argmax(g.field)]) for g in states]
    return SweepReport(reg_indices=list(schedule), sup_norms=sups, sup_inf=min(sups),
                       argmax_distance=dist, h=op.grid.h, hardy=hardy,
                       el_residuals=[g.el_residual for g in states], states=states)


def critical_SR(op: DiscreteOperator, R=None, tol: float = 1e-10) -> CriticalReport:
    """S(R) = min of the seminorm over ∫ |phi|^{2*}/(R - r)^{2s} = 1, radial."""
    if op.domain.kind != "radial":
        raise DomainError("critical_SR needs a radial operator")
    if R is not None and abs(R - op.domain.R) > 1e-14 * max(1.0, R):
        raise DomainError(f"operator radius {op.domain.R} does not match R={R}")
    op.params.require_sobolev()
    N, s = op.params.N, op.params.s
    p = critical_exponent(N, s)
    w = distance_weight(op.grid, 2.0 * s)
    if not np.all(np.isfinite(w)):
        raise ConvergenceError("normalization weight is not finite on this grid")
    v, S, it = minimize_quotient(op, w, p, _initial(op))
    u, _ = _newton(op, w, S ** (1.0 / (p - 2.0)) * v, p, tol)
    phi = _normalize(op, w, u, p)
    S = seminorm_sq(op, phi)
    # stationarity of the normalized minimizer: K phi = S M w phi^{p-1}
    load = S * op.mass * w * phi ** (p - 1)
    el = float(np.abs(op.stiffness_apply(phi) - load).max() / np.abs(load).max())
    dens = op.mass * w * phi ** p
    inner = max(1, int(np.ceil(0.05 * op.n)))
    r = op.grid.nodes
    bound = float((r ** ((N - 2 * s) / 2) * phi).max() / np.sqrt(S))
    return CriticalReport(R=op.domain.R, n=op.n, S_R=S, minimizer=phi,
                          normalization=float(dens.sum()), el_residual=el,
                          concentration_fraction=float(dens[:inner].sum() / dens.sum()),
                          radial_bound_const=bound, iterations=it)


def scaling_check(rep1: CriticalReport, rep2: CriticalReport, s: float, N: int) -> float:
    """Relative error of S(R2)/S(R1) against (R2/R1)^{4s/2*_s}."""
    target = (rep2.R / rep1.R) ** (4.0 * s / critical_exponent(N, s))
    return abs(rep2.S_R / rep1.S_R - target) / target
