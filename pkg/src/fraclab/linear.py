"""Linear solves and eigenproblems on a :class:`DiscreteOperator`."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import ConvergenceError, DomainError
from .grids import cell_integral, load_average
from .operators import DiscreteOperator, apply, assemble, hardy_weight, seminorm_sq

__all__ = [
    "EigenPair",
    "HardyEstimate",
    "solve_linear",
    "torsion",
    "auxiliary",
    "principal_eigenpair",
    "hardy_constant",
    "weak_residual",
    "test_battery",
    "BATTERY_VERSION",
]

BATTERY_VERSION = 1


@dataclass(frozen=True, eq=False)
class EigenPair:
    lambda1: float
    phi1: np.ndarray  # positive, max = 1
    iterations: int = 0
    residual: float = 0.0


@dataclass(frozen=True, eq=False)
class HardyEstimate:
    constant: float
    minimizer: np.ndarray
    refinement_trace: list = field(default_factory=list)  # [(n, constant), ...]
    weight: str = "boundary"
    regime_warning: bool = False


def _converged(op, res, rhs, u):
    scale = np.abs(rhs).max()
    if res <= 1e-10 * scale:
        return True
    if op.is_sparse:
        # the local operator has condition ~n^2: accept a normwise backward error
        anorm = abs(op.A).sum(1).max()
        return res <= 1e-14 * (anorm * np.abs(u).max() + scale)
    return False


def solve_linear(op: DiscreteOperator, rhs) -> np.ndarray:
    """Solve A u = rhs, with up to three steps of iterative refinement.

    Accepted when ||A u - rhs||_inf <= 1e-10 ||rhs||_inf (dense fractional
    operators) or when the normwise backward error is below 1e-14 (sparse
    local operator).
    """
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (op.n,):
        raise ValueError(f"rhs has shape {rhs.shape}, operator expects ({op.n},)")
    scale = np.abs(rhs).max()
    if scale == 0.0:
        return np.zeros(op.n)
    r = op.sqrt_mass
    u = op.solve_sym(r * rhs) / r
    for _ in range(4):
        res = rhs - apply(op, u)
        if _converged(op, np.abs(res).max(), rhs, u):
            return u
        u = u + op.solve_sym(r * res) / r
    res = float(np.abs(rhs - apply(op, u)).max())
    if _converged(op, res, rhs, u):
        return u
    cond = _condition_estimate(op)
    raise ConvergenceError(
        f"linear solve residual {res / scale:.2e} (relative) above 1e-10; "
        f"condition estimate {cond:.2e}",
        {"residual": res / scale, "condition": cond},
    )


def _condition_estimate(op):
    if op.is_sparse:
        return float("nan")
    kind, fac = op.factor()
    anorm = np.abs(op.A).sum(0).max()
    rcond = sla.lapack.dpocon(fac[0], anorm)[0]
    return 1.0 / rcond if rcond > 0 else np.inf


def torsion(op: DiscreteOperator) -> np.ndarray:
    """rho with A rho = 1."""
    rho = op._cache.get("torsion")
    if rho is None:
        rho = solve_linear(op, np.ones(op.n))
        op._cache["torsion"] = rho
    return rho.copy()


def auxiliary(op: DiscreteOperator, beta: float) -> np.ndarray:
    """Solve A phi = d^{-beta}; the datum enters through profile-weighted cell averages."""
    s = op.params.s
    if not (0.0 < beta < s + 1.0):
        raise DomainError(f"beta in (0, s+1) = (0, {s + 1}) required, got beta={beta}")
    return solve_linear(op, load_average(op.grid, beta, s=s))


def principal_eigenpair(op: DiscreteOperator, tol: float = 1e-12,
                        max_iter: int = 10_000) -> EigenPair:
    """Smallest eigenpair by inverse iteration (shift 0) in the symmetric variable."""
    cached = op._cache.get("eig")
    if cached is not None:
        return cached
    r = op.sqrt_mass
    # positive start: the torsion profile is already close to phi1
    y = r * torsion(op)
    y /= np.linalg.norm(y)
    # roundoff floor of the residual for the (ill-conditioned) local operator
    floor = 1e-14 * abs(op.A).sum(1).max() if op.is_sparse else 0.0
    lam_old = np.inf
    best = np.inf
    stall = 0
    for it in range(1, max_iter + 1):
        z = op.solve_sym(y)
        y = z / np.linalg.norm(z)
        lam = float(y @ op.matvec_sym(y))
        if abs(lam - lam_old) <= tol * lam:
            # eigenvalue settled; judge the vector by the field residual
            phi = y / r
            phi = phi / phi[np.argmax(np.abs(phi))]
            resid = float(np.abs(apply(op, phi) - lam * phi).max())
            if resid <= max(1e-10 * lam, floor):
                break
            stall = stall + 1 if resid >= 0.5 * best else 0
            best = min(best, resid)
            if stall >= 20:
                break
        lam_old = lam
    else:
        raise ConvergenceError(f"inverse iteration did not converge in {max_iter} steps",
                               {"lambda": lam})
    if resid > max(1e-9 * lam, 10 * floor):
        raise ConvergenceError("principal eigenvector residual stalled above 1e-9*lambda",
                               {"lambda": lam, "residual": resid})
    if not np.all(phi > 0):
        raise ConvergenceError("principal eigenvector changes sign",
                               {"min": float(phi.min())})
    pair = EigenPair(lambda1=lam, phi1=phi, iterations=it, residual=resid)
    op._cache["eig"] = pair
    return pair


def _smallest_pencil(op, w):
    """Smallest c with A y = c diag(w) y, and its eigenvector in field units."""
    if op.is_sparse:
        raise ValueError("generalized eigenproblem needs a dense operator")
    iw = 1.0 / np.sqrt(w)
    T = op.A * iw[:, None] * iw[None, :]
    vals, vecs = sla.eigh(T, subset_by_index=[0, 0], check_finite=False)
    u = vecs[:, 0] * iw / op.sqrt_mass
    u *= np.sign(u[np.argmax(np.abs(u))])
    return float(vals[0]), u / u.max()


def hardy_constant(op: DiscreteOperator, weight: str = "boundary",
                   refine=()) -> HardyEstimate:
    """Discrete minimum of the Hardy quotient (generalized eigenproblem).

    ``refine`` lists extra grid sizes assembled only for the refinement trace.
    """
    s = op.params.s
    flag = s < 0.5 and weight == "boundary"
    if flag:
        warnings.warn(f"s = {s} < 1/2: the boundary Hardy inequality is outside its usual regime",
                      stacklevel=2)
    trace = []
    for n in sorted(set(int(k) for k in refine) - {op.n}):
        other = assemble(op.params, op.domain, n)
        c, _ = _smallest_pencil(other, hardy_weight(other, weight))
        trace.append((n, c))
        del other
    c, u = _smallest_pencil(op, hardy_weight(op, weight))
    trace.append((op.n, c))
    trace.sort()
    return HardyEstimate(constant=c, minimizer=u, refinement_trace=trace, weight=weight,
                         regime_warning=flag)


def test_battery(op: DiscreteOperator):
    """The fixed list of test functions used by :func:`weak_residual`.

    Version 1: three quartic bumps (1 - ((x-c)/w)^2)_+^2, the quartic
    (1 - |x/R|^2)^2, the torsion function and the principal eigenfunction.
    """
    R = op.domain.R
    x = op.grid.nodes
    if op.domain.kind == "interval":
        centers = (-0.5 * R, 0.0, 0.5 * R)
    else:
        centers = (0.0, 0.4 * R, 0.7 * R)
    width = 0.3 * R
    out = []
    for c in centers:
        out.append((f"bump@{c / R:+.1f}R", np.clip(1 - ((x - c) / width) ** 2, 0, None) ** 2))
    out.append(("quartic", (1 - (x / R) ** 2) ** 2))
    out.append(("torsion", torsion(op)))
    out.append(("phi1", principal_eigenpair(op).phi1))
    return out


def weak_residual(op: DiscreteOperator, u, rhs_fn, detail: bool = False):
    """max over the battery of |<u, A psi> - ∫ rhs psi| / ||psi||_2.

    ``rhs_fn`` is either an array of cell averages or a callable of the
    coordinate, which is then averaged over each cell.
    """
    u = np.asarray(u, dtype=float)
    if callable(rhs_fn):
        rhs = cell_integral(op.grid, lambda x: rhs_fn(x) * np.ones_like(x)) / op.mass
    else:
        rhs = np.broadcast_to(np.asarray(rhs_fn, dtype=float), (op.n,))
    m = op.mass
    vals = {}
    for name, psi in test_battery(op):
        pair = float((m * u * apply(op, psi)).sum())
        load = float((m * rhs * psi).sum())
        vals[name] = abs(pair - load) / np.sqrt((m * psi * psi).sum())
    worst = max(vals.values())
    return (worst, vals) if detail else worst
