"""Monotone regularized scheme for A u = u^q / (d + 1/n)^{2s}, 0 < q < 1."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .grids import distance_weight, load_average, make_grid
from .linear import EigenPair, principal_eigenpair, solve_linear, weak_residual
from .operators import DiscreteOperator, local_operator

__all__ = [
    "IterationTrace",
    "ContrastReport",
    "subsolution_scale",
    "inner_step",
    "sublinear_solve",
    "weighted_l1",
    "interior_min",
    "reg_weight",
    "local_contrast",
    "DEFAULT_SCHEDULE",
    "BLOWUP",
]

DEFAULT_SCHEDULE = (1, 10, 100, 1000, 5000, 10000)
BLOWUP = 1e6
_INNER_TOL = 1e-10


@dataclass(eq=False)
class IterationTrace:
    q: float
    reg_indices: list = field(default_factory=list)
    fields: list = field(default_factory=list)
    sup_norms: list = field(default_factory=list)
    weighted_l1: list = field(default_factory=list)  # ∫ u / d^beta, beta = 0.8 by default
    singular_mass: list = field(default_factory=list)  # ∫ u^q / (d+1/n)^{2s}, reported only
    inner_iters: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    floors: list = field(default_factory=list)  # c_n phi1
    blowup: list = field(default_factory=list)
    roundoff: list = field(default_factory=list)  # largest clipped decrease per n
    l1_beta: float = 0.8

    def as_rows(self):
        return [
            {"n": n, "sup_norm": sup, "weighted_l1": wl1, "residual": res,
             "inner_iters": it, "blowup": bu}
            for n, sup, wl1, res, it, bu in zip(self.reg_indices, self.sup_norms,
                                                self.weighted_l1, self.residuals,
                                                self.inner_iters, self.blowup)
        ]


@dataclass(eq=False)
class ContrastReport:
    q: float
    reg_indices: list
    local_interior_min: list
    local_sup: list
    fractional_interior_min: list
    fractional_sup: list
    local_growth: float  # interior min, last / entry at growth_from
    fractional_last_change: float  # relative change of the interior min over the last step
    local_blowup: bool
    local_grid_n: int
    fractional_s: float

    def as_dict(self):
        return dict(self.__dict__)


def _order(op):
    return op.quad_meta.get("order", op.params.s)


def reg_weight(op, n_reg):
    """(d + 1/n)^{-2s} as the scheme sees it: profile-weighted cell averages."""
    s = _order(op)
    return load_average(op.grid, 2.0 * s, shift=1.0 / n_reg, s=s)


def subsolution_scale(op: DiscreteOperator, eig: EigenPair, q: float, n_reg) -> float:
    """Largest c with lambda1 c phi1 <= (c phi1)^q (d + 1/n)^{-2s} at every node.

    The weight is the one the scheme uses (:func:`reg_weight`), so c phi1 is
    a subsolution of the discrete problem itself.
    """
    if not (0.0 < q < 1.0):
        raise DomainError(f"q in (0,1) required, got q={q}")
    ratio = eig.phi1 ** (q - 1.0) * reg_weight(op, n_reg) / eig.lambda1
    return float(ratio.min() ** (1.0 / (1.0 - q)))


def inner_step(op, u, q, weight):
    """One lagged step: solve A u_new = weight * u^q."""
    return solve_linear(op, weight * np.abs(u) ** q)


def weighted_l1(u, beta, grid) -> float:
    """∫ u / d^beta with the weight averaged over cells."""
    u = np.asarray(u, dtype=float)
    if beta == 0:
        return float((u * grid.volumes).sum())
    return float((u * distance_weight(grid, beta) * grid.volumes).sum())


def interior_min(u, grid) -> float:
    """Minimum over the middle third of the interval, or r < R/3 on a ball."""
    x = grid.nodes
    R = grid.domain.R
    mask = np.abs(x) <= R / 3 if grid.domain.kind == "interval" else x <= R / 3
    return float(np.asarray(u)[mask].min())


def sublinear_solve(op: DiscreteOperator, q: float, reg_schedule=DEFAULT_SCHEDULE,
                    start_scale: float = 1.0, max_inner: int = 5000,
                    l1_beta: float = 0.8, residuals: bool = True) -> IterationTrace:
    """Run the scheme over an increasing schedule of regularization indices.

    Every n starts from max(u_{n-1}, c_n phi1), a discrete subsolution, so the
    inner iterates and the outer sequence increase.  ``start_scale`` < 1 shrinks
    the subsolution (used for uniqueness checks).
    """
    if not (0.0 < q < 1.0):
        raise DomainError(f"q in (0,1) required, got q={q}")
    sched = [int(n) for n in reg_schedule]
    if any(b <= a for a, b in zip(sched, sched[1:])) or sched[0] < 1:
        raise ValueError(f"reg_schedule must be increasing positive integers, got {sched}")
    if not (0.0 < start_scale <= 1.0):
        raise ValueError("start_scale must lie in (0, 1]")
    eig = principal_eigenpair(op)
    trace = IterationTrace(q=q, l1_beta=l1_beta)
    u_prev = None
    for n in sched:
        w = reg_weight(op, n)
        floor = start_scale * subsolution_scale(op, eig, q, n) * eig.phi1
        u = floor if u_prev is None else np.maximum(u_prev, floor)
        clipped = 0.0
        blew = False
        for it in range(1, max_inner + 1):
            new = inner_step(op, u, q, w)
            # the exact iterates increase; clip roundoff-size decreases and record them
            clipped = max(clipped, float((u - new).max()))
            new = np.maximum(new, u)
            delta = np.abs(new - u).max()
            u = new
            if u.max() > BLOWUP:
                blew = True
                break
            if delta <= _INNER_TOL:
                break
        trace.reg_indices.append(n)
        trace.fields.append(u.copy())
        trace.sup_norms.append(float(u.max()))
        trace.weighted_l1.append(weighted_l1(u, l1_beta, op.grid))
        trace.singular_mass.append(float((w * u ** q * op.mass).sum()))
        trace.inner_iters.append(it)
        trace.residuals.append(float(weak_residual(op, u, w * u ** q)) if residuals and not blew
                               else float("nan"))
        trace.floors.append(floor)
        trace.blowup.append(blew)
        trace.roundoff.append(max(clipped, 0.0))
        u_prev = u
        if blew:
            break
    return trace


def local_contrast(q: float, op_frac: DiscreteOperator, reg_schedule=DEFAULT_SCHEDULE,
                   local_n=None, growth_from: int = 10) -> ContrastReport:
    """Same scheme with the local operator -u'' and weight (d + 1/n)^{-2}.

    The local run needs the boundary layer of width 1/n resolved, so it uses
    its own (sparse) grid of ``local_n`` nodes, by default 4 per 1/n_max.
    """
    if op_frac.domain.kind != "interval":
        raise DomainError("the contrast experiment is set on an interval")
    sched = [int(n) for n in reg_schedule]
    if local_n is None:
        local_n = max(op_frac.n, int(4 * op_frac.domain.diameter * max(sched)))
    dom = op_frac.domain
    op_loc = local_operator(dom, make_grid(dom, local_n))
    loc = sublinear_solve(op_loc, q, sched, residuals=False)
    frac = sublinear_solve(op_frac, q, sched, residuals=False)
    lmin = [interior_min(u, op_loc.grid) for u in loc.fields]
    fmin = [interior_min(u, op_frac.grid) for u in frac.fields]
    return ContrastReport(
        q=q, reg_indices=sched[:len(lmin)],
        local_interior_min=lmin, local_sup=loc.sup_norms,
        fractional_interior_min=fmin, fractional_sup=frac.sup_norms,
        local_growth=lmin[-1] / lmin[sched.index(growth_from) if growth_from in sched else 0],
        fractional_last_change=abs(fmin[-1] / fmin[-2] - 1.0) if len(fmin) > 1 else 0.0,
        local_blowup=any(loc.blowup), local_grid_n=local_n, fractional_s=op_frac.params.s,
    )
