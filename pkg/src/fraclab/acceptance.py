"""The acceptance suite: eleven numbered checks with fixed sizes and tolerances.

Each ``criterion_k`` returns a record ``{"id", "name", "passed", ...}`` with
the measured quantities next to their thresholds, ready for
:func:`fraclab.analysis.make_report`.  Operators are assembled inside each
check and dropped afterwards so the whole suite fits in a few GB.
"""
from __future__ import annotations

import gc
import warnings

import numpy as np

from .analysis import fit_boundary_exponent, make_report, richardson
from .constants import FracParams, constants, getoor_constant
from .grids import Interval, RadialBall
from .linear import hardy_constant, solve_linear, torsion, auxiliary
from .operators import apply, assemble, hardy_quotient
from .singular import (power_gap_check, kato_gap, power_seminorm_diag, singular_solve,
                       weighted_power_diag)
from .sublinear import (DEFAULT_SCHEDULE, interior_min, local_contrast, sublinear_solve)
from .superlinear import apriori_sweep, critical_SR, scaling_check

__all__ = ["CRITERIA", "run_criterion", "run_acceptance", "SUBLINEAR_SCHEDULE",
           "SINGULAR_SCHEDULE", "BATTERY_SEED"]

# long enough that 1/n is far below the grid spacing; the last entry is a doubling
SUBLINEAR_SCHEDULE = (1, 10, 100, 1000, 10**4, 10**5, 10**6, 2 * 10**6)
SINGULAR_SCHEDULE = (1, 10, 100, 1000, 10**4)
BATTERY_SEED = 20240611


def _interval(s, n):
    return assemble(FracParams(1, s), Interval(1.0), n)


def _ball(N, s, n, R=1.0):
    return assemble(FracParams(N, s), RadialBall(N, R), n)


def _rel_changes(v):
    return [abs(b / a - 1.0) for a, b in zip(v, v[1:])]


def _cauchy(values):
    gaps = [abs(b - a) for a, b in zip(values, values[1:])]
    return all(g2 < g1 for g1, g2 in zip(gaps, gaps[1:])), gaps


def criterion_1():
    """Getoor profile: A (1-x^2)^s is constant away from the boundary layer."""
    rows = []
    for s in (0.25, 0.5, 0.75):
        op = _interval(s, 4096)
        x = op.grid.nodes
        v = apply(op, (1 - x * x) ** s)
        mask = op.grid.distance >= 10 * op.grid.h
        mean = float(v[mask].mean())
        dev = float((v[mask].max() - v[mask].min()) / abs(mean))
        row = {"s": s, "n": op.n, "constant": mean, "oracle": getoor_constant(1, s),
               "deviation": dev, "passed": dev <= 0.02}
        if s == 0.5:
            row["passed"] = row["passed"] and abs(mean - 1.0) <= 0.01
        rows.append(row)
        del op
    return {"name": "operator consistency (Getoor profile)",
            "passed": all(r["passed"] for r in rows), "runs": rows,
            "threshold": {"deviation": 0.02, "s=0.5 constant": "1.0 +- 1%"}}


def criterion_2():
    """Torsion boundary exponent within s +- 0.05."""
    rows = []
    for s in (0.3, 0.5, 0.75):
        op = _interval(s, 4096)
        fit = fit_boundary_exponent(torsion(op), op.grid)
        rows.append({"s": s, "exponent": fit.exponent, "r2": fit.r2,
                     "bound_2s": 2 * s, "below_d^2s_rate": fit.exponent >= 2 * s,
                     "passed": abs(fit.exponent - s) <= 0.05})
        del op
    return {"name": "torsion boundary exponent", "passed": all(r["passed"] for r in rows),
            "runs": rows, "threshold": 0.05,
            "note": "bound_2s and below_d^2s_rate are reported only"}


def criterion_3():
    """Auxiliary problem exponents for beta below, at and above s."""
    rows = []
    for s in (0.4, 0.75):
        op = _interval(s, 4096)
        cases = (("A", s / 2, s), ("B", s, s), ("C", (3 * s + 1) / 2, 2 * s - (3 * s + 1) / 2))
        for case, beta, target in cases:
            u = auxiliary(op, beta)
            fp = fit_boundary_exponent(u, op.grid, "power")
            fl = fit_boundary_exponent(u, op.grid, "powerlog")
            if case == "B":
                exp, ok = fl.exponent, fl.r2 > fp.r2 and abs(fl.exponent - target) <= 0.08
            else:
                exp, ok = fp.exponent, abs(fp.exponent - target) <= 0.08
            rows.append({"s": s, "case": case, "beta": beta, "target": target,
                         "exponent": exp, "r2_power": fp.r2, "r2_powerlog": fl.r2,
                         "exponent_power": fp.exponent, "exponent_powerlog": fl.exponent,
                         "passed": bool(ok)})
        del op
    return {"name": "auxiliary asymptotics", "passed": all(r["passed"] for r in rows),
            "runs": rows, "threshold": 0.08}


def criterion_4():
    """Sublinear scheme: monotone, above the floor, small residual, stabilized."""
    rows = []
    for s in (0.3, 0.6):
        op = _interval(s, 4096)
        tr = sublinear_solve(op, 0.5, SUBLINEAR_SCHEDULE)
        mono = all(np.all(b >= a) for a, b in zip(tr.fields, tr.fields[1:]))
        floor = all(np.all(u >= f) for u, f in zip(tr.fields, tr.floors))
        mins = [interior_min(u, op.grid) for u in tr.fields]
        last = _rel_changes(mins)[-1]
        res = max(tr.residuals)
        rows.append({"s": s, "monotone": mono, "above_floor": floor, "max_weak_residual": res,
                     "interior_min": mins, "changes": _rel_changes(mins),
                     "last_doubling_change": last, "blowup": any(tr.blowup),
                     "passed": mono and floor and res <= 1e-6 and last < 0.01})
        del op, tr
    return {"name": "sublinear existence", "passed": all(r["passed"] for r in rows),
            "runs": rows, "schedule": list(SUBLINEAR_SCHEDULE),
            "threshold": {"residual": 1e-6, "last_doubling": 0.01}}


def criterion_5():
    """Local operator blows up, the fractional one (s = 0.3) stabilizes."""
    op = _interval(0.3, 2048)
    rep = local_contrast(0.5, op, DEFAULT_SCHEDULE)
    ok = rep.local_growth >= 10 and rep.fractional_last_change < 0.01
    out = {"name": "local/nonlocal contrast", "passed": bool(ok),
           "threshold": {"local_growth": 10, "fractional_change": 0.01}}
    out.update(rep.as_dict())
    return out


def criterion_6():
    """Superlinear ground states: stationarity, Hardy floor, sup-norm plateau, interior max."""
    op = _ball(3, 0.75, 1024)
    sw = apriori_sweep(op, 2.0, (1, 10, 100, 1000))
    q = 2.0
    el_ok = max(sw.el_residuals) <= 1e-8
    hardy_ok = all(m ** (q - 1) >= sw.hardy for m in sw.sup_norms)
    change = abs(sw.sup_norms[-1] / sw.sup_norms[-2] - 1.0)
    dist_ok = min(sw.argmax_distance) >= 5 * sw.h
    out = {"name": "superlinear a-priori structure",
           "passed": bool(el_ok and hardy_ok and change < 0.05 and dist_ok),
           "el_residual_ok": el_ok, "hardy_floor_ok": hardy_ok, "sup_change_100_1000": change,
           "argmax_ok": dist_ok, "threshold": {"el": 1e-8, "sup_change": 0.05, "argmax_h": 5}}
    out.update(sw.as_dict())
    return out


def criterion_7():
    """S(0.5)/S(1) against 0.5^{4s/2*} on equal-spacing grids."""
    rows = []
    for n in (256, 512, 1024):
        r1 = critical_SR(_ball(3, 0.75, n))
        r2 = critical_SR(_ball(3, 0.75, n // 2, R=0.5))
        err = scaling_check(r1, r2, 0.75, 3)
        rows.append({"n_R1": n, "n_R05": n // 2, "S_1": r1.S_R, "S_05": r2.S_R, "error": err})
    errs = [r["error"] for r in rows]
    dec = all(b < a for a, b in zip(errs, errs[1:]))
    pos = all(r["S_1"] > 0 and r["S_05"] > 0 for r in rows)
    return {"name": "critical scaling law", "passed": bool(errs[-1] <= 0.03 and dec and pos),
            "runs": rows, "decreasing": dec, "positive": pos, "threshold": 0.03,
            "target_ratio": 0.5 ** 0.75}


def criterion_8():
    """Boundary Hardy constant on the interval, s = 0.75."""
    op = _interval(0.75, 4096)
    K = constants(op.params).K_Ns
    est = hardy_constant(op, refine=(512, 1024, 2048))
    vals = [c for _, c in est.refinement_trace]
    cauchy, gaps = _cauchy(vals)
    rich = richardson(*vals[-3:])
    c = est.constant
    return {"name": "Hardy constant", "passed": bool(c > 0 and c <= 1.05 * K and cauchy),
            "constant": c, "K_Ns": K, "upper": 1.05 * K, "trace": est.refinement_trace,
            "gaps": gaps, "cauchy": cauchy, "richardson": rich.value,
            "richardson_order": rich.order, "richardson_degenerate": rich.degenerate,
            "richardson_within_20pct_of_K": abs(rich.value - K) <= 0.2 * K}


def _random_radial_battery(r, count, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        c = rng.normal(size=6)
        width = 10 ** rng.uniform(-2, 0)
        out.append((1 - r * r) ** 0.75 * np.polyval(c, r) * np.exp(-(r / width) ** 2))
    return out


def criterion_9():
    """Potential Hardy quotient above 0.9 Lambda for a seeded random battery."""
    op = _ball(3, 0.75, 512)
    L = constants(op.params).Lambda_Ns
    q = [hardy_quotient(op, u, "potential")
         for u in _random_radial_battery(op.grid.nodes, 100, BATTERY_SEED)]
    return {"name": "potential Hardy inequality", "passed": bool(min(q) >= 0.9 * L),
            "Lambda_Ns": L, "min_quotient": min(q), "median_quotient": float(np.median(q)),
            "fields": len(q), "seed": BATTERY_SEED, "threshold": 0.9 * L}


def criterion_10():
    """Singular problem: monotone, floor, plateaus, algebraic inequality."""
    s = 0.75
    op = _interval(s, 2048)
    run = singular_solve(op, 1.0, 0.5, schedule=SINGULAR_SCHEDULE)
    mono = all(np.all(b >= a) for a, b in zip(run.fields, run.fields[1:]))
    floor = all(m >= run.interior_min[0] for m in run.interior_min)
    ps = power_seminorm_diag(run)
    wp = weighted_power_diag(run, s / 2)
    ps_c, wp_c = _rel_changes(ps)[-1], _rel_changes(wp)[-1]
    kato = max(kato_gap(op, u, 1.0) for u in run.fields)
    grid = np.linspace(0.01, 10.0, 200)
    pairs = np.array([(a, b) for a in grid for b in grid])
    rng = np.random.default_rng(BATTERY_SEED)
    rand = rng.uniform(0, 10, size=(1000, 2))
    alg = [power_gap_check(sig, np.vstack([pairs, rand])) for sig in (0.5, 1.0, 2.0)]
    ok = (mono and floor and ps_c < 0.02 and wp_c < 0.02 and all(a["passed"] for a in alg))
    return {"name": "singular problem", "passed": bool(ok), "monotone": mono,
            "interior_floor": floor, "power_seminorm": ps, "weighted_power": wp,
            "power_seminorm_change": ps_c, "weighted_power_change": wp_c,
            "kato_gap_max": kato, "power_gap": alg, "schedule": list(SINGULAR_SCHEDULE),
            "newton_iters": run.newton_iters, "threshold": 0.02}


def criterion_11():
    """Symmetry, definiteness, basis maximum principle, two-seed uniqueness."""
    ops = []
    for s in (0.25, 0.5, 0.75):
        ops.append(("interval", s, _interval(s, 128)))
    for s in (0.5, 0.75):
        ops.append(("radial", s, _ball(3, s, 128)))
    rows = []
    for kind, s, op in ops:
        A = op.A
        asym = float(np.abs(A - A.T).max() / np.abs(A).max())
        lmin = float(np.linalg.eigvalsh(A)[0])
        basis_min = min(float(solve_linear(op, e).min()) for e in np.eye(op.n))
        rows.append({"kind": kind, "s": s, "asymmetry": asym, "min_eig": lmin,
                     "basis_min": basis_min,
                     "passed": asym <= 1e-12 and lmin > 0 and basis_min >= 0})
    op = _interval(0.5, 512)
    t1 = sublinear_solve(op, 0.5, (1, 10, 100))
    t2 = sublinear_solve(op, 0.5, (1, 10, 100), start_scale=0.01)
    sub_gap = float(np.abs(t1.fields[-1] - t2.fields[-1]).max())
    r1 = singular_solve(op, 1.0, 0.5)
    r2 = singular_solve(op, 1.0, 0.5, seed=10.0 * r1.fields[0])
    sing_gap = float(np.abs(r1.fields[-1] - r2.fields[-1]).max())
    ok = all(r["passed"] for r in rows) and sub_gap <= 1e-8 and sing_gap <= 1e-8
    return {"name": "cross-cutting invariants", "passed": bool(ok), "operators": rows,
            "sublinear_two_seed_gap": sub_gap, "singular_two_seed_gap": sing_gap,
            "threshold": 1e-8}


CRITERIA = {k: globals()[f"criterion_{k}"] for k in range(1, 12)}


def run_criterion(k: int) -> dict:
    if k not in CRITERIA:
        raise ValueError(f"unknown criterion {k}; valid ids are 1..{len(CRITERIA)}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rec = CRITERIA[k]()
    gc.collect()
    rec["id"] = k
    rec["passed"] = bool(rec["passed"])
    return rec


def run_acceptance(ids=None, log=None) -> dict:
    """Run the listed criteria (all by default) and aggregate them into a report."""
    ids = sorted(CRITERIA) if ids is None else [int(k) for k in ids]
    records = []
    for k in ids:
        rec = run_criterion(k)
        records.append(rec)
        if log is not None:
            log(f"criterion {k:2d} {'PASS' if rec['passed'] else 'FAIL'}  {rec['name']}")
    return make_report(records)
