"""Configuration-driven runner: ``python -m fraclab <subcommand> --config cfg.json --out dir``.

A config is one JSON document::

    {
      "geometry": {"kind": "interval" | "radial", "N": 1, "R": 1.0},
      "params":   {"s": 0.5, "q": 0.5, "sigma": 1.0, "alpha": 0.5, "beta": 0.2},
      "grid":     {"n": 1024, "refine": [256, 512]},
      "schedule": [1, 10, 100, 1000],
      "options":  {...subcommand specific...}
    }

or ``{"experiments": [cfg, cfg, ...], "workers": 2}`` to run several
configs with the same subcommand, each into its own subdirectory.

CSV artifacts per subcommand:

=========== =================================================================
constants   (none; constants.json)
torsion     torsion.csv: node, value
auxiliary   auxiliary_<k>.csv: node, value (one per beta)
eigen       phi1.csv: node, value; refine.csv: n, lambda1
hardy       minimizer.csv: node, value; refine.csv: n, constant
sublinear   trace.csv: n, sup_norm, weighted_l1, residual, inner_iters, blowup;
            fields.csv: node, one column per n
contrast    contrast.csv: n, local_interior_min, local_sup,
            fractional_interior_min, fractional_sup
superlinear sweep.csv: n, sup_norm, argmax_distance, el_residual, energy, mp_level
critical    critical.csv: R, n, S_R, el_residual, concentration_fraction,
            radial_bound_const; minimizer_<k>.csv: node, value
singular    diagnostics.csv: n, interior_min, residual, newton_iters,
            power_seminorm, weighted_power_<beta>...
acceptance  acceptance.csv: id, name, passed; report.json
=========== =================================================================

Every run writes ``summary.json`` with the schema tag, the normalized config,
the results and a ``checks`` map; the exit status is 0 iff every check holds.
A rejected config exits with status 2 and an error JSON on standard error.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .analysis import fit_boundary_exponent, richardson
from .constants import FracParams, constants, critical_exponent
from .errors import AssemblyError, ConvergenceError, DomainError
from .grids import Interval, RadialBall
from .linear import auxiliary, hardy_constant, principal_eigenpair, torsion
from .operators import apply, cached_assemble
from .singular import FSpec, kato_gap, power_seminorm_diag, singular_solve, weighted_power_diag
from .sublinear import DEFAULT_SCHEDULE, interior_min, local_contrast, sublinear_solve
from .superlinear import apriori_sweep, critical_SR, scaling_check

__all__ = ["main", "run", "SUBCOMMANDS", "SUMMARY_SCHEMA"]

SUMMARY_SCHEMA = "fraclab-run/1"


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# config validation (everything is checked before any assembly)

def _section(cfg, key):
    sec = cfg.get(key, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"'{key}' must be an object")
    return sec


def _domain(cfg):
    geo = _section(cfg, "geometry")
    kind = geo.get("kind", "interval")
    R = geo.get("R", 1.0)
    if isinstance(R, list):
        raise ConfigError("geometry.R must be a number; use options.radii for several radii")
    if kind == "interval":
        N = geo.get("N", 1)
        if N != 1:
            raise ConfigError("an interval has N = 1")
        return Interval(float(R))
    if kind == "radial":
        return RadialBall(int(geo.get("N", 3)), float(R))
    raise ConfigError(f"geometry.kind must be 'interval' or 'radial', got {kind!r}")


def _params(cfg, dom):
    p = _section(cfg, "params")
    if "s" not in p:
        raise ConfigError("params.s is required")
    return FracParams(dom.N, float(p["s"]), q=p.get("q"), sigma=p.get("sigma"),
                      alpha=p.get("alpha"), beta=p.get("beta"))


def _n(cfg, default=1024):
    g = _section(cfg, "grid")
    n = int(g.get("n", default))
    if n < 8:
        raise ConfigError(f"grid.n >= 8 required, got {n}")
    refine = [int(k) for k in g.get("refine", [])]
    return n, refine


def _schedule(cfg, default):
    sched = [int(k) for k in cfg.get("schedule", default)]
    if not sched or sched[0] < 1 or any(b <= a for a, b in zip(sched, sched[1:])):
        raise ConfigError(f"schedule must be increasing positive integers, got {sched}")
    return sched


def _require(value, name):
    if value is None:
        raise ConfigError(f"params.{name} is required for this subcommand")
    return float(value)


# --------------------------------------------------------------------------
# subcommands: each returns (results, checks) and writes its CSVs into out

def _cmd_constants(cfg, out):
    dom = _domain(cfg)
    params = _params(cfg, dom)
    c = constants(params).as_dict()
    finite = [v for v in c.values() if np.isfinite(v)]
    io.write_json(out / "constants.json", c)
    return c, {"positive": all(v > 0 for v in finite)}


def _op(cfg, default_n=1024):
    dom = _domain(cfg)
    params = _params(cfg, dom)
    n, refine = _n(cfg, default_n)
    return params, dom, n, refine


def _cmd_torsion(cfg, out):
    params, dom, n, _ = _op(cfg)
    op = cached_assemble(params, dom, n)
    rho = torsion(op)
    res = float(np.abs(apply(op, rho) - 1.0).max())
    fit = fit_boundary_exponent(rho, op.grid)
    io.write_field(out / "torsion.csv", op.grid, rho)
    results = {"n": n, "max": float(rho.max()), "solve_residual": res, "fit": fit.as_dict()}
    checks = {"positive": bool(np.all(rho > 0)), "residual": res <= 1e-10}
    if dom.kind == "interval":
        results["symmetry_gap"] = float(np.abs(rho - rho[::-1]).max())
    return results, checks


def _cmd_auxiliary(cfg, out):
    params, dom, n, _ = _op(cfg)
    opts = _section(cfg, "options")
    betas = opts.get("betas", [params.beta] if params.beta is not None else None)
    if not betas:
        raise ConfigError("params.beta or options.betas is required")
    betas = [float(b) for b in betas]
    for b in betas:
        if not (0.0 < b < params.s + 1.0):
            raise DomainError(f"beta in (0, s+1) = (0, {params.s + 1}) required, got beta={b}")
    op = cached_assemble(params, dom, n)
    rows, pos = [], True
    for k, b in enumerate(betas):
        u = auxiliary(op, b)
        pos = pos and bool(np.all(u > 0))
        io.write_field(out / f"auxiliary_{k}.csv", op.grid, u)
        rows.append({"beta": b, "power": fit_boundary_exponent(u, op.grid, "power").as_dict(),
                     "powerlog": fit_boundary_exponent(u, op.grid, "powerlog").as_dict()})
    return {"n": n, "runs": rows}, {"positive": pos}


def _cmd_eigen(cfg, out):
    params, dom, n, refine = _op(cfg)
    trace = []
    for m in sorted(set(refine) - {n}):
        trace.append((m, principal_eigenpair(cached_assemble(params, dom, m)).lambda1))
    op = cached_assemble(params, dom, n)
    eig = principal_eigenpair(op)
    trace = sorted(trace + [(n, eig.lambda1)])
    io.write_field(out / "phi1.csv", op.grid, eig.phi1)
    io.write_rows(out / "refine.csv", [{"n": m, "lambda1": v} for m, v in trace])
    results = {"n": n, "lambda1": eig.lambda1, "residual": eig.residual,
               "iterations": eig.iterations, "trace": trace}
    if len(trace) >= 3:
        r = richardson(*[v for _, v in trace[-3:]])
        results["richardson"] = {"value": r.value, "order": r.order, "degenerate": r.degenerate}
    checks = {"residual": eig.residual <= 1e-9 * eig.lambda1,
              "positive": bool(np.all(eig.phi1 > 0))}
    return results, checks


def _cmd_hardy(cfg, out):
    params, dom, n, refine = _op(cfg)
    weight = _section(cfg, "options").get("weight", "boundary")
    if weight not in ("boundary", "potential"):
        raise ConfigError(f"options.weight must be 'boundary' or 'potential', got {weight!r}")
    if weight == "potential":
        params.require_sobolev()
    op = cached_assemble(params, dom, n)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        est = hardy_constant(op, weight, refine=refine)
    c = constants(params)
    io.write_field(out / "minimizer.csv", op.grid, est.minimizer)
    io.write_rows(out / "refine.csv", [{"n": m, "constant": v} for m, v in est.refinement_trace])
    results = {"n": n, "weight": weight, "constant": est.constant,
               "trace": est.refinement_trace, "regime_warning": est.regime_warning,
               "reference": c.K_Ns if weight == "boundary" else c.Lambda_Ns}
    return results, {"positive": est.constant > 0,
                     "minimizer_positive": bool(np.all(est.minimizer > 0))}


def _cmd_sublinear(cfg, out):
    params, dom, n, _ = _op(cfg)
    q = _require(params.q, "q")
    if not (0.0 < q < 1.0):
        raise DomainError(f"q in (0,1) required, got q={q}")
    sched = _schedule(cfg, DEFAULT_SCHEDULE)
    l1_beta = float(_section(cfg, "options").get("l1_beta", 0.8))
    op = cached_assemble(params, dom, n)
    tr = sublinear_solve(op, q, sched, l1_beta=l1_beta)
    io.write_rows(out / "trace.csv", tr.as_rows(),
                  ["n", "sup_norm", "weighted_l1", "residual", "inner_iters", "blowup"])
    io.write_fields(out / "fields.csv", op.grid, tr.fields, [f"n={k}" for k in tr.reg_indices])
    mins = [interior_min(u, op.grid) for u in tr.fields]
    results = {"n": n, "q": q, "schedule": sched, "sup_norms": tr.sup_norms,
               "weighted_l1": tr.weighted_l1, "singular_mass": tr.singular_mass,
               "residuals": tr.residuals, "interior_min": mins, "roundoff": tr.roundoff}
    checks = {
        "monotone": all(bool(np.all(b >= a)) for a, b in zip(tr.fields, tr.fields[1:])),
        "above_floor": all(bool(np.all(u >= f)) for u, f in zip(tr.fields, tr.floors)),
        "residual": not any(tr.blowup) and max(tr.residuals) <= 1e-6,
    }
    return results, checks


def _cmd_contrast(cfg, out):
    params, dom, n, _ = _op(cfg, 2048)
    q = _require(params.q, "q")
    if not (0.0 < q < 1.0):
        raise DomainError(f"q in (0,1) required, got q={q}")
    if dom.kind != "interval":
        raise ConfigError("the contrast experiment needs geometry.kind = 'interval'")
    sched = _schedule(cfg, DEFAULT_SCHEDULE)
    local_n = _section(cfg, "options").get("local_n")
    op = cached_assemble(params, dom, n)
    rep = local_contrast(q, op, sched, local_n=local_n)
    rows = [{"n": k, "local_interior_min": a, "local_sup": b,
             "fractional_interior_min": c, "fractional_sup": d}
            for k, a, b, c, d in zip(rep.reg_indices, rep.local_interior_min, rep.local_sup,
                                     rep.fractional_interior_min, rep.fractional_sup)]
    io.write_rows(out / "contrast.csv", rows)
    return rep.as_dict(), {"fractional_bounded": max(rep.fractional_sup) < 1e6}


def _cmd_superlinear(cfg, out):
    params, dom, n, _ = _op(cfg, 512)
    q = _require(params.q, "q")
    top = critical_exponent(params.N, params.s) - 1.0 if params.sobolev_ok else np.inf
    if not (1.0 < q < top):
        raise DomainError(f"1 < q < 2*_s - 1 = {top} required, got q={q}")
    sched = _schedule(cfg, (1, 10, 100, 1000))
    op = cached_assemble(params, dom, n)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sw = apriori_sweep(op, q, sched)
    rows = [{"n": k, "sup_norm": g.field.max(), "argmax_distance": d, "el_residual": g.el_residual,
             "energy": g.energy, "mp_level": g.mp_level}
            for k, g, d in zip(sw.reg_indices, sw.states, sw.argmax_distance)]
    io.write_rows(out / "sweep.csv", rows)
    checks = {"el_residual": max(sw.el_residuals) <= 1e-8,
              "hardy_floor": all(m ** (q - 1) >= sw.hardy for m in sw.sup_norms),
              "argmax_interior": min(sw.argmax_distance) >= 5 * sw.h}
    return sw.as_dict(), checks


def _cmd_critical(cfg, out):
    params, dom, n, _ = _op(cfg, 512)
    if dom.kind != "radial":
        raise ConfigError("critical needs geometry.kind = 'radial'")
    params.require_sobolev()
    opts = _section(cfg, "options")
    radii = [float(r) for r in opts.get("radii", [dom.R])]
    if any(r <= 0 for r in radii):
        raise DomainError("R > 0 required for every radius")
    equal = bool(opts.get("equal_spacing", True))
    reps = []
    for k, R in enumerate(radii):
        m = max(8, int(round(n * R / radii[0]))) if equal else n
        op = cached_assemble(params, RadialBall(dom.N, R), m)
        rep = critical_SR(op, R)
        io.write_field(out / f"minimizer_{k}.csv", op.grid, rep.minimizer)
        reps.append(rep)
        del op
    io.write_rows(out / "critical.csv", [r.as_dict() for r in reps],
                  ["R", "n", "S_R", "el_residual", "concentration_fraction",
                   "radial_bound_const"])
    errors = [scaling_check(reps[0], r, params.s, params.N) for r in reps[1:]]
    results = {"reports": [r.as_dict() for r in reps], "scaling_errors": errors}
    checks = {"positive": all(r.S_R > 0 for r in reps),
              "normalized": all(abs(r.normalization - 1) <= 1e-10 for r in reps),
              "el_residual": all(r.el_residual <= 1e-7 for r in reps)}
    return results, checks


def _cmd_singular(cfg, out):
    params, dom, n, _ = _op(cfg, 1024)
    sigma = _require(params.sigma, "sigma")
    alpha = _require(params.alpha, "alpha")
    if not sigma > 0:
        raise DomainError(f"sigma > 0 required, got sigma={sigma}")
    opts = _section(cfg, "options")
    f = opts.get("f", {"kind": "constant", "value": 1.0})
    try:
        f_spec = FSpec(**{k: (tuple(v) if k == "table" else v) for k, v in f.items()})
    except TypeError as exc:
        raise ConfigError(f"options.f: {exc}") from None
    betas = [float(b) for b in opts.get("betas", [params.s / 2])]
    for b in betas:
        if not (0.0 < b < 2 * params.s):
            raise DomainError(f"beta in (0, 2s) = (0, {2 * params.s}) required, got beta={b}")
    sched = _schedule(cfg, (1, 10, 100))
    op = cached_assemble(params, dom, n)
    run_ = singular_solve(op, sigma, alpha, f_spec, sched)
    ps = power_seminorm_diag(run_)
    wp = {b: weighted_power_diag(run_, b) for b in betas}
    rows = []
    for i, row in enumerate(run_.as_rows()):
        row["power_seminorm"] = ps[i]
        for b in betas:
            row[f"weighted_power_{b!r}"] = wp[b][i]
        rows.append(row)
    io.write_rows(out / "diagnostics.csv", rows)
    kato = max(kato_gap(op, u, sigma) for u in run_.fields)
    results = {"n": n, "sigma": sigma, "alpha": alpha, "f": f_spec.describe(),
               "schedule": sched, "interior_min": run_.interior_min,
               "residuals": run_.residuals, "newton_iters": run_.newton_iters,
               "fallback": run_.fallback, "power_seminorm": ps,
               "weighted_power": {repr(b): v for b, v in wp.items()}, "kato_gap_max": kato}
    checks = {
        "monotone": all(bool(np.all(b >= a)) for a, b in zip(run_.fields, run_.fields[1:])),
        "interior_floor": all(m >= run_.interior_min[0] for m in run_.interior_min),
        "residual": max(run_.residuals) <= 1e-10,
        "kato": kato <= 1e-6,
    }
    return results, checks


def _cmd_acceptance(cfg, out):
    from .acceptance import CRITERIA, run_acceptance

    ids = _section(cfg, "options").get("criteria", sorted(CRITERIA))
    bad = [k for k in ids if k not in CRITERIA]
    if bad:
        raise ConfigError(f"unknown criteria {bad}; valid ids are 1..{len(CRITERIA)}")
    doc = run_acceptance(ids, log=lambda line: print(line, file=sys.stderr, flush=True))
    io.write_json(out / "report.json", doc)
    io.write_rows(out / "acceptance.csv",
                  [{"id": r["id"], "name": r["name"], "passed": r["passed"]}
                   for r in doc["results"]])
    return {"checks": doc["checks"], "passed": doc["passed"]}, \
        {f"criterion_{r['id']}": r["passed"] for r in doc["results"]}


SUBCOMMANDS = {
    "constants": _cmd_constants,
    "torsion": _cmd_torsion,
    "auxiliary": _cmd_auxiliary,
    "eigen": _cmd_eigen,
    "hardy": _cmd_hardy,
    "sublinear": _cmd_sublinear,
    "contrast": _cmd_contrast,
    "superlinear": _cmd_superlinear,
    "critical": _cmd_critical,
    "singular": _cmd_singular,
    "acceptance": _cmd_acceptance,
}


def run(subcommand: str, config: dict, out) -> bool:
    """Run one subcommand (or a list of experiments); returns True iff all checks hold."""
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    out = Path(out)
    if "experiments" in config:
        exps = config["experiments"]
        if not isinstance(exps, list) or not exps:
            raise ConfigError("'experiments' must be a non-empty list")
        workers = int(config.get("workers", 1))
        dirs = [out / f"exp-{i:03d}" for i in range(len(exps))]
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            oks = list(pool.map(lambda a: run(subcommand, *a), zip(exps, dirs)))
        return all(oks)
    out.mkdir(parents=True, exist_ok=True)
    results, checks = SUBCOMMANDS[subcommand](config, out)
    checks = {k: bool(v) for k, v in checks.items()}
    io.write_json(out / "summary.json", {
        "schema": SUMMARY_SCHEMA, "subcommand": subcommand, "config": config,
        "results": results, "checks": checks, "ok": all(checks.values()),
    })
    return all(checks.values())


def _error(exc, status=2):
    print(json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True),
          file=sys.stderr)
    return status


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="fraclab", description=__doc__.split("\n")[0])
    ap.add_argument("subcommand", choices=sorted(SUBCOMMANDS))
    ap.add_argument("--config", required=True, help="JSON config file")
    ap.add_argument("--out", required=True, help="output directory")
    args = ap.parse_args(argv)
    try:
        with open(args.config) as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        return _error(ConfigError(f"cannot read config: {exc}"))
    try:
        ok = run(args.subcommand, config, args.out)
    except (ConfigError, DomainError, ValueError, TypeError) as exc:
        return _error(exc)
    except (ConvergenceError, AssemblyError) as exc:
        return _error(exc, 3)
    return 0 if ok else 1
