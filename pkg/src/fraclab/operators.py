"""Dense discretizations of the restricted fractional Laplacian.

Both geometries use the same collocation scheme.  A field is written as
``u = w v`` with ``w = (R^2 - |x|^2)_+^s``, the profile on which ``(-Δ)^s`` is
the constant ``kappa`` (see :func:`fraclab.constants.getoor_constant`).  Then

    (-Δ)^s u(x_i) = kappa v_i + C ∫ w(y) (v_i - v(y)) |x_i - y|^{-N-2s} dy,

and only the second term is discretized: ``v`` is interpolated by hat
functions, the part of the integral within one cell of ``x_i`` is handled by a
second difference, and every other cell is integrated against the kernel with
Gauss quadrature in closed form moment tables.  The exterior condition lives
entirely in ``kappa``.

With ``B_ij >= 0`` the resulting coefficients, the stored energy matrix is

    K = kappa M W^{-1} + W^{-1} (diag(S 1) - S) W^{-1},
    S_ij = (m_i w_i B_ij + m_j w_j B_ji) / 2,

where ``M`` holds cell volumes and ``W`` the nodal values of ``w``.  ``K`` is a
symmetric Z-matrix with ``K w = kappa M 1 > 0``, hence positive definite with
a nonnegative inverse, and the operator reproduces the Getoor profile exactly.
The matrix kept on the object is ``A = M^{-1/2} K M^{-1/2}``; fields are
mapped in and out of that symmetric variable by :func:`apply` and friends.
"""
from __future__ import annotations

import hashlib
import os
import struct
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.special import gamma, hyp2f1, roots_jacobi

from .constants import (FracParams, critical_exponent, getoor_constant,
                        kernel_constant, sphere_area)
from .errors import AssemblyError, DomainError
from .grids import GridSpec, distance_weight, make_grid, potential_weight

__all__ = [
    "DiscreteOperator",
    "assemble_interval",
    "assemble_radial",
    "assemble",
    "local_operator",
    "apply",
    "seminorm_sq",
    "sobolev_quotient",
    "hardy_quotient",
    "radial_kernel_factor",
    "save_operator",
    "load_operator",
    "cached_assemble",
    "QUAD_VERSION",
]

QUAD_VERSION = 2
_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)
_GL_T = 0.5 * (_GL_X + 1.0)
_GL_WT = 0.5 * _GL_W
# cells this close to the boundary get exact-profile quadrature
_BOUNDARY_CELLS = 4
# radial cells this close to the origin get the exact kernel factor
_ORIGIN_CELLS = 32
_ROW_CHUNK = 256


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Symmetric matrix ``A`` plus everything needed to interpret it.

    ``A`` acts on ``sqrt(m) * u``; use :func:`apply` for the action on a field.
    """

    A: object
    grid: GridSpec
    params: FracParams
    domain: object
    quad_meta: dict = field(default_factory=dict)
    profile: object = None  # nodal (R^2-|x|^2)^s, set for the fractional operators
    kappa: float = 0.0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n(self):
        return self.grid.n

    @property
    def mass(self):
        return self.grid.weights

    @property
    def sqrt_mass(self):
        return np.sqrt(self.grid.weights)

    @property
    def is_sparse(self):
        return sp.issparse(self.A)

    def factor(self):
        """Cholesky (dense) or sparse LU factorization, computed once."""
        with self._lock:
            fac = self._cache.get("factor")
            if fac is None:
                if self.is_sparse:
                    fac = ("sparse", sp.linalg.splu(sp.csc_matrix(self.A)))
                else:
                    fac = ("dense", sla.cho_factor(self.A, lower=False, check_finite=False))
                self._cache["factor"] = fac
            return fac

    def solve_sym(self, b):
        kind, fac = self.factor()
        if kind == "sparse":
            return fac.solve(b)
        return sla.cho_solve(fac, b, check_finite=False)

    def matvec_sym(self, y):
        return self.A @ y

    def stiffness_apply(self, u):
        """K u with K = M^{1/2} A M^{1/2} (the energy matrix).

        For the fractional operators the product is formed from differences
        v_i - v_j, v = u / profile: rows of K nearly cancel on smooth fields and
        the plain product loses about log10(cond) digits to roundoff.
        """
        r = self.sqrt_mass
        if self.profile is None:
            return r * self.matvec_sym(r * u)
        w = self.profile
        v = u / w
        out = self.kappa * self.mass * v
        c = r * w
        for i0 in range(0, self.n, _ROW_CHUNK):
            i1 = min(self.n, i0 + _ROW_CHUNK)
            D = v[i0:i1, None] - v[None, :]
            out[i0:i1] -= r[i0:i1] * ((self.A[i0:i1] * c[None, :]) * D).sum(1)
        return out


def _check_field(op, u):
    u = np.asarray(u, dtype=float)
    if u.shape != (op.n,):
        raise ValueError(f"field has shape {u.shape}, operator expects ({op.n},)")
    return u


# --------------------------------------------------------------------------
# kernel pieces


def _moment_tables(offsets, s):
    """M_m(d) = ∫_0^1 t^m |d + t|^{-1-2s} dt for m = 0, 1, 2 (needs |d+t| >= 1)."""
    d = np.asarray(offsets, dtype=float)[:, None]
    k = np.abs(d + _GL_T) ** (-1.0 - 2.0 * s) * _GL_WT
    return k.sum(1), (k * _GL_T).sum(1), (k * _GL_T ** 2).sum(1)


def radial_kernel_factor(N, s, r, rho):
    """Smooth factor g with K(r, rho) = g(r, rho) |r - rho|^{-1-2s}.

    K(r, rho) = rho^{N-1} ∫_{S^{N-1}} |r e - rho σ|^{-N-2s} dσ is the kernel of
    (-Δ)^s on radial functions in the radial variable (without the constant).
    The angular integral is a Gauss hypergeometric function; after Euler's
    transformation the diagonal singularity is explicit and what remains is
    bounded.
    """
    r = np.asarray(r, dtype=float)
    rho = np.asarray(rho, dtype=float)
    M = np.maximum(r, rho)
    m = np.minimum(r, rho)
    with np.errstate(divide="ignore", invalid="ignore"):
        x2 = np.where(M > 0, (m / M) ** 2, 0.0)
        G = hyp2f1(-s, N / 2 - 1 - s, N / 2, x2)
        out = sphere_area(N) * rho ** (N - 1) * M ** (2 + 2 * s - N) * (r + rho) ** (-1 - 2 * s) * G
    return np.where(rho > 0, out, 0.0)


def _profile(domain, s, y):
    R = domain.R
    return np.clip(R * R - np.asarray(y) ** 2, 0.0, None) ** s


def _assemble_B(domain, grid, s, N, radial):
    """Collocation coefficients B (n x n) of the v-difference part, constant excluded."""
    n, h = grid.n, grid.h
    Y = grid.boundary_nodes  # indices 0..n+1
    R = domain.R
    w_nodes = _profile(domain, s, Y)
    offsets = np.arange(-n - 1, n + 2)
    M0, M1, M2 = _moment_tables(offsets, s)
    off0 = n + 1  # index of offset 0
    near = 1.0 / (2.0 - 2.0 * s)

    # cells handled with the exact profile: the ones within _BOUNDARY_CELLS of R (and of -R)
    nb = min(_BOUNDARY_CELLS, n)
    special = list(range(n - nb + 1, n + 1))
    no = min(_ORIGIN_CELLS if radial else nb, n)
    special = list(range(0, no)) + special
    special = sorted(set(special))
    # Gauss-Jacobi nodes with (1-t)^s and t^s weights on [0,1] for cells touching ±R
    xj, wj = roots_jacobi(24, s, 0.0)
    gj_right_t, gj_right_w = 0.5 * (xj + 1), wj * 0.5 ** (1 + s)
    xj, wj = roots_jacobi(24, 0.0, s)
    gj_left_t, gj_left_w = 0.5 * (xj + 1), wj * 0.5 ** (1 + s)

    B = np.zeros((n, n))
    for i0 in range(0, n, _ROW_CHUNK):
        i1 = min(n, i0 + _ROW_CHUNK)
        rows = np.arange(i0 + 1, i1 + 1)  # 1-based node index in Y
        ri = Y[rows]
        if radial:
            g = radial_kernel_factor(N, s, ri[:, None], Y[None, :])
        else:
            g = np.ones((len(rows), n + 2))
        P = g * w_nodes[None, :]
        k = np.arange(0, n + 1)  # cells
        d = k[None, :] - rows[:, None]
        di = d + off0
        m0, m1, m2 = M0[di], M1[di], M2[di]
        cl = P[:, :-1] * (m0 - 2 * m1 + m2) + P[:, 1:] * (m1 - m2)
        cr = P[:, :-1] * (m1 - m2) + P[:, 1:] * m2
        far = (d >= 1) | (d <= -2)
        cl[~far] = 0.0
        cr[~far] = 0.0
        # exact-profile quadrature for cells near the boundary
        for c in special:
            dc = c - rows
            ok = (dc >= 1) | (dc <= -2)
            if not ok.any():
                continue
            if c == n:
                t, wq = gj_right_t, gj_right_w
                y = Y[c] + h * t
                prof = (R + y) ** s * h ** s  # (R-y)^s = h^s (1-t)^s sits in the weight
            elif c == 0 and not radial:
                t, wq = gj_left_t, gj_left_w
                y = Y[c] + h * t
                prof = (R - y) ** s * h ** s
            else:
                t, wq = _GL_T, _GL_WT
                y = Y[c] + h * t
                prof = _profile(domain, s, y)
            if radial and c < no:
                # near the origin g carries rho^{N-1}: linear interpolation is O(1) off
                gl = radial_kernel_factor(N, s, ri[:, None], y[None, :])
            else:
                gl = g[:, c:c + 1] * (1 - t) + g[:, c + 1:c + 2] * t
            kern = np.abs(dc[:, None] + t[None, :]) ** (-1.0 - 2.0 * s)
            base = gl * prof[None, :] * kern * wq[None, :]
            cl[ok, c] = (base * (1 - t)).sum(1)[ok]
            cr[ok, c] = (base * t).sum(1)[ok]
        full = np.zeros((len(rows), n + 2))
        full[:, :-1] += cl
        full[:, 1:] += cr
        # near field: second difference with the smooth weight at the neighbours
        idx = np.arange(len(rows))
        full[idx, rows + 1] += near * P[idx, rows + 1]
        full[idx, rows - 1] += near * P[idx, rows - 1]
        # v beyond the last node (and at the origin / at -R) is extrapolated as constant
        full[:, 1] += full[:, 0]
        full[:, n] += full[:, n + 1]
        Bc = full[:, 1:n + 1]
        Bc[idx, rows - 1] = 0.0
        B[i0:i1] = Bc
    B *= kernel_constant(N, s) * h ** (-2.0 * s)
    if not np.all(np.isfinite(B)):
        raise AssemblyError("non-finite kernel coefficients", )
    return B


def _finish(B, grid, s, N, domain):
    """Symmetric energy form from collocation coefficients (in place on B)."""
    n = grid.n
    m = grid.weights
    w = _profile(domain, s, grid.nodes)
    kappa = getoor_constant(N, s)
    B *= (m * w)[:, None]
    B += B.T.copy()
    B *= 0.5
    rowsum = B.sum(1)
    B *= -1.0
    B[np.diag_indices(n)] = rowsum
    B /= w[:, None]
    B /= w[None, :]
    B[np.diag_indices(n)] += kappa * m / w
    r = np.sqrt(m)
    B /= r[:, None]
    B /= r[None, :]
    # exact symmetry after roundoff
    B += B.T.copy()
    B *= 0.5
    return B


def _with_profile(A, grid, params, domain, meta):
    return DiscreteOperator(A=A, grid=grid, params=params, domain=domain, quad_meta=meta,
                            profile=_profile(domain, params.s, grid.nodes),
                            kappa=getoor_constant(params.N, params.s))


def _check_s(params):
    if not (0.0 < params.s < 1.0):
        raise DomainError(f"s in (0,1) required, got {params.s}")


def assemble_interval(params: FracParams, domain, grid: GridSpec) -> DiscreteOperator:
    """Operator on the interval (-R, R)."""
    _check_s(params)
    if params.N != 1:
        raise DomainError(f"interval operator needs N = 1, got N = {params.N}")
    if domain.kind != "interval":
        raise DomainError("assemble_interval needs an Interval domain")
    if grid.n < 8:
        raise AssemblyError(f"n >= 8 required for the quadrature, got n = {grid.n}")
    B = _assemble_B(domain, grid, params.s, 1, radial=False)
    A = _finish(B, grid, params.s, 1, domain)
    meta = {"scheme": "profile-weighted collocation", "version": QUAD_VERSION,
            "boundary_cells": _BOUNDARY_CELLS, "gauss_points": len(_GL_X)}
    return _with_profile(A, grid, params, domain, meta)


def assemble_radial(params: FracParams, domain, grid: GridSpec) -> DiscreteOperator:
    """Operator on radial functions in the ball B_R of R^N, N >= 2."""
    _check_s(params)
    if domain.kind != "radial":
        raise DomainError("assemble_radial needs a RadialBall domain")
    if params.N != domain.N:
        raise DomainError(f"params.N = {params.N} but ball dimension is {domain.N}")
    if params.N < 2:
        raise DomainError("radial operator needs N >= 2")
    params.require_sobolev()
    if grid.n < 8:
        raise AssemblyError(f"n >= 8 required for the quadrature, got n = {grid.n}")
    # the diagonal limit of the factor must reproduce the 1D constant ratio
    g_diag = radial_kernel_factor(params.N, params.s, 1.0, 1.0 - 1e-9)
    expect = np.pi ** ((params.N - 1) / 2) * gamma(0.5 + params.s) / gamma((params.N + 2 * params.s) / 2)
    if not abs(g_diag / expect - 1) < 1e-6:
        raise AssemblyError("angular kernel factor failed its diagonal check",)
    B = _assemble_B(domain, grid, params.s, params.N, radial=True)
    A = _finish(B, grid, params.s, params.N, domain)
    meta = {"scheme": "profile-weighted collocation", "version": QUAD_VERSION,
            "boundary_cells": _BOUNDARY_CELLS, "gauss_points": len(_GL_X),
            "angular": "hypergeometric closed form"}
    return _with_profile(A, grid, params, domain, meta)


def assemble(params: FracParams, domain, n: int) -> DiscreteOperator:
    """Grid + operator in one call, dispatching on the domain kind."""
    grid = make_grid(domain, n)
    if domain.kind == "interval":
        return assemble_interval(params, domain, grid)
    return assemble_radial(params, domain, grid)


def local_operator(domain, grid: GridSpec) -> DiscreteOperator:
    """Classical -u'' (the s = 1 case) on an interval grid, sparse tridiagonal."""
    if domain.kind != "interval":
        raise DomainError("local operator is only provided on intervals")
    n, h = grid.n, grid.h
    main = np.full(n, 2.0 / h ** 2)
    offd = np.full(n - 1, -1.0 / h ** 2)
    A = sp.diags([offd, main, offd], [-1, 0, 1], format="csc")
    # s is not in (0,1) here; keep the nominal order in quad_meta
    params = FracParams(1, 0.999999)
    return DiscreteOperator(A=A, grid=grid, params=params, domain=domain,
                            quad_meta={"scheme": "second difference", "order": 1.0})


# --------------------------------------------------------------------------
# field-level operations


def apply(op: DiscreteOperator, u) -> np.ndarray:
    u = _check_field(op, u)
    return op.stiffness_apply(u) / op.mass


def seminorm_sq(op: DiscreteOperator, u) -> float:
    """Discrete (C/2)∬(u(x)-u(y))^2|x-y|^{-N-2s}, i.e. ∫ u (-Δ)^s u."""
    u = _check_field(op, u)
    return float(u @ op.stiffness_apply(u))


def _lp_norm(op, u, p, weight=None):
    vals = np.abs(u) ** p * op.mass
    if weight is not None:
        vals = vals * weight
    return float(vals.sum()) ** (1.0 / p)


def sobolev_quotient(op: DiscreteOperator, u) -> float:
    u = _check_field(op, u)
    if not np.any(u):
        raise ValueError("Sobolev quotient of the zero field")
    op.params.require_sobolev()
    p = critical_exponent(op.params.N, op.params.s)
    return seminorm_sq(op, u) / _lp_norm(op, u, p) ** 2


def hardy_weight(op: DiscreteOperator, weight: str) -> np.ndarray:
    """Cell-averaged singular weight: 'boundary' d^{-2s} or 'potential' |x|^{-2s}."""
    cache_key = ("weight", weight)
    w = op._cache.get(cache_key)
    if w is None:
        s = op.params.s
        if weight == "boundary":
            w = distance_weight(op.grid, 2 * s)
        elif weight == "potential":
            w = potential_weight(op.grid, 2 * s)
        else:
            raise ValueError(f"unknown weight {weight!r}")
        if not np.all(np.isfinite(w)):
            raise ValueError(f"{weight} weight integral is not finite on this grid")
        op._cache[cache_key] = w
    return w


def hardy_quotient(op: DiscreteOperator, u, weight: str = "boundary") -> float:
    u = _check_field(op, u)
    if not np.any(u):
        raise ValueError("Hardy quotient of the zero field")
    w = hardy_weight(op, weight)
    return seminorm_sq(op, u) / float((u * u * w * op.mass).sum())


# --------------------------------------------------------------------------
# binary cache: header of little-endian 64-bit values, then row-major A

_MAGIC = b"FRACOP01"
_KINDS = {"interval": 0, "radial": 1}


def _cache_key(kind, N, s, R, n):
    tag = f"{kind}-N{N}-s{s!r}-R{R!r}-n{n}-v{QUAD_VERSION}"
    return hashlib.sha1(tag.encode()).hexdigest()[:16] + ".bin"


def save_operator(op: DiscreteOperator, path) -> Path:
    if op.is_sparse:
        raise ValueError("only dense fractional operators are cached")
    path = Path(path)
    dom = op.domain
    header = struct.pack("<8sqqddqq", _MAGIC, _KINDS[dom.kind], op.params.N,
                         op.params.s, dom.R, op.n, QUAD_VERSION)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(op.A, dtype="<f8").tobytes())
    os.replace(tmp, path)
    return path


def load_operator(path) -> DiscreteOperator:
    from .grids import Interval, RadialBall

    path = Path(path)
    size = struct.calcsize("<8sqqddqq")
    with open(path, "rb") as fh:
        magic, kind, N, s, R, n, version = struct.unpack("<8sqqddqq", fh.read(size))
        if magic != _MAGIC:
            raise ValueError(f"{path} is not an operator cache file")
        if version != QUAD_VERSION:
            raise ValueError(f"{path} was written by quadrature version {version}")
        A = np.frombuffer(fh.read(8 * n * n), dtype="<f8").reshape(n, n).copy()
    dom = Interval(R) if kind == 0 else RadialBall(int(N), R)
    grid = make_grid(dom, n)
    meta = {"scheme": "profile-weighted collocation", "version": int(version),
            "boundary_cells": _BOUNDARY_CELLS, "gauss_points": len(_GL_X), "cached": True}
    return _with_profile(A, grid, FracParams(int(N), s), dom, meta)


def cached_assemble(params: FracParams, domain, n: int, cache_dir=None) -> DiscreteOperator:
    """:func:`assemble`, reading/writing the binary cache when a directory is given.

    The directory defaults to ``$FRACLAB_CACHE``; with neither set this is
    plain assembly.
    """
    cache_dir = cache_dir or os.environ.get("FRACLAB_CACHE")
    if not cache_dir:
        return assemble(params, domain, n)
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    path = cache_dir / _cache_key(domain.kind, params.N, params.s, domain.R, n)
    if path.exists():
        op = load_operator(path)
        return _with_profile(op.A, op.grid, params, op.domain, op.quad_meta)
    op = assemble(params, domain, n)
    save_operator(op, path)
    return op
