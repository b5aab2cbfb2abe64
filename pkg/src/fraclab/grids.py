"""Domains, uniform grids and cell-integrated weights.

Interval grids place ``n`` nodes at ``-R + j h`` with ``h = 2R/(n+1)``; radial
grids place them at ``r_j = j h`` with ``h = R/(n+1)``.  Every node owns the
cell ``[x - h/2, x + h/2]`` (the first radial cell is widened down to the
origin).  The half-cells touching the boundary belong to no node: fields vanish
there and singular weights would not be integrable on them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .constants import sphere_area
from .errors import DomainError

__all__ = ["Interval", "RadialBall", "GridSpec", "make_grid", "cell_integral",
           "distance_weight", "potential_weight", "load_average"]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


@dataclass(frozen=True)
class Interval:
    R: float = 1.0
    N: int = 1
    kind: str = field(default="interval", init=False)

    def __post_init__(self):
        if not self.R > 0:
            raise DomainError(f"R > 0 required, got {self.R!r}")

    def distance(self, x):
        return self.R - np.abs(np.asarray(x, dtype=float))

    @property
    def diameter(self):
        return 2.0 * self.R


@dataclass(frozen=True)
class RadialBall:
    N: int = 3
    R: float = 1.0
    kind: str = field(default="radial", init=False)

    def __post_init__(self):
        if not self.R > 0:
            raise DomainError(f"R > 0 required, got {self.R!r}")
        if int(self.N) != self.N or self.N < 2:
            raise DomainError(f"radial ball needs integer N >= 2, got {self.N!r}")

    def distance(self, r):
        return self.R - np.abs(np.asarray(r, dtype=float))

    @property
    def diameter(self):
        return 2.0 * self.R


@dataclass(frozen=True, eq=False)
class GridSpec:
    n: int
    h: float
    nodes: np.ndarray
    edges: np.ndarray  # (n, 2) cell endpoints
    volumes: np.ndarray
    domain: object

    @property
    def distance(self):
        return self.domain.distance(self.nodes)

    @property
    def weights(self):
        """Nodal masses of the hat basis: h on an interval; on a ball
        |S^{N-1}| ∫ hat_i(r) r^{N-1} dr, with the first hat held at 1 down to r = 0."""
        if self.domain.kind == "interval":
            return self.volumes
        N, h, r = self.domain.N, self.h, self.nodes
        t, wt = 0.5 * (_GL_X + 1.0), 0.5 * _GL_W
        left = ((r[:, None] - h * t[None, :]) ** (N - 1) * (1 - t) * wt).sum(1) * h
        right = ((r[:, None] + h * t[None, :]) ** (N - 1) * (1 - t) * wt).sum(1) * h
        left[0] = h ** N / N
        return sphere_area(N) * (left + right)

    @property
    def boundary_nodes(self):
        """Node coordinates extended by the two points where fields are not unknowns
        (interval: -R and R; radial: 0 and R)."""
        lo = -self.domain.R if self.domain.kind == "interval" else 0.0
        return np.concatenate([[lo], self.nodes, [self.domain.R]])


def make_grid(domain, n: int) -> GridSpec:
    n = int(n)
    if n < 2:
        raise DomainError(f"grid needs n >= 2 nodes, got {n}")
    R = domain.R
    if domain.kind == "interval":
        h = 2.0 * R / (n + 1)
        nodes = -R + h * np.arange(1, n + 1)
        edges = np.stack([nodes - h / 2, nodes + h / 2], axis=1)
        volumes = np.full(n, h)
    else:
        h = R / (n + 1)
        nodes = h * np.arange(1, n + 1)
        edges = np.stack([nodes - h / 2, nodes + h / 2], axis=1)
        edges[0, 0] = 0.0
        N = domain.N
        volumes = sphere_area(N) * (edges[:, 1] ** N - edges[:, 0] ** N) / N
    return GridSpec(n=n, h=h, nodes=nodes, edges=edges, volumes=volumes, domain=domain)


def cell_integral(grid: GridSpec, fn) -> np.ndarray:
    """∫_cell fn(x) dV for every cell, 24-point Gauss-Legendre per cell.

    ``fn`` must be smooth on each closed cell; cells never touch the boundary,
    so boundary-distance weights qualify.
    """
    a, b = grid.edges[:, 0:1], grid.edges[:, 1:2]
    x = 0.5 * (a + b) + 0.5 * (b - a) * _GL_X
    vals = fn(x) * (0.5 * (b - a)) * _GL_W
    if grid.domain.kind == "radial":
        vals = vals * sphere_area(grid.domain.N) * x ** (grid.domain.N - 1)
    return vals.sum(axis=1)


def distance_weight(grid: GridSpec, power: float, shift: float = 0.0) -> np.ndarray:
    """Cell averages of (d + shift)^{-power}."""
    dom = grid.domain
    if grid.domain.kind == "interval" and grid.n % 2 == 1:
        # the middle cell straddles the kink of d at 0; split it
        vals = cell_integral(grid, lambda x: (dom.distance(x) + shift) ** (-power))
        mid = grid.n // 2
        a, b = grid.edges[mid]
        half = 0.5 * (b - a)
        t = 0.5 * half * (_GL_X + 1)
        f = (dom.R - t + shift) ** (-power)
        vals[mid] = 2 * (f * 0.5 * half * _GL_W).sum()
    else:
        vals = cell_integral(grid, lambda x: (dom.distance(x) + shift) ** (-power))
    return vals / grid.volumes


def potential_weight(grid: GridSpec, power: float) -> np.ndarray:
    """Cell averages of |x|^{-power}, integrated in closed form."""
    a, b = grid.edges[:, 0], grid.edges[:, 1]
    dom = grid.domain
    if dom.kind == "radial":
        e = dom.N - power
        if e <= 0:
            raise DomainError(f"|x|^-{power} is not integrable near 0 in dimension {dom.N}")
        vals = sphere_area(dom.N) * (b ** e - a ** e) / e
    else:
        e = 1.0 - power
        if e <= 0:
            raise DomainError(f"|x|^-{power} is not integrable near 0 in dimension 1")
        F = lambda x: np.sign(x) * np.abs(x) ** e / e
        vals = F(b) - F(a)
    return vals / grid.volumes



def load_average(grid: GridSpec, power: float, shift: float = 0.0, s: float = None):
    """Profile-weighted cell averages of (d + shift)^{-power}, used for right-hand sides.

    The weight is the Getoor profile w = (R^2 - |x|^2)^s, which is how the
    discrete Green function decays at the boundary, and the two end cells
    are extended to the boundary so the half-cells that own no node are not
    dropped.  With power 0 every entry is exactly 1.  For shift = 0 the
    integrals are finite whenever power < s + 1.
    """
    if s is None:
        raise ValueError("load_average needs the order s of the profile weight")
    dom = grid.domain
    R = dom.R
    radial = dom.kind == "radial"
    N = dom.N if radial else 1

    def f(x):
        return (R - np.abs(x) + shift) ** (-power)

    def meas(x):
        return x ** (N - 1) if radial else np.ones_like(x)

    def prof(x):
        return np.clip(R * R - x * x, 0.0, None) ** s * meas(x)

    a, b = grid.edges[:, 0], grid.edges[:, 1]
    x = 0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * _GL_X
    wq = 0.5 * (b - a)[:, None] * _GL_W
    num = (prof(x) * f(x) * wq).sum(1)
    den = (prof(x) * wq).sum(1)
    if not radial and grid.n % 2 == 1:
        # middle cell straddles the kink of d at 0: integrate the right half, double it
        j = grid.n // 2
        t = 0.5 * b[j] * (_GL_X + 1)
        wt = 0.5 * b[j] * _GL_W
        num[j] = 2 * (prof(t) * f(t) * wt).sum()
        den[j] = 2 * (prof(t) * wt).sum()
    # end cells reach the boundary: integrate in the distance t to it, with t^s
    # (and t^{-power} when unshifted) carried by the quadrature weight
    ends = [grid.n - 1] if radial else [0, grid.n - 1]
    for j in ends:
        L = R - a[j] if j == grid.n - 1 else b[j] + R

        def smooth(t):
            return (2 * R - t) ** s * ((R - t) ** (N - 1) if radial else 1.0)

        den[j] = quad(smooth, 0, L, weight="alg", wvar=(s, 0), epsabs=0, epsrel=1e-13)[0]
        if shift == 0.0:
            num[j] = quad(smooth, 0, L, weight="alg", wvar=(s - power, 0),
                          epsabs=0, epsrel=1e-13)[0]
            continue
        g = lambda t: smooth(t) * (t + shift) ** (-power)
        cuts = [0.0] + [shift * 10.0 ** k for k in range(4) if shift * 10.0 ** k < L] + [L]
        total = quad(g, 0, cuts[1], weight="alg", wvar=(s, 0), epsabs=0, epsrel=1e-13)[0]
        for lo, hi in zip(cuts[1:], cuts[2:]):
            total += quad(lambda t: t ** s * g(t), lo, hi, epsabs=0, epsrel=1e-13)[0]
        num[j] = total
    return num / den

