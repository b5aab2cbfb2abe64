"""Torsion function and principal eigenvalue of the half Laplacian on (-1, 1).

The torsion function of (-Δ)^s on the unit ball is a multiple of the
profile (1 - |x|^2)^s, and the discrete operator reproduces it to roundoff.
The principal eigenvalue converges at a lower rate, so we refine and
extrapolate.
"""
import numpy as np

from fraclab import FracParams, Interval, assemble, principal_eigenpair, richardson, torsion
from fraclab.constants import getoor_constant

s = 0.5
op = assemble(FracParams(1, s), Interval(1.0), 511)
x = op.grid.nodes
exact = (1 - x * x) ** s / getoor_constant(1, s)
print(f"torsion: max |rho - exact| = {np.abs(torsion(op) - exact).max():.2e}")

# eigenvalue on three nested grids, then Richardson
lams = []
for n in (255, 511, 1023):
    lam = principal_eigenpair(assemble(FracParams(1, s), Interval(1.0), n)).lambda1
    lams.append(lam)
    print(f"n = {n:5d}  lambda1 = {lam:.8f}")
ext = richardson(*lams)
print(f"extrapolated lambda1 = {ext.value:.6f} (observed order {ext.order:.2f})")
