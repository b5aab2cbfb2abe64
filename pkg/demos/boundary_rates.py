"""Boundary behaviour of A phi = d^{-beta} on an interval.

Below beta = s the solution looks like the torsion function near the
boundary; above it the datum wins and phi ~ d^{2s - beta}.  We fit the
exponent on a window away from the discretization layer.

The window reaches d = 0.2, where the next term of the expansion still
matters, so the fitted slopes sit below the limiting ones.  The ratio to
the torsion function is the cleaner test for small beta: it stays bounded.
"""
import numpy as np

from fraclab import FracParams, Interval, assemble, auxiliary, fit_boundary_exponent, torsion

s = 0.75
for n in (511, 2047):
    op = assemble(FracParams(1, s), Interval(1.0), n)
    rho = torsion(op)
    print(f"n = {n}")
    for beta in (0.2, 0.5, 1.0, 1.4):
        phi = auxiliary(op, beta)
        fit = fit_boundary_exponent(phi, op.grid)
        limit = s if beta < s else 2 * s - beta
        ratio = phi / rho
        print(f"  beta = {beta:.2f}  fitted {fit.exponent:+.3f}  limit {limit:+.3f}  "
              f"phi/rho in [{ratio.min():.3g}, {ratio.max():.3g}]")
