"""The critical quotient S(R) on radial balls and its scaling in R.

With weight (R - r)^{-2s} and the critical exponent, S(R) scales like
R^{4s/2*}.  Comparing two radii on grids with the same spacing keeps the
discretization error the same on both.
"""
from fraclab import FracParams, RadialBall, assemble, critical_SR, scaling_check
from fraclab.constants import critical_exponent

N, s = 3, 0.5
h = 1.0 / 200
reps = []
for R in (1.0, 2.0):
    n = int(round(R / h)) - 1
    rep = critical_SR(assemble(FracParams(N, s), RadialBall(N, R), n))
    reps.append(rep)
    print(f"R = {R}: n = {n}, S(R) = {rep.S_R:.5f}, EL residual {rep.el_residual:.1e}")
print(f"predicted ratio {(2.0) ** (4 * s / critical_exponent(N, s)):.5f}, "
      f"observed {reps[1].S_R / reps[0].S_R:.5f}, "
      f"relative error {scaling_check(reps[0], reps[1], s, N):.4f}")
