"""Independent reference values used by the tests.

Nothing here imports the package: the formulas are classical closed forms
for the fractional Laplacian on balls, evaluated with scipy.
"""
import numpy as np
from scipy.integrate import quad
from scipy.special import beta as B, betainc, gamma as G, hyp2f1


def fourier_constant(N, s):
    """C_{N,s} in the form s 4^s Γ(N/2+s) / (π^{N/2} Γ(1-s))."""
    return s * 4 ** s * G(N / 2 + s) / (np.pi ** (N / 2) * G(1 - s))


def power_image(r, N, s, p):
    """(-Δ)^s (1-|x|^2)_+^p on the unit ball (p > -1), a hypergeometric closed form."""
    return (4 ** s * G(p + 1) * G(N / 2 + s) / (G(p + 1 - s) * G(N / 2))
            * hyp2f1(s + N / 2, s - p, N / 2, np.asarray(r) ** 2))


def ball_integral(N, p):
    """∫_{B_1} (1-|x|^2)^p dx."""
    area = 2 * np.pi ** (N / 2) / G(N / 2)
    return area * 0.5 * B(N / 2, p + 1)


def green(x, y, s, N=1):
    """Green function of (-Δ)^s on the unit ball (distance and radii enter only
    through |x-y| and the product (1-|x|^2)(1-|y|^2))."""
    k = G(N / 2) / (2 ** (2 * s) * np.pi ** (N / 2) * G(s) ** 2)
    r0 = (1 - x * x) * (1 - y * y) / (x - y) ** 2
    if r0 < 1:
        I = r0 ** s / s * hyp2f1(N / 2, s, s + 1, -r0)
    elif s < N / 2:
        I = B(s, N / 2 - s) * betainc(s, N / 2 - s, r0 / (1 + r0))
    else:
        I = quad(lambda t: t ** (s - 1) * (1 + t) ** (-N / 2), 0, r0, limit=200)[0]
    return k * abs(x - y) ** (2 * s - N) * I


def interval_solution(x, s, f):
    """u(x) = ∫ G(x,y) f(y) dy on (-1, 1)."""
    g = lambda y: green(x, y, s) * f(y)
    pts = sorted({-1.0, float(x), 1.0})
    return sum(quad(g, a, b, limit=400)[0] for a, b in zip(pts, pts[1:]))
