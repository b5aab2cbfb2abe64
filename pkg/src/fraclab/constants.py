"""Problem parameters and the closed-form constants attached to them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from scipy.special import gamma

from .errors import DomainError

__all__ = [
    "FracParams",
    "FracConstants",
    "constants",
    "kernel_constant",
    "getoor_constant",
    "critical_exponent",
    "sphere_area",
]


@dataclass(frozen=True)
class FracParams:
    """Dimension, order and the optional exponents of one experiment.

    ``q`` is the power in ``u^q / d^{2s}``; ``sigma``/``alpha`` belong to the
    singular problem ``f / (u^sigma d^alpha)``; ``beta`` is the power of the
    auxiliary right-hand side ``d^{-beta}``.
    """

    N: int
    s: float
    q: Optional[float] = None
    sigma: Optional[float] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"N must be an integer >= 1, got {self.N!r}")
        if not (0.0 < self.s < 1.0):
            raise DomainError(f"s in (0,1) required, got s={self.s!r}")
        if self.sigma is not None and self.sigma < 0:
            raise DomainError(f"sigma >= 0 required, got {self.sigma!r}")
        if self.alpha is not None and self.alpha < 0:
            raise DomainError(f"alpha >= 0 required, got {self.alpha!r}")

    @property
    def sobolev_ok(self) -> bool:
        return self.N > 2 * self.s

    def require_sobolev(self):
        if not self.sobolev_ok:
            raise DomainError(f"N > 2s required, got N={self.N}, s={self.s}")

    def critical(self) -> "FracParams":
        """Same parameters with q set to the critical power 2*_s - 1."""
        self.require_sobolev()
        return FracParams(self.N, self.s, critical_exponent(self.N, self.s) - 1.0,
                          self.sigma, self.alpha, self.beta)


@dataclass(frozen=True)
class FracConstants:
    a_Ns: float
    K_Ns: float
    Lambda_Ns: float
    two_star_s: float
    kernel: float

    def as_dict(self):
        return {
            "a_Ns": self.a_Ns,
            "K_Ns": self.K_Ns,
            "Lambda_Ns": self.Lambda_Ns,
            "two_star_s": self.two_star_s,
            "kernel": self.kernel,
        }


def sphere_area(N: int) -> float:
    """Surface measure of the unit sphere S^{N-1} in R^N."""
    return 2.0 * math.pi ** (N / 2) / gamma(N / 2)


def critical_exponent(N: int, s: float) -> float:
    if not N > 2 * s:
        raise DomainError(f"N > 2s required, got N={N}, s={s}")
    return 2.0 * N / (N - 2.0 * s)


def kernel_constant(N: int, s: float) -> float:
    """Constant C with (-Δ)^s u = C P.V.∫(u(x)-u(y))|x-y|^{-N-2s} dy.

    This is the constant that makes the Fourier symbol exactly |ξ|^{2s};
    it is twice the ``a_Ns`` normalization returned by :func:`constants`.
    """
    return 4.0 ** s * gamma(N / 2 + s) / (math.pi ** (N / 2) * abs(gamma(-s)))


def getoor_constant(N: int, s: float) -> float:
    """(-Δ)^s (R^2-|x|^2)_+^s, constant on the ball and independent of R."""
    return 4.0 ** s * gamma(1 + s) * gamma(N / 2 + s) / gamma(N / 2)


def constants(params: FracParams) -> FracConstants:
    N, s = params.N, params.s
    a = 2.0 ** (2 * s - 1) * math.pi ** (-N / 2) * gamma((N + 2 * s) / 2) / abs(gamma(-s))
    K = gamma(s + 0.5) ** 2 / math.pi
    if N > 2 * s:
        lam = 2.0 ** (2 * s) * gamma((N + 2 * s) / 4) ** 2 / gamma((N - 2 * s) / 4) ** 2
        two_star = critical_exponent(N, s)
    else:
        # Hardy-potential constant and Sobolev exponent undefined for N <= 2s
        lam = math.nan
        two_star = math.inf
    return FracConstants(a_Ns=a, K_Ns=K, Lambda_Ns=lam, two_star_s=two_star,
                         kernel=kernel_constant(N, s))
