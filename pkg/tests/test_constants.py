import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gamma

from fraclab import DomainError, FracParams, constants, critical_exponent
from fraclab.constants import getoor_constant, kernel_constant, sphere_area
from oracles import fourier_constant


def test_a_ns_half_order_line():
    # |Γ(-1/2)| = 2 sqrt(pi), Γ(1) = 1: a = 2^0 pi^{-1/2} / (2 sqrt(pi)) = 1/(2 pi)
    assert constants(FracParams(1, 0.5)).a_Ns == pytest.approx(1 / (2 * math.pi), rel=1e-14)


def test_k_ns_half():
    assert constants(FracParams(1, 0.5)).K_Ns == pytest.approx(1 / math.pi, rel=1e-14)


def test_k_ns_three_quarters():
    assert constants(FracParams(1, 0.75)).K_Ns == pytest.approx(0.26151, abs=1e-5)


def test_lambda_classical_limit():
    # s -> 1 in N = 4 recovers (N-2)^2/4 = 1
    lam = constants(FracParams(4, 1 - 1e-9)).Lambda_Ns
    assert lam == pytest.approx(1.0, abs=1e-6)


def test_lambda_half_order_three_d():
    # 2 Γ(1)^2 / Γ(1/2)^2 = 2/pi
    assert constants(FracParams(3, 0.5)).Lambda_Ns == pytest.approx(2 / math.pi, rel=1e-14)


def test_two_star():
    assert constants(FracParams(3, 0.75)).two_star_s == 4.0
    assert critical_exponent(3, 0.75) == 4.0


def test_kernel_is_fourier_constant():
    for N in (1, 2, 3):
        for s in (0.1, 0.5, 0.9):
            assert kernel_constant(N, s) == pytest.approx(fourier_constant(N, s), rel=1e-13)


def test_kernel_is_twice_a_ns():
    c = constants(FracParams(3, 0.3))
    assert c.kernel == pytest.approx(2 * c.a_Ns, rel=1e-14)


def test_getoor_half_line():
    # 2 Γ(3/2) Γ(1) / Γ(1/2) = 1
    assert getoor_constant(1, 0.5) == pytest.approx(1.0, rel=1e-14)


def test_sphere_area():
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(1) == pytest.approx(2.0)


def test_domain_errors():
    with pytest.raises(DomainError, match=r"s in \(0,1\)"):
        FracParams(1, 1.2)
    with pytest.raises(DomainError, match=r"s in \(0,1\)"):
        FracParams(1, 0.0)
    with pytest.raises(DomainError, match="N must be an integer"):
        FracParams(0, 0.5)
    with pytest.raises(DomainError, match="sigma"):
        FracParams(1, 0.5, sigma=-1)
    with pytest.raises(DomainError, match="N > 2s"):
        critical_exponent(1, 0.75)
    with pytest.raises(DomainError, match="N > 2s"):
        FracParams(1, 0.6).require_sobolev()


def test_lambda_undefined_below_sobolev_range():
    c = constants(FracParams(1, 0.75))
    assert math.isnan(c.Lambda_Ns) and c.two_star_s == math.inf


def test_critical_params():
    p = FracParams(3, 0.75).critical()
    assert p.q == pytest.approx(3.0)


@settings(max_examples=60, deadline=None)
@given(N=st.integers(1, 6), s=st.floats(0.01, 0.99))
def test_constants_positive(N, s):
    c = constants(FracParams(N, s))
    assert c.a_Ns > 0 and c.K_Ns > 0 and c.kernel > 0
    if N > 2 * s:
        assert c.Lambda_Ns > 0 and c.two_star_s > 2


@settings(max_examples=40, deadline=None)
@given(s=st.floats(0.01, 0.99))
def test_a_ns_formula(s):
    a = constants(FracParams(2, s)).a_Ns
    expected = 2 ** (2 * s - 1) / math.pi * gamma(1 + s) / abs(gamma(-s))
    assert a == pytest.approx(expected, rel=1e-12)
