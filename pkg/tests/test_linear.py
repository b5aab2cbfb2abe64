import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import ball_op, interval_op
from fraclab import (ConvergenceError, DomainError, FracParams, Interval, apply, assemble,
                     auxiliary, principal_eigenpair, richardson, solve_linear, torsion)
from fraclab import linear
from fraclab.analysis import fit_boundary_exponent
from fraclab.constants import getoor_constant
from fraclab.operators import local_operator
from fraclab.grids import make_grid
from oracles import interval_solution

pytestmark = pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")


def test_solve_residual_and_shape():
    op = interval_op(0.5, 256)
    rhs = np.cos(op.grid.nodes)
    u = solve_linear(op, rhs)
    assert np.abs(apply(op, u) - rhs).max() <= 1e-10 * np.abs(rhs).max()
    assert np.all(solve_linear(op, np.zeros(op.n)) == 0)
    with pytest.raises(ValueError):
        solve_linear(op, np.ones(op.n + 1))


def test_local_operator_solve():
    dom = Interval(1.0)
    op = local_operator(dom, make_grid(dom, 20001))
    u = solve_linear(op, np.ones(op.n))
    x = op.grid.nodes
    # -u'' = 1 has the exact parabola, which the 3-point stencil reproduces
    assert np.abs(u - (1 - x * x) / 2).max() < 1e-6


@pytest.mark.parametrize("N,s", [(1, 0.25), (1, 0.75), (3, 0.5)])
def test_torsion_matches_getoor(N, s):
    op = interval_op(s, 512) if N == 1 else ball_op(N, s, 512)
    r = np.abs(op.grid.nodes)
    exact = (1 - r * r) ** s / getoor_constant(N, s)
    rho = torsion(op)
    assert np.abs(rho - exact).max() < 1e-9 * exact.max()
    rho[0] = -1.0
    assert torsion(op)[0] > 0  # cached copy is not aliased


def test_torsion_vs_green_oracle():
    op = interval_op(0.4, 256)
    rho = torsion(op)
    for j in (20, 80, 128, 200):
        x = op.grid.nodes[j]
        assert rho[j] == pytest.approx(interval_solution(x, 0.4, lambda y: 1.0), rel=1e-6)


@pytest.mark.parametrize("s,beta", [(0.5, 0.5), (0.75, 1.2), (0.3, 0.2)])
def test_auxiliary_vs_green_oracle(s, beta):
    errs = []
    for n in (128, 512):
        op = interval_op(s, n)
        phi = auxiliary(op, beta)
        x = op.grid.nodes
        idx = [int(np.argmin(np.abs(x - t))) for t in (-0.6, 0.0, 0.3, 0.8)]
        ref = np.array([interval_solution(x[j], s, lambda y: (1 - abs(y)) ** -beta) for j in idx])
        errs.append(np.abs(phi[idx] / ref - 1).max())
    assert errs[1] < errs[0]
    assert errs[1] < 0.02


def test_auxiliary_boundary_exponents():
    s = 0.5
    op = interval_op(s, 2047)
    rho = torsion(op)
    # below beta = s the solution is comparable to the torsion function
    for b in (0.1, 0.3):
        ratio = auxiliary(op, b) / rho
        assert ratio.max() / ratio.min() < 2.0
    assert fit_boundary_exponent(auxiliary(op, 0.1), op.grid).exponent == pytest.approx(s, abs=0.05)
    # above it the boundary rate is d^{2s - beta}
    assert fit_boundary_exponent(auxiliary(op, 1.2), op.grid).exponent == pytest.approx(
        2 * s - 1.2, abs=0.05)


def test_auxiliary_beta_range():
    op = interval_op(0.5, 64)
    for beta in (0.0, 1.5, -0.1):
        with pytest.raises(DomainError):
            auxiliary(op, beta)


def test_eigenpair_properties():
    op = interval_op(0.5, 256)
    eig = principal_eigenpair(op)
    assert np.all(eig.phi1 > 0) and eig.phi1.max() == pytest.approx(1.0)
    assert np.abs(apply(op, eig.phi1) - eig.lambda1 * eig.phi1).max() <= 1e-9 * eig.lambda1
    assert principal_eigenpair(op) is eig
    # Rayleigh quotient of anything else is larger
    u = 1 - op.grid.nodes ** 2
    assert float(u @ (op.mass * apply(op, u))) / float(u @ (op.mass * u)) > eig.lambda1


def test_eigenvalue_half_laplacian_interval():
    vals = [principal_eigenpair(assemble(FracParams(1, 0.5), Interval(1.0), n)).lambda1
            for n in (255, 511, 1023)]
    ext = richardson(*vals)
    assert not ext.degenerate
    # classical value for the half Laplacian on (-1, 1)
    assert ext.value == pytest.approx(1.1577738, abs=2e-4)


def test_eigenvalue_bounds_by_torsion():
    # 1/max rho <= lambda1 by the maximum principle
    for op in (interval_op(0.3, 256), ball_op(3, 0.75, 256)):
        assert principal_eigenpair(op).lambda1 >= 1.0 / torsion(op).max() * (1 - 1e-12)


def test_hardy_constant_structure():
    op = interval_op(0.75, 256)
    est = linear.hardy_constant(op, refine=(64, 128))
    assert [n for n, _ in est.refinement_trace] == [64, 128, 256]
    assert est.constant > 0 and np.all(est.minimizer > 0)
    assert not est.regime_warning


def test_hardy_constant_low_order_warns():
    op = interval_op(0.3, 64)
    with pytest.warns(UserWarning):
        est = linear.hardy_constant(op)
    assert est.regime_warning


def test_weak_residual_small_for_solution():
    op = interval_op(0.5, 256)
    rho = torsion(op)
    assert linear.weak_residual(op, rho, np.ones(op.n)) < 1e-9
    worst, vals = linear.weak_residual(op, rho, lambda x: 1.0, detail=True)
    assert worst == max(vals.values()) and len(vals) == 6
    assert linear.weak_residual(op, rho, 2 * np.ones(op.n)) > 0.1


def test_battery_is_fixed():
    op = ball_op(3, 0.5, 128)
    names = [name for name, _ in linear.test_battery(op)]
    assert names == ["bump@+0.0R", "bump@+0.4R", "bump@+0.7R", "quartic", "torsion", "phi1"]
    assert linear.BATTERY_VERSION == 1


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_maximum_principle(seed):
    op = interval_op(0.75, 128)
    f = np.abs(np.random.default_rng(seed).normal(size=op.n))
    assert solve_linear(op, f).min() >= -1e-12


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_comparison_radial(seed):
    op = ball_op(3, 0.5, 128)
    rng = np.random.default_rng(seed)
    f = rng.random(op.n)
    g = f + rng.random(op.n)
    assert np.all(solve_linear(op, g) >= solve_linear(op, f) - 1e-12)
