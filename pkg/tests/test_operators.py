import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import beta as Bfun

from conftest import ball_op, interval_op
from fraclab import (AssemblyError, FracParams, Interval, RadialBall, apply, assemble,
                     hardy_quotient, seminorm_sq, sobolev_quotient, torsion)
from fraclab.constants import constants, getoor_constant
from fraclab.grids import make_grid
from fraclab.linear import hardy_constant
from fraclab.operators import (QUAD_VERSION, assemble_interval, cached_assemble,
                               load_operator, save_operator)
from oracles import ball_integral, fourier_constant, power_image


def test_symmetric_pd_small():
    op = assemble(FracParams(1, 0.25), Interval(1.0), 64)
    A = op.A
    assert np.abs(A - A.T).max() <= 1e-12 * np.abs(A).max()
    assert np.linalg.eigvalsh(A)[0] > 0


def test_z_matrix_structure():
    # nonpositive off-diagonal entries: the discrete maximum principle
    for op in (interval_op(0.5, 128), ball_op(3, 0.75, 128)):
        off = op.A - np.diag(np.diag(op.A))
        assert off.max() <= 0.0


def test_ones_at_center_half_order():
    # A 1 at x = 0 is the exterior tail C ∫_{|y|>1} |y|^{-2} dy = 2 C with C = 1/pi
    op = interval_op(0.5, 1023)
    v = apply(op, np.ones(op.n))
    assert v[op.n // 2] == pytest.approx(2 * fourier_constant(1, 0.5), rel=1e-3)


def test_ones_nonnegative_radial():
    op = ball_op(3, 0.75, 256)
    assert np.all(apply(op, np.ones(op.n)) > 0)


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_getoor_profile_interval(s):
    op = interval_op(s, 1024)
    x = op.grid.nodes
    v = apply(op, (1 - x * x) ** s)
    inner = op.grid.distance >= 10 * op.grid.h
    assert np.abs(v[inner] / getoor_constant(1, s) - 1).max() < 1e-10


def test_getoor_profile_radial():
    op = ball_op(3, 0.75, 256)
    r = op.grid.nodes
    v = apply(op, (1 - r * r) ** 0.75)
    assert np.allclose(v, getoor_constant(3, 0.75), rtol=1e-10)


@pytest.mark.parametrize("N,s,p", [(1, 0.3, 1.3), (1, 0.75, 2.0), (1, 0.5, 1.0),
                                   (3, 0.3, 2.3), (3, 0.75, 1.75), (3, 0.75, 1.0),
                                   (2, 0.5, 2.0)])
def test_power_profiles_converge(N, s, p):
    # functions not of the form profile * smooth as well as ones that are
    errs = []
    for n in (256, 1024):
        op = interval_op(s, n) if N == 1 else ball_op(N, s, n)
        r = np.abs(op.grid.nodes)
        v = apply(op, (1 - r * r) ** p)
        ref = power_image(r, N, s, p)
        inner = op.grid.distance >= 0.1
        errs.append(np.abs(v[inner] - ref[inner]).max() / np.abs(ref).max())
    assert errs[1] < errs[0]
    assert errs[1] < 5e-3


def test_linearity_and_zero():
    op = interval_op(0.5, 128)
    rng = np.random.default_rng(1)
    u, v = rng.normal(size=(2, op.n))
    assert np.all(apply(op, np.zeros(op.n)) == 0)
    lhs = apply(op, u + v)
    rhs = apply(op, u) + apply(op, v)
    assert np.abs(lhs - rhs).max() <= 1e-12 * np.abs(lhs).max()


def test_length_mismatch():
    op = interval_op(0.5, 128)
    with pytest.raises(ValueError, match="shape"):
        apply(op, np.ones(5))


def test_seminorm_basic():
    op = interval_op(0.5, 128)
    u = np.sin(np.linspace(0, 3, op.n)) + 0.3
    assert seminorm_sq(op, np.zeros(op.n)) == 0
    assert seminorm_sq(op, 2 * u) == pytest.approx(4 * seminorm_sq(op, u), rel=1e-14)
    assert seminorm_sq(op, u) == pytest.approx(float(u @ (apply(op, u) * op.mass)), rel=1e-12)


@pytest.mark.parametrize("N", [1, 3])
def test_seminorm_torsion_identity(N):
    op = interval_op(0.3, 256) if N == 1 else ball_op(3, 0.3, 256)
    rho = torsion(op)
    assert seminorm_sq(op, rho) == pytest.approx(float((rho * op.mass).sum()), rel=1e-10)


@pytest.mark.parametrize("N,s", [(1, 0.3), (1, 0.75), (3, 0.5)])
def test_seminorm_continuum_energy(N, s):
    # energy of the Getoor profile: kappa ∫ (1-|x|^2)^s
    exact = getoor_constant(N, s) * ball_integral(N, s)
    errs = []
    for n in (32, 64):
        op = assemble(FracParams(N, s), Interval(1.0) if N == 1 else RadialBall(N, 1.0), n)
        r = op.grid.nodes
        errs.append(abs(seminorm_sq(op, (1 - r * r) ** s) / exact - 1))
    assert errs[1] < errs[0] < 0.1


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_quadratic_form_positive(seed):
    op = ball_op(3, 0.75, 128)
    u = np.random.default_rng(seed).normal(size=op.n)
    assert seminorm_sq(op, u) > 0
    assert sobolev_quotient(op, u) > 0


def test_self_adjoint():
    op = interval_op(0.75, 256)
    rng = np.random.default_rng(2)
    u, v = rng.normal(size=(2, op.n))
    a = float((op.mass * v * apply(op, u)).sum())
    b = float((op.mass * u * apply(op, v)).sum())
    assert a == pytest.approx(b, rel=1e-12)


def test_sobolev_quotient_homogeneous_and_refined():
    vals = []
    for n in (256, 512):
        op = ball_op(3, 0.75, n)
        r = op.grid.nodes
        w = (1 - r * r) ** 0.75
        assert sobolev_quotient(op, 3.7 * w) == pytest.approx(sobolev_quotient(op, w), rel=1e-12)
        vals.append(sobolev_quotient(op, w))
    assert abs(vals[1] / vals[0] - 1) < 0.02


def test_sobolev_quotient_errors():
    op = interval_op(0.75, 64)
    with pytest.raises(ValueError):
        sobolev_quotient(op, np.zeros(op.n))
    with pytest.raises(Exception, match="N > 2s"):
        sobolev_quotient(op, np.ones(op.n))


def test_hardy_quotient_potential_floor():
    op = ball_op(3, 0.75, 512)
    lam = constants(op.params).Lambda_Ns
    rng = np.random.default_rng(3)
    r = op.grid.nodes
    for _ in range(10):
        u = (1 - r * r) ** 0.75 * np.polyval(rng.normal(size=4), r) * np.exp(-(r / 0.05) ** 2)
        q = hardy_quotient(op, u, "potential")
        assert q >= 0.9 * lam
        assert hardy_quotient(op, -2 * u, "potential") == pytest.approx(q, rel=1e-12)


def test_hardy_quotient_boundary_minimum():
    op = interval_op(0.75, 512)
    c = hardy_constant(op).constant
    rng = np.random.default_rng(4)
    qs = [hardy_quotient(op, rng.normal(size=op.n) * (1 + 0 * rng.random())) for _ in range(100)]
    assert min(qs) >= c * (1 - 1e-10)


def test_hardy_quotient_errors():
    op = interval_op(0.75, 64)
    with pytest.raises(ValueError):
        hardy_quotient(op, np.zeros(op.n))
    with pytest.raises(ValueError):
        hardy_quotient(op, np.ones(op.n), "other")


def test_small_grid_refused():
    with pytest.raises(AssemblyError):
        assemble_interval(FracParams(1, 0.5), Interval(1.0), make_grid(Interval(1.0), 7))


def test_cache_round_trip(tmp_path):
    op = assemble(FracParams(3, 0.5), RadialBall(3, 0.5), 40)
    path = save_operator(op, tmp_path / "op.bin")
    raw = path.read_bytes()
    assert raw[:8] == b"FRACOP01"
    assert len(raw) == 8 + 6 * 8 + 40 * 40 * 8
    back = load_operator(path)
    assert np.array_equal(back.A, op.A)
    assert back.params == op.params and back.domain == op.domain
    assert back.quad_meta["version"] == QUAD_VERSION


def test_cached_assemble_env(tmp_path, monkeypatch):
    monkeypatch.setenv("FRACLAB_CACHE", str(tmp_path))
    a = cached_assemble(FracParams(1, 0.4), Interval(1.0), 32)
    assert len(os.listdir(tmp_path)) == 1
    b = cached_assemble(FracParams(1, 0.4), Interval(1.0), 32)
    assert np.array_equal(a.A, b.A)
    assert b.quad_meta.get("cached")


def test_concurrent_solves_identical():
    op = assemble(FracParams(1, 0.5), Interval(1.0), 256)
    rhs = [np.linspace(1, 2, op.n) * k for k in range(1, 9)]
    from fraclab import solve_linear
    with ThreadPoolExecutor(4) as pool:
        out = list(pool.map(lambda b: solve_linear(op, b), rhs))
    for k, u in enumerate(out, 1):
        assert np.array_equal(u, solve_linear(op, rhs[k - 1]))
