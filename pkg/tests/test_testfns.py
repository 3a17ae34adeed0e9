import math

import numpy as np
import pytest
from scipy.integrate import trapezoid
from hypothesis import given, settings
from hypothesis import strategies as st

from rigid_points.testfns import InvalidEps, build_bump, build_partition, build_theta, smoothstep


def test_smoothstep_endpoints():
    assert smoothstep(0.0) == 0.0 and smoothstep(1.0) == 1.0 and smoothstep(0.5) == 0.5
    assert smoothstep(-3.0) == 0.0 and smoothstep(4.0) == 1.0


@pytest.mark.parametrize("eps", [1.0, 0.5, 0.33, 0.1])
def test_bump_plateau_support_midpoint(eps):
    b = build_bump(1.0, eps)
    assert np.all(b(np.array([0.0, 0.3, 0.99999, 1.0])) == 1.0)
    assert b(b.outer_radius * 1.000001) == 0.0
    assert b(5 * b.outer_radius) == 0.0
    assert abs(b(math.exp(0.5 / eps)) - 0.5) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 1.0), st.floats(0.1, 3.0))
def test_bump_is_monotone_and_bounded(eps, r0):
    b = build_bump(r0, eps)
    r = np.linspace(0, 1.2 * b.outer_radius, 2000)
    v = b.radial(r)
    assert np.all((v >= 0) & (v <= 1))
    assert np.all(np.diff(v) <= 1e-15)


def test_bump_is_continuous_at_joins():
    b = build_bump(1.0, 0.5)
    for j in b.joins:
        lo, hi = b.radial(j * (1 - 1e-10)), b.radial(j * (1 + 1e-10))
        assert abs(lo - hi) <= 1e-8


def test_profile_derivatives_match_finite_differences():
    b = build_bump(0.7, 0.4)
    for r in [0.7 * 1.003, 1.5, 0.7 * math.exp(2.5 - 0.005)]:
        h = 1e-6
        d1, d2 = b.radial_derivatives(r)
        fd1 = (b.radial(r + h) - b.radial(r - h)) / (2 * h)
        fd2 = (b.radial(r + h) - 2 * b.radial(r) + b.radial(r - h)) / h ** 2
        assert abs(d1 - fd1) <= 1e-5 * max(1, abs(d1))
        assert abs(d2 - fd2) <= 1e-2 * max(1, abs(d2))


def test_dirichlet_energy_scales_like_eps():
    for eps in [0.5, 0.25, 0.1]:
        e = build_bump(1.0, eps).dirichlet_energy()
        assert 1.0 <= e / (2 * math.pi * eps) <= 1.05
    assert build_bump(1, 0.1).dirichlet_energy() < build_bump(1, 0.5).dirichlet_energy()


def test_dirichlet_energy_against_cartesian_grid():
    b = build_bump(1.0, 0.5)
    x = np.linspace(-b.outer_radius, b.outer_radius, 1601)
    X, Y = np.meshgrid(x, x)
    g = b.grad_norm(X + 1j * Y)
    grid = np.sum(g ** 2) * (x[1] - x[0]) ** 2
    assert abs(grid / b.dirichlet_energy() - 1) <= 0.01


def test_invalid_eps():
    for eps in [0.0, -0.1, 1.5]:
        with pytest.raises(InvalidEps):
            build_bump(1.0, eps)
    with pytest.raises(ValueError):
        build_bump(-1.0, 0.5)


def test_theta_laplacian_matches_finite_differences():
    th = build_theta(build_bump(1.0, 0.5))
    z = 1.3 * np.exp(0.7j)
    h = 1e-4
    fd = (th(z + h) + th(z - h) + th(z + 1j * h) + th(z - 1j * h) - 4 * th(z)) / h ** 2
    assert abs(fd - th.laplacian(z)) <= 1e-4 * abs(th.laplacian(z))
    assert th.laplacian(0.5) == 0 and th(0.5) == 0.5


def test_theta_laplacian_energy_quadrature():
    th = build_theta(build_bump(1.0, 0.5))
    # direct polar integration of |Delta theta|^2 over the annulus
    t = np.linspace(0, th.bump.T, 400_001)
    r = np.exp(t)
    f = np.abs(th.laplacian(r + 0j)) ** 2 * r * r
    direct = 2 * math.pi * trapezoid(f, t)
    assert abs(direct / th.laplacian_energy() - 1) <= 1e-3


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 5.0), st.floats(1.0, 1000.0))
def test_partition_sums_to_one(r0, factor):
    p = build_partition(r0)
    r = r0 * factor
    assert abs(p.weights(r).sum() - 1.0) <= 1e-12


def test_partition_zero_inside_and_coverage():
    p = build_partition(1.0, j_max=5)
    assert np.all(p.weights(np.array([0.1, 0.5, 0.99])) == 0.0)
    assert p.coverage == 64.0
    assert abs(p.weights(63.0).sum() - 1) <= 1e-12
    assert p.weights(70.0).sum() < 1
    with pytest.raises(ValueError):
        build_partition(0.0)


def test_phi_shape():
    p = build_partition(2.0)
    assert p.phi(2.0) == 0 and p.phi(3.0) == 1 and p.phi(4.0) == 1 and p.phi(6.0) == 0
    assert p.phi_scale(8.0, 2) == p.phi(2.0)
