import math

import numpy as np
import pytest
from scipy.special import gammaincc
from scipy.stats import ks_2samp, kstest

from rigid_points.core import RngState, standard_complex_gaussian
from rigid_points.eigensolver import hessenberg, qr_eigenvalues
from rigid_points.samplers import (
    DegenerateState,
    LeadingCoefficientUnderflow,
    accept_probability,
    aberth_roots,
    comp_horner,
    ginibre_eigenvalues_batch,
    ginibre_mcmc_chains,
    relative_residuals,
    sample_gaf,
    sample_ginibre_eigen,
    sample_ginibre_mcmc_oracle,
)


def _sorted(z):
    z = np.asarray(z)
    return z[np.lexsort((z.imag, z.real))]


def test_n1_eigenvalue_is_the_entry():
    s = sample_ginibre_eigen(1, RngState(4))
    entry = standard_complex_gaussian(RngState(4).generator(), (1, 1))[0, 0]
    assert s.points[0] == entry


@pytest.mark.parametrize("seed", range(5))
def test_n2_trace_and_determinant(seed):
    gen = RngState(seed).generator()
    a = standard_complex_gaussian(gen, (2, 2))
    s = sample_ginibre_eigen(2, RngState(seed))
    assert abs(s.points.sum() - np.trace(a)) <= 1e-10 * abs(np.trace(a))
    assert abs(np.prod(s.points) - np.linalg.det(a)) <= 1e-10 * abs(np.linalg.det(a))


@pytest.mark.parametrize("n", [3, 10, 40])
def test_trace_and_logdet_invariants(n):
    for i in range(5):
        s = sample_ginibre_eigen(n, RngState(11, i))
        assert s.trace_residual <= 1e-8
        assert s.logdet_residual <= 1e-6


def test_qr_solver_matches_lapack():
    for n in [2, 5, 17, 40]:
        a = standard_complex_gaussian(RngState(n), (n, n))
        mine = _sorted(qr_eigenvalues(a))
        ref = _sorted(np.linalg.eigvals(a))
        assert np.max(np.abs(mine - ref)) < 1e-9 * max(1, np.max(np.abs(ref)))


def test_hessenberg_is_similar():
    a = standard_complex_gaussian(RngState(2), (8, 8))
    h = hessenberg(a)
    assert np.allclose(np.tril(h, -2), 0)
    assert np.allclose(_sorted(np.linalg.eigvals(h)), _sorted(np.linalg.eigvals(a)))


def test_qr_method_sample_path():
    s = sample_ginibre_eigen(12, RngState(3), method="qr")
    assert s.method == "qr" and s.trace_residual <= 1e-8


def test_sampler_cap():
    with pytest.raises(ValueError):
        sample_ginibre_eigen(5, RngState(0), cap=4)


def ginibre_count_intensity(n, r):
    # int_{|z|<r} K_n(z,z) e^{-|z|^2}/pi dL = sum_{k<n} P(Gamma(k+1) < r^2)
    k = np.arange(n)
    return float(np.sum(1.0 - gammaincc(k + 1, r * r)))


def test_mean_count_in_unit_disk():
    x = ginibre_eigenvalues_batch(64, 500, RngState(21))
    counts = np.sum(np.abs(x) < 1, axis=1)
    expected = ginibre_count_intensity(64, 1.0)
    assert abs(counts.mean() - expected) <= 3 * counts.std(ddof=1) / math.sqrt(500)


def test_one_point_intensity_on_grid():
    n, reps = 16, 2000
    x = ginibre_eigenvalues_batch(n, reps, RngState(22)).ravel()
    edges = np.linspace(0, 5, 11)
    counts, _ = np.histogram(np.abs(x), bins=edges)
    for j in range(10):
        a, b = edges[j], edges[j + 1]
        expected = reps * (ginibre_count_intensity(n, b) - ginibre_count_intensity(n, a))
        per_rep = np.histogram(np.abs(ginibre_eigenvalues_batch(n, 1, RngState(0)).ravel()), bins=[a, b])[0]
        del per_rep
        # counts per replica in an annulus have variance at most the mean
        assert abs(counts[j] - expected) <= 4 * math.sqrt(max(expected, 1.0))


def test_accept_probability():
    assert accept_probability(0.0) == 1.0
    assert accept_probability(3.0) == 1.0
    assert abs(accept_probability(-1.0) - math.exp(-1)) < 1e-15


@pytest.mark.slow
def test_mcmc_oracle_n1_radial_law():
    _, rate, rec = ginibre_mcmc_chains(1, 12_000, RngState(5), chains=100, burn_in=2000, record_every=10)
    r = np.abs(np.concatenate([s[:, 0] for s in rec]))
    assert r.size == 100_000
    assert 0.1 < rate < 0.7
    ks = kstest(r, lambda t: 1 - np.exp(-t * t))
    assert ks.pvalue > 0.01


@pytest.mark.slow
def test_mcmc_oracle_n3_against_eigen_sampler():
    z, rate, rec = ginibre_mcmc_chains(3, 6000, RngState(6), chains=200, burn_in=3000, record_every=300)
    mcmc = np.concatenate([np.max(np.abs(s), axis=1) for s in rec])
    eig = np.max(np.abs(ginibre_eigenvalues_batch(3, mcmc.size, RngState(7))), axis=1)
    assert 0.1 < rate < 0.7
    assert ks_2samp(mcmc, eig).pvalue > 0.01


def test_mcmc_oracle_contract():
    s = sample_ginibre_mcmc_oracle(2, 20_000, RngState(8))
    assert s.method == "mcmc-oracle" and len(s.points) == 2
    with pytest.raises(ValueError):
        sample_ginibre_mcmc_oracle(17, 10**6, RngState(8))
    with pytest.raises(ValueError):
        sample_ginibre_mcmc_oracle(2, 100, RngState(8))
    with pytest.raises(DegenerateState):
        ginibre_mcmc_chains(2, 10, RngState(0), initial=[[1.0, 1.0]])


def test_gaf_linear_root():
    s = sample_gaf(1, RngState(1))
    assert s.points[0] == -s.xi[0] / s.xi[1]


def test_gaf_quadratic_root_sum():
    for i in range(10):
        s = sample_gaf(2, RngState(2, i))
        target = -math.sqrt(2) * s.xi[1] / s.xi[2]
        assert abs(s.points.sum() - target) <= 1e-10 * abs(target)


def test_gaf_degree_50_residuals():
    for i in range(10):
        s = sample_gaf(50, RngState(3, i))
        assert len(s.points) == 50
        assert s.residual <= 1e-8


def test_gaf_phase_invariance():
    s = sample_gaf(30, RngState(4))
    t = sample_gaf(30, None, xi=s.xi * np.exp(0.7j))
    a, b = _sorted(s.points), _sorted(t.points)
    assert np.max(np.abs(a - b)) <= 1e-9


def test_gaf_underflow_and_cap():
    with pytest.raises(ValueError):
        sample_gaf(200, RngState(0))
    xi = np.ones(11, dtype=complex)
    xi[-1] = 1e-310
    with pytest.raises(LeadingCoefficientUnderflow):
        sample_gaf(10, None, xi=xi)


def test_aberth_simple_polynomials():
    r = _sorted(aberth_roots(np.array([-1, 0, 1], dtype=complex)))
    assert np.allclose(r, [-1, 1], atol=1e-12)
    r = _sorted(aberth_roots(np.array([-1, 0, 0, 1], dtype=complex)))
    cube = _sorted(np.exp(2j * np.pi * np.arange(3) / 3))
    assert np.allclose(r, cube, atol=1e-12)


def test_aberth_reexpansion():
    gen = np.random.default_rng(12)
    for _ in range(5):
        c = gen.uniform(-1, 1, 21) + 1j * gen.uniform(-1, 1, 21)
        roots = aberth_roots(c)
        back = np.poly(roots)[::-1] * c[-1]
        scale = np.max(np.abs(c))
        assert np.max(np.abs(back - c)) <= 1e-8 * scale


def test_compensated_horner_accuracy():
    # (z - 1)^8 near its root: naive evaluation loses everything, compensated keeps it
    c = np.poly(np.ones(8))[::-1].astype(complex)
    x = 1.0 + 1e-3
    exact = (1e-3) ** 8
    assert abs(comp_horner(c, x) - exact) <= 1e-6 * exact
    assert relative_residuals(np.array([1, 1], dtype=complex), np.array([-1.0 + 0j]))[0] == 0.0


def test_sample_meta():
    s = sample_gaf(5, RngState(7, 2))
    assert s.meta() == {"model": "gaf", "n": 5, "seed": 7, "stream": 2, "residual": s.residual}
    g = sample_ginibre_eigen(4, RngState(7, 3))
    assert g.meta()["model"] == "ginibre" and g.meta()["stream"] == 3
