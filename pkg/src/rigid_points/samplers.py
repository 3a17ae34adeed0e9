"""Finite Ginibre and GAF-zero samplers, plus the small-n MCMC oracle for Ginibre."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .core import (
    PointConfiguration,
    RigidPointsError,
    RngState,
    as_generator,
    standard_complex_gaussian,
)
from .eigensolver import NoConvergence, qr_eigenvalues

GINIBRE_CAP = 4096
GAF_CAP = 128
GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))

__all__ = [
    "GinibreSample",
    "GafSample",
    "NoConvergence",
    "RootFindingFailure",
    "LeadingCoefficientUnderflow",
    "DegenerateState",
    "sample_ginibre_eigen",
    "ginibre_eigenvalues_batch",
    "sample_ginibre_mcmc_oracle",
    "ginibre_mcmc_chains",
    "sample_gaf",
    "gaf_coefficients",
    "aberth_roots",
    "comp_horner",
    "relative_residuals",
]


class RootFindingFailure(RigidPointsError):
    pass


class LeadingCoefficientUnderflow(RigidPointsError):
    pass


class DegenerateState(RigidPointsError):
    pass


def _rng_meta(rng):
    if isinstance(rng, RngState):
        return rng.seed, rng.stream
    return None, None


@dataclass(frozen=True)
class GinibreSample:
    n: int
    eigenvalues: PointConfiguration
    method: str
    seed: int | None = None
    stream: int | None = None
    trace_residual: float = float("nan")
    logdet_residual: float = float("nan")
    acceptance: float = float("nan")

    @property
    def points(self):
        return self.eigenvalues.points

    def meta(self):
        return {"model": "ginibre", "n": self.n, "seed": self.seed, "stream": self.stream,
                "residual": max(self.trace_residual, self.logdet_residual)}


@dataclass(frozen=True)
class GafSample:
    n: int
    xi: np.ndarray
    coefficients: np.ndarray
    roots: PointConfiguration
    residual: float
    seed: int | None = None
    stream: int | None = None

    @property
    def points(self):
        return self.roots.points

    def meta(self):
        return {"model": "gaf", "n": self.n, "seed": self.seed, "stream": self.stream,
                "residual": self.residual}


# ---------------------------------------------------------------------------
# Ginibre, eigenvalue route


def _ginibre_matrix(n, gen):
    return standard_complex_gaussian(gen, (n, n))


def sample_ginibre_eigen(n: int, rng, method: str = "lapack", cap: int = GINIBRE_CAP) -> GinibreSample:
    """Eigenvalues of an n x n matrix with i.i.d. standard complex Gaussian entries.

    ``method="lapack"`` uses ``numpy.linalg.eigvals`` (Hessenberg + shifted QR in
    LAPACK); ``method="qr"`` uses the in-package implementation.
    """
    if not 1 <= n <= cap:
        raise ValueError(f"n must be in [1, {cap}], got {n}")
    gen = as_generator(rng)
    a = _ginibre_matrix(n, gen)
    if n == 1:
        eig = a.reshape(1).copy()
    elif method == "lapack":
        eig = np.linalg.eigvals(a)
    elif method == "qr":
        eig = qr_eigenvalues(a)
    else:
        raise ValueError(f"unknown method {method!r}")
    trace = np.trace(a)
    trace_res = abs(eig.sum() - trace) / max(abs(trace), np.sqrt(n) * 1e-300, 1e-300)
    sign, logabs = np.linalg.slogdet(a)
    log_prod = np.sum(np.log(eig.astype(complex)))
    log_det = logabs + 1j * np.angle(sign)
    dphase = np.angle(np.exp(1j * (log_prod.imag - log_det.imag)))
    logdet_res = float(np.hypot(log_prod.real - log_det.real, dphase))
    seed, stream = _rng_meta(rng)
    return GinibreSample(n, PointConfiguration(eig), method, seed, stream, float(trace_res), logdet_res)


def ginibre_eigenvalues_batch(n: int, count: int, rng) -> np.ndarray:
    """``count`` independent draws of G_n as a (count, n) array (LAPACK, batched)."""
    gen = as_generator(rng)
    a = standard_complex_gaussian(gen, (count, n, n))
    return np.linalg.eigvals(a)


# ---------------------------------------------------------------------------
# Ginibre, Metropolis oracle on the joint density


def _log_joint_ginibre(z):
    # z: (chains, n)
    diff = z[:, :, None] - z[:, None, :]
    iu = np.triu_indices(z.shape[1], 1)
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(diff[:, iu[0], iu[1]]))
    return 2.0 * logs.sum(axis=1) - np.sum(np.abs(z) ** 2, axis=1)


def accept_probability(log_ratio) -> np.ndarray:
    """Metropolis acceptance min(1, exp(log_ratio))."""
    lr = np.asarray(log_ratio, dtype=float)
    with np.errstate(over="ignore"):
        return np.where(lr >= 0, 1.0, np.exp(np.minimum(lr, 0.0)))


def ginibre_mcmc_chains(n, steps, rng, chains=1, initial=None, step_size=0.5,
                        burn_in=None, record_every=None, target_accept=0.35):
    """Run ``chains`` independent Metropolis chains on the Ginibre joint density.

    Each step updates one coordinate (systematic sweep) with a complex Gaussian
    proposal. The step size is adapted during burn-in only. Returns
    ``(final_states, acceptance_after_burn_in, recorded)`` where ``recorded`` is
    a list of state snapshots taken every ``record_every`` post-burn-in steps.
    """
    gen = as_generator(rng)
    if initial is None:
        z = standard_complex_gaussian(gen, (chains, n)) * np.sqrt(max(n, 1) / 2.0)
    else:
        z = np.array(initial, dtype=complex).reshape(chains, n)
    if n > 1:
        d = np.abs(z[:, :, None] - z[:, None, :]) + np.eye(n)[None]
        if np.min(d) <= 1e-14:
            raise DegenerateState("two coordinates coincide; log-density is -inf")
    if burn_in is None:
        burn_in = steps // 5
    s = float(step_size)
    accepted = 0
    tried = 0
    window_acc = 0
    recorded = []
    rows = np.arange(chains)
    for t in range(steps):
        i = t % n
        zi = z[:, i]
        prop = zi + s * standard_complex_gaussian(gen, chains)
        delta = np.abs(zi) ** 2 - np.abs(prop) ** 2
        if n > 1:
            others = np.delete(z, i, axis=1)
            with np.errstate(divide="ignore"):
                delta = delta + 2.0 * np.sum(
                    np.log(np.abs(prop[:, None] - others)) - np.log(np.abs(zi[:, None] - others)), axis=1)
        u = gen.random(chains)
        acc = u < accept_probability(delta)
        z[rows[acc], i] = prop[acc]
        if t < burn_in:
            window_acc += int(acc.sum())
            if (t + 1) % 100 == 0:
                rate = window_acc / (100.0 * chains)
                s *= math.exp(rate - target_accept)
                window_acc = 0
        else:
            accepted += int(acc.sum())
            tried += chains
            if record_every and (t - burn_in + 1) % record_every == 0:
                recorded.append(z.copy())
    rate = accepted / tried if tried else float("nan")
    return z, rate, recorded


def sample_ginibre_mcmc_oracle(n: int, steps: int, rng) -> GinibreSample:
    if not 1 <= n <= 16:
        raise ValueError("MCMC oracle is restricted to n <= 16")
    if steps < 10_000 * n:
        raise ValueError("need at least 1e4 * n steps")
    z, rate, _ = ginibre_mcmc_chains(n, steps, rng)
    seed, stream = _rng_meta(rng)
    return GinibreSample(n, PointConfiguration(z[0]), "mcmc-oracle", seed, stream, acceptance=rate)


# ---------------------------------------------------------------------------
# GAF zeros


def gaf_coefficients(xi: np.ndarray) -> np.ndarray:
    k = np.arange(len(xi))
    return xi * np.exp(-0.5 * gammaln(k + 1))


def _split(a):
    c = 134217729.0 * a
    hi = c - (c - a)
    return hi, a - hi


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, al * bl - (((p - ah * bh) - al * bh) - ah * bl)


def comp_horner(coefficients, x):
    """Compensated Horner evaluation of sum c_k x^k (ascending coefficients).

    Error-free transformations on the real and imaginary parts; the result is
    as accurate as Horner in doubled working precision.
    """
    c = np.asarray(coefficients, dtype=complex)
    x = np.asarray(x, dtype=complex)
    xr, xi = x.real, x.imag
    sr = np.full(x.shape, c[-1].real)
    si = np.full(x.shape, c[-1].imag)
    err = np.zeros(x.shape, dtype=complex)
    for ck in c[-2::-1]:
        z1, h1 = _two_prod(sr, xr)
        z2, h2 = _two_prod(si, xi)
        z3, h3 = _two_prod(sr, xi)
        z4, h4 = _two_prod(si, xr)
        z5, h5 = _two_sum(z1, -z2)
        z6, h6 = _two_sum(z3, z4)
        sr, g1 = _two_sum(z5, ck.real)
        si, g2 = _two_sum(z6, ck.imag)
        local = (h1 - h2 + h5 + g1) + 1j * (h3 + h4 + h6 + g2)
        err = err * x + local
    return (sr + 1j * si) + err


def relative_residuals(coefficients, roots) -> np.ndarray:
    """|p(z)| / sum |c_k| |z|^k at each root (backward-error scale)."""
    c = np.asarray(coefficients, dtype=complex)
    z = np.asarray(roots, dtype=complex)
    val = comp_horner(c, z)
    scale = np.zeros(z.shape)
    az = np.abs(z)
    for ck in np.abs(c)[::-1]:
        scale = scale * az + ck
    return np.abs(val) / scale


def _horner_with_derivative(c, z):
    p = np.full(z.shape, c[-1], dtype=complex)
    dp = np.zeros(z.shape, dtype=complex)
    for ck in c[-2::-1]:
        dp = dp * z + p
        p = p * z + ck
    return p, dp


def cauchy_radius(coefficients) -> float:
    """Unique positive root R of |c_n| x^n = sum_{k<n} |c_k| x^k (bounds all root moduli)."""
    a = np.abs(np.asarray(coefficients, dtype=complex))
    n = len(a) - 1
    k = np.nonzero(a[:-1] > 0)[0]
    if k.size == 0:
        return 0.0
    loga = np.log(a[k])
    logan = math.log(a[-1])

    def g(t):
        # log(sum |c_k| x^(k-n)) - log|c_n|, decreasing in t = log x
        v = loga + (k - n) * t
        m = v.max()
        return m + math.log(np.exp(v - m).sum()) - logan

    lo, hi = -50.0, 50.0
    # bracket: g(lo) > 0 > g(hi)
    while g(lo) < 0:
        lo -= 50.0
    while g(hi) > 0:
        hi += 50.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    return math.exp(hi)


def aberth_roots(coefficients, tol: float = 1e-14, max_iter: int = 200, residual_tol: float = 1e-8):
    """All roots of sum c_k z^k by Aberth-Ehrlich simultaneous iteration.

    Starts on the Cauchy-radius circle with a golden-angle offset; stops when
    every correction is below ``tol * (1 + |z|)``; finishes with one Newton
    polish. Raises RootFindingFailure if that does not happen within
    ``max_iter`` sweeps or if the backward residual exceeds ``residual_tol``.
    """
    c = np.asarray(coefficients, dtype=complex)
    if c.size > 1 and c[-1] == 0:
        raise LeadingCoefficientUnderflow("leading coefficient is zero")
    n = c.size - 1
    if n < 1:
        raise ValueError("degree must be at least 1")
    if n == 1:
        return np.array([-c[0] / c[1]])
    radius = cauchy_radius(c)
    if radius == 0.0:
        return np.zeros(n, dtype=complex)
    angles = 2.0 * np.pi * np.arange(n) / n + GOLDEN_ANGLE
    z = radius * np.exp(1j * angles)
    eye = np.eye(n, dtype=bool)
    for _ in range(max_iter):
        p, dp = _horner_with_derivative(c, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            diff = z[:, None] - z[None, :]
            diff[eye] = 1.0
            inv = 1.0 / diff
            inv[eye] = 0.0
            s = inv.sum(axis=1)
            w = ratio / (1.0 - ratio * s)
        w = np.where(np.isfinite(w), w, 0.0)
        z = z - w
        if np.all(np.abs(w) <= tol * (1.0 + np.abs(z))):
            break
    else:
        res = relative_residuals(c, z)
        if np.max(res) > residual_tol:
            raise RootFindingFailure(f"Aberth did not converge in {max_iter} iterations "
                                     f"(max residual {np.max(res):.2e})")
    p, dp = _horner_with_derivative(c, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        step = p / dp
    z = z - np.where(np.isfinite(step), step, 0.0)
    res = relative_residuals(c, z)
    if np.max(res) > residual_tol:
        raise RootFindingFailure(f"residual {np.max(res):.2e} exceeds {residual_tol:.1e}")
    return z


def sample_gaf(n: int, rng, cap: int = GAF_CAP, xi: np.ndarray | None = None) -> GafSample:
    """Zeros of f_n(z) = sum_{k<=n} xi_k z^k / sqrt(k!).

    Pass ``xi`` (length >= n + 1) to reuse a coefficient sequence, e.g. for
    nested truncations of one function.
    """
    if not 1 <= n <= cap:
        raise ValueError(f"degree must be in [1, {cap}], got {n}")
    if xi is None:
        xi = standard_complex_gaussian(as_generator(rng), n + 1)
    xi = np.asarray(xi, dtype=complex)[: n + 1]
    coef = gaf_coefficients(xi)
    if not abs(coef[-1]) > np.finfo(float).tiny:
        raise LeadingCoefficientUnderflow(f"|xi_n|/sqrt(n!) underflows at n={n}")
    roots = aberth_roots(coef)
    residual = float(np.max(relative_residuals(coef, roots)))
    seed, stream = _rng_meta(rng)
    return GafSample(n, xi, coef, PointConfiguration(roots), residual, seed, stream)
