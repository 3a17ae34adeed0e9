"""Linear statistics and Ginibre covariances by polar quadrature in the monomial basis."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import gammaincc, gammaln

from .core import PointConfiguration, RigidPointsError


class QuadratureNotConverged(RigidPointsError):
    pass


@dataclass(frozen=True)
class KernelSpec:
    """Ginibre kernel K_n(z, w) = sum_{k<n} (z conj w)^k / k! (or e^{z conj w} for n = None).

    Background measure d gamma = e^{-|z|^2} / pi dL.
    """

    model: str = "ginibre-n"
    n: int | None = None

    def __post_init__(self):
        if self.model not in ("ginibre-n", "ginibre-inf"):
            raise ValueError(f"unknown kernel model {self.model!r}")
        if self.model == "ginibre-n" and (self.n is None or self.n < 1):
            raise ValueError("ginibre-n needs n >= 1")
        if self.model == "ginibre-inf" and self.n is not None:
            raise ValueError("ginibre-inf takes no n")

    @classmethod
    def ginibre(cls, n: int | None):
        return cls("ginibre-inf") if n is None else cls("ginibre-n", int(n))

    def __call__(self, z, w):
        x = np.asarray(z, dtype=complex) * np.conj(np.asarray(w, dtype=complex))
        if self.n is None:
            if np.any(np.abs(x) > 700):
                raise OverflowError("|z conj w| > 700")
            return np.exp(x)
        acc = np.ones_like(x)
        for k in range(self.n - 1, 0, -1):
            acc = 1.0 + acc * x / k
        return acc

    def rho1(self, r):
        """First intensity K(z,z) e^{-|z|^2} / pi as a function of r = |z|."""
        r = np.asarray(r, dtype=float)
        if self.n is None:
            return np.full_like(r, 1.0 / math.pi)
        return gammaincc(self.n, r * r) / math.pi

    def basis_size(self, support_radius: float) -> int:
        if self.n is not None:
            return self.n
        # e_j has its radial mass near sqrt(j); beyond (R + 8)^2 the overlap with the support is negligible
        return int(math.ceil((support_radius + 8.0) ** 2))


@dataclass(frozen=True)
class ConstantIntensity:
    value: float = 1.0 / math.pi

    def rho1(self, r):
        return np.full_like(np.asarray(r, dtype=float), self.value)


def linear_statistic(config, f) -> complex:
    pts = config.points if isinstance(config, PointConfiguration) else np.asarray(config, dtype=complex)
    if pts.size == 0:
        return 0j
    vals = np.asarray(f(pts), dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise ValueError("test function is not finite at every point")
    return complex(np.sum(vals))


@dataclass(frozen=True)
class QuadratureParams:
    support_radius: float
    radial_nodes: int = 128
    angular_nodes: int = 256
    breakpoints: tuple = field(default_factory=tuple)
    tol: float = 1e-8
    panel_order: int = 16

    def doubled(self):
        return replace(self, radial_nodes=2 * self.radial_nodes, angular_nodes=2 * self.angular_nodes)


def _radial_nodes(q: QuadratureParams):
    panels = max(1, q.radial_nodes // q.panel_order)
    R = q.support_radius
    edges = set(np.linspace(0.0, R, panels + 1).tolist())
    edges.update(b for b in q.breakpoints if 0.0 < b < R)
    edges = np.array(sorted(edges))
    x, w = np.polynomial.legendre.leggauss(q.panel_order)
    a, b = edges[:-1, None], edges[1:, None]
    r = (0.5 * (b - a) * x + 0.5 * (b + a)).ravel()
    wr = (0.5 * (b - a) * w).ravel()
    return r, wr


def _basis_weights(r, wr, nb):
    # E[a, j] with A_jk = sum_a E[a,j] E[a,k] c_{k-j}(r_a):
    # E[a, j] = sqrt(2 w_a r_a) r_a^j e^{-r_a^2/2} / sqrt(j!)
    j = np.arange(nb)
    log_e = (0.5 * np.log(2.0 * wr * r)[:, None] + j[None, :] * np.log(r)[:, None]
             - 0.5 * r[:, None] ** 2 - 0.5 * gammaln(j + 1.0)[None, :])
    return np.exp(log_e)


def _angular_modes(fn, r, m):
    theta = 2.0 * np.pi * np.arange(m) / m
    z = r[:, None] * np.exp(1j * theta[None, :])
    vals = np.asarray(fn(z), dtype=complex)
    # c_d(r) = (1/2pi) int f e^{i d theta} d theta, trapezoid rule = inverse FFT
    return np.fft.ifft(vals, axis=1)


def _operator(fn, r, E, modes, nb, m, radial_only):
    if radial_only:
        return np.diag(np.einsum("aj,a->j", E * E, modes[:, 0]))
    d = np.arange(nb)[None, :] - np.arange(nb)[:, None]   # k - j
    if nb >= m // 2:
        raise QuadratureNotConverged("angular nodes too few for the basis size; increase angular_nodes")
    A = np.zeros((nb, nb), dtype=complex)
    idx = d % m
    for a in range(r.size):
        A += np.outer(E[a], E[a]) * modes[a][idx]
    return A


def _covariance_once(kernel, f, g, q, radial):
    nb = kernel.basis_size(q.support_radius)
    r, wr = _radial_nodes(q)
    E = _basis_weights(r, wr, nb)
    m = q.angular_nodes
    if not radial:
        m = max(m, 4 * nb)
    mf = _angular_modes(f, r, m)
    mg = mf if g is f else _angular_modes(g, r, m)
    mfg = _angular_modes(lambda z: f(z) * np.conj(g(z)), r, m)
    Af = _operator(f, r, E, mf, nb, m, radial)
    Ag = Af if g is f else _operator(g, r, E, mg, nb, m, radial)
    diag_fg = np.einsum("aj,a->j", E * E, mfg[:, 0])
    total = np.sum(diag_fg) - np.sum(Af * np.conj(Ag))
    return complex(total)


def dpp_covariance(kernel: KernelSpec, f, g=None, quad: QuadratureParams | None = None,
                   radial: bool = False, support_radius: float | None = None, return_error: bool = False):
    """Cov(sum f, sum g) under the Ginibre kernel, i.e.

    1/2 iint (f(z) - f(w)) conj(g(z) - g(w)) |K(z,w)|^2 dgamma(z) dgamma(w).

    With e_j = z^j / sqrt(j!) orthonormal for gamma and A^f_jk = <f e_k, e_j>,
    this equals sum_j <f conj(g) e_j, e_j> - sum_{j,k} A^f_jk conj(A^g_jk);
    the A entries are radial Gauss-Legendre panels times an angular trapezoid
    (FFT). ``radial=True`` uses only the zeroth angular mode. The result is
    recomputed on a doubled grid and the difference is the error estimate.
    """
    if g is None:
        g = f
    if quad is None:
        if support_radius is None:
            raise ValueError("pass quad or support_radius")
        quad = QuadratureParams(float(support_radius))
    first = _covariance_once(kernel, f, g, quad, radial)
    second = _covariance_once(kernel, f, g, quad.doubled(), radial)
    err = abs(second - first)
    if err > quad.tol * max(1.0, abs(second)):
        raise QuadratureNotConverged(f"grid doubling changed the covariance by {err:.3e}")
    value = second.real if abs(second.imag) <= 1e-12 * max(1.0, abs(second)) else second
    return (value, err) if return_error else value


def intensity_integral(fn_radial, intensity, outer: float, breakpoints=(), nodes: int = 32,
                       panels: int = 64):
    """2 pi int_0^outer fn(r) rho1(r) r dr by panelled Gauss-Legendre (complex if fn is)."""
    edges = set(np.linspace(0.0, outer, panels + 1).tolist())
    edges.update(b for b in breakpoints if 0.0 < b < outer)
    edges = np.array(sorted(edges))
    x, w = np.polynomial.legendre.leggauss(nodes)
    a, b = edges[:-1, None], edges[1:, None]
    r = (0.5 * (b - a) * x + 0.5 * (b + a)).ravel()
    wr = (0.5 * (b - a) * w).ravel()
    total = 2.0 * math.pi * np.sum(wr * r * fn_radial(r) * intensity.rho1(r))
    return complex(total) if np.iscomplexobj(total) else float(total)
