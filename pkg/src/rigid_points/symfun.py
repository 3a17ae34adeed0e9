"""Elementary symmetric functions, Vandermonde magnitudes and the GAF denominator D."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .core import RigidPointsError


class AllZeroSigma(RigidPointsError):
    pass


def elementary_symmetric(points) -> np.ndarray:
    """sigma_0..sigma_N of ``points`` by the multiply-out recurrence."""
    v = np.asarray(points, dtype=complex).reshape(-1)
    if v.size > 10_000:
        raise ValueError("at most 1e4 points")
    sigma = np.zeros(v.size + 1, dtype=complex)
    sigma[0] = 1.0
    for i, x in enumerate(v):
        # sigma_k <- sigma_k + x sigma_{k-1}, updated high-to-low in one vector op
        sigma[1:i + 2] = sigma[1:i + 2] + x * sigma[0:i + 1]
    return sigma


def concatenate_sigma(sigma_a, sigma_b) -> np.ndarray:
    """sigma of the union of two point sets from the sigmas of each part."""
    return np.convolve(np.asarray(sigma_a, dtype=complex), np.asarray(sigma_b, dtype=complex))


def vandermonde_log_abs(points) -> float:
    """sum_{i<j} log|z_i - z_j|; ``-inf`` when two points coincide."""
    v = np.asarray(points, dtype=complex).reshape(-1)
    if v.size < 2:
        return 0.0
    i, j = np.triu_indices(v.size, 1)
    d = np.abs(v[i] - v[j])
    if np.any(d == 0):
        return float("-inf")
    return float(np.sum(np.log(d)))


def log_falling_factorial(x, k):
    """log (x)_k = log x(x-1)...(x-k+1) for integers 0 <= k <= x; (x)_0 = 1."""
    x = np.asarray(x, dtype=float)
    k = np.asarray(k, dtype=float)
    return gammaln(x + 1.0) - gammaln(x - k + 1.0)


def g_expansion(sigma_inside, k_max: int) -> np.ndarray:
    """Coefficients g_0..g_{k_max} with sigma_k(omega) = sum_r g_r sigma_{k-r}(zeta, omega).

    They are the power-series coefficients of 1 / prod_i (1 + zeta_i t): g_0 = 1
    and g_r = -sum_{i=1}^{min(r,m)} sigma_i(zeta) g_{r-i}.
    """
    s = np.asarray(sigma_inside, dtype=complex)
    m = s.size - 1
    if m < 1:
        raise ValueError("need at least one inside point")
    g = np.zeros(k_max + 1, dtype=complex)
    g[0] = 1.0
    for r in range(1, k_max + 1):
        i = np.arange(1, min(r, m) + 1)
        g[r] = -np.sum(s[i] * g[r - i])
    return g


@dataclass(frozen=True)
class SymmetricProfile:
    points: np.ndarray
    sigma: np.ndarray
    log_abs_vandermonde: float

    @classmethod
    def of(cls, points):
        pts = np.asarray(points, dtype=complex).reshape(-1)
        return cls(pts, elementary_symmetric(pts), vandermonde_log_abs(pts))


@dataclass(frozen=True)
class GafDenominator:
    n: int
    log_value: float

    @property
    def value(self) -> float:
        return float(np.exp(self.log_value))


def _log_weights(n: int) -> np.ndarray:
    # log (n)_k = log(C(n,k) k!)
    return log_falling_factorial(n, np.arange(n + 1))


def gaf_denominator(sigma_joint, n: int) -> GafDenominator:
    """D = sum_k |sigma_k|^2 / (C(n,k) k!), accumulated in log form."""
    s = np.asarray(sigma_joint, dtype=complex)
    if s.size != n + 1:
        raise ValueError(f"expected {n + 1} sigma values, got {s.size}")
    with np.errstate(divide="ignore"):
        terms = 2.0 * np.log(np.abs(s)) - _log_weights(n)
    if not np.any(np.isfinite(terms)):
        raise AllZeroSigma("every term of D vanishes")
    return GafDenominator(n, float(logsumexp(terms)))


def log_gaf_denominator(zeta, sigma_outside, n: int) -> float:
    return gaf_denominator(concatenate_sigma(elementary_symmetric(zeta), sigma_outside), n).log_value


def _log_abs_sum(logmag, phase):
    """log|sum_k exp(logmag_k + i phase_k)| with a max shift."""
    finite = np.isfinite(logmag)
    if not np.any(finite):
        return float("-inf")
    top = np.max(logmag[finite])
    s = np.sum(np.exp(logmag[finite] - top + 1j * phase[finite]))
    return float(top + np.log(np.abs(s))) if s != 0 else float("-inf")


@dataclass
class GafRatioDiagnostics:
    n: int
    m: int
    linear: dict = field(default_factory=dict)   # i -> n * |<sigma(zeta,omega), shift_i sigma(omega)>| / D
    cross: dict = field(default_factory=dict)    # (i, j) -> n * |<shift_i sigma(omega), shift_j sigma(omega)>| / D

    @property
    def y_n(self) -> float:
        """Largest scaled diagonal cross term (the Y_n analog)."""
        vals = [v for (i, j), v in self.cross.items() if i == j]
        return max(vals) if vals else 0.0

    @property
    def e_n(self) -> float:
        """Largest scaled linear term (the E_n analog)."""
        return max(self.linear.values()) if self.linear else 0.0


def gaf_ratio_diagnostics(zeta, omega, n: int) -> GafRatioDiagnostics:
    """Scaled inner products controlling D(zeta', omega)/D(zeta, omega) on the slice.

    With sigma_i(zeta') - sigma_i(zeta) = c_i for i >= 2, sigma(zeta', omega) - sigma(zeta, omega)
    is sum_i c_i sigma_{k-i}(omega); these are the normalized pairings of that shift.
    """
    zeta = np.asarray(zeta, dtype=complex).reshape(-1)
    m = zeta.size
    out = GafRatioDiagnostics(n, m)
    if m == 0:
        return out
    so = elementary_symmetric(omega)
    sj = concatenate_sigma(elementary_symmetric(zeta), so)
    if sj.size != n + 1:
        raise ValueError("|zeta| + |omega| must equal n")
    w = _log_weights(n)
    with np.errstate(divide="ignore"):
        lj = np.log(np.abs(sj))
        lo = np.log(np.abs(so))
    log_d = float(logsumexp(2 * lj - w))

    def shifted(i):
        # sigma_{k-i}(omega) placed at index k; omega has only n - m + 1 entries
        mag = np.full(n + 1, -np.inf)
        ph = np.zeros(n + 1)
        take = min(n + 1 - i, so.size)
        mag[i:i + take] = lo[:take]
        ph[i:i + take] = np.angle(so[:take])
        return mag, ph

    for i in range(2, m + 1):
        mi, pi = shifted(i)
        val = _log_abs_sum(lj + mi - w, -np.angle(sj) + pi)
        out.linear[i] = float(n * np.exp(val - log_d))
        for j in range(2, m + 1):
            mj, pj = shifted(j)
            val = _log_abs_sum(mi + mj - w, pi - pj)
            out.cross[(i, j)] = float(n * np.exp(val - log_d))
    return out


def eta_diagnostic(xi, g, l: int) -> complex:
    """eta_l = sum_{r>=1} (-1)^r g_r xi_{l+r} / sqrt((l+r)_r), truncated at the last xi.

    For a degree-n sample split into (zeta, omega):
    sigma_{n-l}(omega) / sqrt((n)_{n-l}) = (-1)^(n-l) (xi_l + eta_l) / xi_n.
    """
    xi = np.asarray(xi, dtype=complex)
    g = np.asarray(g, dtype=complex)
    r = np.arange(1, min(g.size, xi.size - l))
    logw = 0.5 * log_falling_factorial(l + r, r)
    return complex(np.sum((-1.0) ** r * g[r] * xi[l + r] * np.exp(-logw)))
