"""Recover GAF coefficients from zeros: Newton identities, Vieta ratios, chi and phase alignment."""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.special import gammaln

from .core import ORIGIN_TOL, OriginPoint


class OriginRoot(OriginPoint):
    pass


def newton_from_power_sums(beta) -> list:
    """e_1..e_k from power sums beta_1..beta_k via Newton's identities.

    e_k = (1/k) sum_{i=1}^k (-1)^(i-1) e_{k-i} beta_i, e_0 = 1. Works on any
    field-like scalars (Python complex, mpmath numbers, Fractions).
    """
    beta = list(beta)
    if len(beta) > 200:
        raise ValueError("at most 200 power sums")
    e = [1]
    for k in range(1, len(beta) + 1):
        acc = 0
        for i in range(1, k + 1):
            term = e[k - i] * beta[i - 1]
            acc = acc + term if i % 2 else acc - term
        e.append(acc / k)
    return e[1:]


def _working_digits(z: np.ndarray, k_max: int) -> int:
    # cancellation in the identities grows like (max|z| / min|z|)^k
    spread = float(np.max(np.abs(z)) / np.min(np.abs(z)))
    return 30 + int(math.ceil(k_max * math.log10(max(spread, 1.0)))) + int(math.log10(k_max + 1) + 1)


def vieta_ratios(roots, k_max: int | None = None, dps: int | None = None) -> np.ndarray:
    """a_1..a_{k_max}, the coefficient ratios xi_k/xi_0 implied by the zeros of f_n.

    a_k = (-1)^k sqrt(k!) e_k(1/z_1, ..., 1/z_n), with e_k obtained from the
    reciprocal power sums alpha_j through :func:`newton_from_power_sums`. The
    identities cancel catastrophically in double precision, so alpha_j and the
    recursion run in mpmath at ``dps`` digits (chosen from the root spread
    when omitted); the roots themselves stay double precision.
    """
    z = np.asarray(roots, dtype=complex).reshape(-1)
    n = z.size
    if k_max is None:
        k_max = n
    if not 1 <= k_max <= n:
        raise ValueError("need 1 <= k_max <= number of roots")
    if np.min(np.abs(z)) <= ORIGIN_TOL:
        raise OriginRoot("a root lies at the origin")
    if dps is None:
        dps = _working_digits(z, k_max)
    with mpmath.workdps(dps):
        inv = [1 / mpmath.mpc(complex(x)) for x in z]
        powers = list(inv)
        alpha = []
        for _ in range(k_max):
            alpha.append(mpmath.fsum(powers))
            powers = [p * q for p, q in zip(powers, inv)]
        e = newton_from_power_sums(alpha)
        e = np.array([complex(x) for x in e])
    k = np.arange(1, k_max + 1)
    return (-1.0) ** k * np.exp(0.5 * gammaln(k + 1)) * e


def estimate_chi(a) -> float:
    """chi_k = sqrt(k) (sum_{j<k} |a_j|^2)^(-1/2) from a_0..a_{k-1}."""
    a = np.asarray(a, dtype=complex)
    k = a.size
    if k < 10:
        raise ValueError("chi needs at least 10 ratios")
    return float(math.sqrt(k / np.sum(np.abs(a) ** 2)))


def chi_error_bar(k: int) -> float:
    return 0.5 / math.sqrt(k)


@dataclass(frozen=True)
class ReconstructionResult:
    ratios: np.ndarray          # a_0..a_{k_max}, a_0 = 1
    chi: float
    coefficients: np.ndarray    # chi * a_k
    phase: complex
    max_ratio_error: float
    aligned_error: float

    @property
    def chi_error(self) -> float:
        return chi_error_bar(self.ratios.size - 1)

    @property
    def phase_angle(self) -> float:
        return float(np.angle(self.phase))


def align(xi_hat, xi, threshold: float = 0.1):
    """Unimodular u maximizing Re <u xi_hat, xi>, and the aligned max relative error."""
    xi_hat = np.asarray(xi_hat, dtype=complex)
    xi = np.asarray(xi, dtype=complex)[: xi_hat.size]
    ip = np.sum(np.conj(xi_hat) * xi)
    u = ip / abs(ip)
    keep = np.abs(xi) >= threshold
    err = float(np.max(np.abs(u * xi_hat[keep] - xi[keep]) / np.abs(xi[keep]))) if keep.any() else 0.0
    return complex(u), err


def reconstruct_and_align(sample, k_max: int | None = None, ratios=None) -> ReconstructionResult:
    """Rebuild xi_hat_k = chi a_k from the zeros of ``sample`` and align it with the truth.

    ``ratios`` (a_1..a_{k_max}) may be supplied to bypass the zeros.
    """
    n = sample.n
    if k_max is None:
        k_max = n
    if sample.residual > 1e-8:
        raise ValueError("sample residual above 1e-8")
    if ratios is None:
        ratios = vieta_ratios(sample.points, k_max)
    a = np.concatenate([[1.0 + 0j], np.asarray(ratios, dtype=complex)[:k_max]])
    xi = np.asarray(sample.xi, dtype=complex)
    truth = xi[: k_max + 1] / xi[0]
    ratio_err = float(np.max(np.abs(a - truth) / np.abs(truth)))
    chi = estimate_chi(a[:k_max])
    xi_hat = chi * a
    u, err = align(xi_hat, xi)
    return ReconstructionResult(a, chi, xi_hat, u, ratio_err, err)
