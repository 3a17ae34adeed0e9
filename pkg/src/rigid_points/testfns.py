"""Radial bump Psi with a logarithmic ramp, theta = z Psi, and the dyadic partition of unity."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import RigidPointsError


class InvalidEps(RigidPointsError, ValueError):
    pass


def smoothstep(x):
    """Quintic 6x^5 - 15x^4 + 10x^3 clamped to [0, 1]; C^2 at both ends."""
    x = np.clip(x, 0.0, 1.0)
    return x * x * x * (x * (6.0 * x - 15.0) + 10.0)


def _smoothstep_d1(x):
    inside = (x > 0) & (x < 1)
    x = np.clip(x, 0.0, 1.0)
    return np.where(inside, 30.0 * x * x * (x - 1.0) ** 2, 0.0)


def _smoothstep_int(x):
    # antiderivative of the smoothstep on [0, 1], zero at 0
    x = np.clip(x, 0.0, 1.0)
    return x ** 4 * (x * (x - 3.0) + 2.5)


def _radius(z):
    return np.abs(np.asarray(z, dtype=complex))


@dataclass(frozen=True)
class RadialTestFunction:
    """Psi(r) = 1 - c * int_0^t B, t = log(r / r0), with B a smoothed indicator of [0, 1/eps].

    B ramps up over [0, w] and down over [T - w, T] (T = 1/eps) with the
    quintic smoothstep, w = log(1 + h / r0). Away from the ramps Psi is exactly
    1 - c t, the logarithmic profile; c = 1/(T - w) forces Psi(r0 e^T) = 0.
    """

    r0: float
    eps: float
    h: float

    @property
    def T(self) -> float:
        return 1.0 / self.eps

    @property
    def w(self) -> float:
        return math.log1p(self.h / self.r0)

    @property
    def slope(self) -> float:
        return 1.0 / (self.T - self.w)

    @property
    def outer_radius(self) -> float:
        return self.r0 * math.exp(self.T)

    @property
    def joins(self):
        """Radii bounding the two smoothing bands."""
        return (self.r0, self.r0 * math.exp(self.w),
                self.r0 * math.exp(self.T - self.w), self.outer_radius)

    def _B(self, t):
        T, w = self.T, self.w
        return np.where(t < w, smoothstep(t / w), np.where(t > T - w, smoothstep((T - t) / w), 1.0))

    def _dB(self, t):
        T, w = self.T, self.w
        return np.where(t < w, _smoothstep_d1(t / w) / w,
                        np.where(t > T - w, -_smoothstep_d1((T - t) / w) / w, 0.0))

    def _intB(self, t):
        T, w = self.T, self.w
        t = np.clip(t, 0.0, T)
        first = w * _smoothstep_int(t / w)
        mid = w / 2.0 + (np.minimum(t, T - w) - w)
        # integral of S((T - s)/w) from T - w to t equals w/2 - w * Sint((T - t)/w)
        last = w / 2.0 + (T - 2 * w) + (w / 2.0 - w * _smoothstep_int((T - t) / w))
        return np.where(t < w, first, np.where(t > T - w, last, mid))

    def profile(self, r):
        """(Psi, dPsi/dt, d2Psi/dt2) as functions of t = log(r/r0)."""
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            t = np.log(r / self.r0)
        c = self.slope
        inside = r <= self.r0
        outside = t >= self.T
        val = np.where(inside, 1.0, np.where(outside, 0.0, 1.0 - c * self._intB(t)))
        core = ~(inside | outside)
        tt = np.where(core, t, 0.0)
        d1 = np.where(core, -c * self._B(tt), 0.0)
        d2 = np.where(core, -c * self._dB(tt), 0.0)
        return val, d1, d2

    def radial(self, r):
        return self.profile(r)[0]

    def radial_derivatives(self, r):
        """(Psi'(r), Psi''(r)) in the radial variable."""
        r = np.asarray(r, dtype=float)
        _, d1, d2 = self.profile(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(d1 == 0, 0.0, d1 / r), np.where((d1 == 0) & (d2 == 0), 0.0, (d2 - d1) / r ** 2)

    def __call__(self, z):
        return self.radial(_radius(z))

    def grad_norm(self, z):
        return np.abs(self.radial_derivatives(_radius(z))[0])

    def laplacian(self, z):
        r = _radius(z)
        _, _, d2 = self.profile(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(d2 == 0, 0.0, d2 / r ** 2)

    def dirichlet_energy(self, nodes: int = 64) -> float:
        """int |grad Psi|^2 dL = 2 pi int (dPsi/dt)^2 dt, by panelled Gauss-Legendre in t."""
        return 2.0 * math.pi * _integrate_t(lambda t: (self.slope * self._B(t)) ** 2, self, nodes)


def _integrate_t(fn, bump, nodes):
    x, wts = np.polynomial.legendre.leggauss(nodes)
    total = 0.0
    edges = [0.0, bump.w, bump.T - bump.w, bump.T]
    for a, b in zip(edges[:-1], edges[1:]):
        t = 0.5 * (b - a) * x + 0.5 * (b + a)
        total += 0.5 * (b - a) * float(np.sum(wts * fn(t)))
    return total


def build_bump(r0: float, eps: float, h: float | None = None) -> RadialTestFunction:
    # eps = 1 is admitted: the sweeps in the experiments start there
    if not 0.0 < eps <= 1.0:
        raise InvalidEps(f"eps must lie in (0, 1], got {eps}")
    if not r0 > 0:
        raise ValueError("r0 must be positive")
    if h is None:
        h = 0.01 * r0
    if not 0 < math.log1p(h / r0) < 0.5 / eps:
        raise ValueError("smoothing width too large for this eps")
    return RadialTestFunction(float(r0), float(eps), float(h))


@dataclass(frozen=True)
class ThetaFunction:
    """theta(z) = z Psi(|z|)."""

    bump: RadialTestFunction

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return z * self.bump(z)

    def laplacian(self, z):
        # Delta(z Psi) = 4 dPsi/dzbar + z Delta Psi = z (2 Psi_t + Psi_tt) / r^2
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        _, d1, d2 = self.bump.profile(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where((d1 == 0) & (d2 == 0), 0j, z * (2.0 * d1 + d2) / r ** 2)

    def laplacian_energy(self, nodes: int = 64) -> float:
        """int |Delta theta|^2 dL = 2 pi int (2 Psi_t + Psi_tt)^2 dt."""
        b = self.bump
        return 2.0 * math.pi * _integrate_t(lambda t: (b.slope * (2.0 * b._B(t) + b._dB(t))) ** 2, b, nodes)


def build_theta(bump: RadialTestFunction) -> ThetaFunction:
    return ThetaFunction(bump)


@dataclass(frozen=True)
class PartitionOfUnity:
    """phi: ascent on [r0, 1.5 r0], plateau on [1.5 r0, 2 r0], descent on [2 r0, 3 r0].

    The ascent runs twice as fast as the descent, so phi(r0 + x) = 1 - phi(2 r0 + 2x)
    and phi_tilde + sum_{j>=1} phi(./2^j) telescopes to 1 outside the disk.
    """

    r0: float
    j_max: int = 20

    def phi(self, r):
        r = np.asarray(r, dtype=float)
        r0 = self.r0
        up = smoothstep((r - r0) / (0.5 * r0))
        down = 1.0 - smoothstep((r - 2.0 * r0) / r0)
        return np.where((r <= r0) | (r >= 3.0 * r0), 0.0,
                        np.where(r < 1.5 * r0, up, np.where(r <= 2.0 * r0, 1.0, down)))

    def phi_tilde(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r < self.r0, 0.0, np.where(r <= 1.5 * self.r0, 1.0, self.phi(r)))

    def phi_scale(self, r, j: int):
        return self.phi(np.asarray(r, dtype=float) / 2.0 ** j)

    def weights(self, r) -> np.ndarray:
        """Rows: phi_tilde, phi_2, ..., phi_{2^j_max} evaluated at r."""
        r = np.asarray(r, dtype=float)
        return np.stack([self.phi_tilde(r)] + [self.phi_scale(r, j) for j in range(1, self.j_max + 1)])

    @property
    def coverage(self) -> float:
        """Outer radius below which the weights sum to one."""
        return 2.0 ** (self.j_max + 1) * self.r0


def build_partition(r0: float, j_max: int = 20) -> PartitionOfUnity:
    if not r0 > 0 or j_max < 1:
        raise ValueError("need r0 > 0 and j_max >= 1")
    return PartitionOfUnity(float(r0), int(j_max))
