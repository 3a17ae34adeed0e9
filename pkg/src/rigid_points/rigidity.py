"""Inside count and inside sum recovered from outside points only."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linstat import intensity_integral
from .testfns import RadialTestFunction, ThetaFunction


@dataclass(frozen=True)
class RigidityEstimate:
    raw: complex | float
    truth: complex | float | None
    eps: float
    intensity_integral: complex | float

    @property
    def rounded(self) -> int:
        return int(np.rint(np.real(self.raw)))

    @property
    def error(self) -> float:
        return float("nan") if self.truth is None else float(abs(self.raw - self.truth))

    @property
    def rounded_hit(self) -> bool:
        return self.truth is not None and self.rounded == int(round(np.real(self.truth)))


def bump_intensity_integral(bump: RadialTestFunction, intensity) -> float:
    """int Psi rho1 dL with panels aligned to the plateau edge and both smoothing bands."""
    return intensity_integral(bump.radial, intensity, bump.outer_radius, breakpoints=bump.joins)


def estimate_inside_count(outside, bump: RadialTestFunction, intensity, truth=None,
                          integral: float | None = None) -> RigidityEstimate:
    """raw = int Psi rho1 dL - sum_{omega outside} Psi(omega).

    ``integral`` may be passed to reuse the intensity term across replicas.
    """
    outside = np.asarray(outside, dtype=complex).reshape(-1)
    if outside.size and np.min(np.abs(outside)) < bump.r0:
        raise ValueError("outside points must not lie in the disk")
    if integral is None:
        integral = bump_intensity_integral(bump, intensity)
    raw = integral - float(np.sum(bump(outside))) if outside.size else integral
    return RigidityEstimate(float(raw), truth, bump.eps, float(integral))


def theta_intensity_integral(theta: ThetaFunction, intensity, angular: int = 64) -> complex:
    """int theta rho1 dL by polar quadrature; vanishes since theta is odd in angle."""
    b = theta.bump
    phases = np.exp(2j * math.pi * np.arange(angular) / angular)
    return complex(intensity_integral(lambda r: b.radial(r) * r * np.mean(phases), intensity,
                                      b.outer_radius, breakpoints=b.joins))


def estimate_inside_sum(outside, theta: ThetaFunction, intensity=None, truth=None) -> RigidityEstimate:
    """raw = int theta rho1 dL - sum_{omega outside} theta(omega), the first term being 0."""
    outside = np.asarray(outside, dtype=complex).reshape(-1)
    integral = 0j
    if intensity is not None:
        integral = theta_intensity_integral(theta, intensity)
        if abs(integral) > 1e-10:
            raise ArithmeticError(f"angular integral of theta is {abs(integral):.2e}, expected 0")
    raw = integral - complex(np.sum(theta(outside))) if outside.size else integral
    return RigidityEstimate(complex(raw), truth, theta.bump.eps, integral)
