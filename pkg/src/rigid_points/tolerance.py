"""Conditional law of the inside points given the outside ones, and Metropolis resamplers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Disk, RigidPointsError, as_generator
from .samplers import accept_probability
from .symfun import elementary_symmetric, log_gaf_denominator, vandermonde_log_abs

SUM_TOL = 1e-12


class StuckChain(RigidPointsError):
    pass


class SumMismatch(RigidPointsError):
    pass


@dataclass
class ConditionalTarget:
    """Unnormalized log-density of zeta in D^m given the outside points omega.

    ginibre: 2 log|Delta(zeta, omega)| - sum |zeta_k|^2
    gaf:     2 log|Delta(zeta, omega)| - (n + 1) log D(zeta, omega), on sum(zeta) = s

    Only zeta-dependent factors of Delta(zeta, omega) are kept: the inside
    Vandermonde and the cross product Gamma(zeta, omega) = prod (zeta_i - omega_j).
    With ``far_radius`` set, outside points beyond it enter Gamma through the
    expansion log|1 - zeta/omega| = -Re sum_l (zeta/omega)^l / l, truncated
    after ``tail_terms`` powers (their constant log|omega| part is dropped).
    """

    model: str
    n: int
    omega: np.ndarray
    m: int
    r0: float
    s: complex | None = None
    far_radius: float | None = None
    tail_terms: int = 8
    _near: np.ndarray = field(init=False, repr=False)
    _far_sums: np.ndarray = field(init=False, repr=False)
    _sigma_out: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.model not in ("ginibre", "gaf"):
            raise ValueError(f"unknown model {self.model!r}")
        self.omega = np.asarray(self.omega, dtype=complex).reshape(-1)
        if self.m < 1:
            raise ValueError("need m >= 1 inside points")
        if self.omega.size and np.min(np.abs(self.omega)) < self.r0:
            raise ValueError("outside points must lie outside the disk")
        if self.model == "gaf":
            if self.s is None:
                raise ValueError("gaf target needs the conserved sum s")
            if self.omega.size + self.m != self.n:
                raise ValueError("gaf target needs |omega| + m = n")
        if self.far_radius is None:
            self._near = self.omega
            self._far_sums = np.zeros(0, dtype=complex)
        else:
            far = np.abs(self.omega) > self.far_radius
            self._near = self.omega[~far]
            ls = np.arange(1, self.tail_terms + 1)
            self._far_sums = np.array([np.sum(self.omega[far] ** (-l)) for l in ls])
        self._sigma_out = elementary_symmetric(self.omega) if self.model == "gaf" else None

    @property
    def disk(self) -> Disk:
        return Disk(self.r0)

    def log_gamma(self, zeta) -> float:
        """log|Gamma(zeta, omega)|, up to a zeta-independent constant when truncated."""
        zeta = np.asarray(zeta, dtype=complex).reshape(-1)
        val = float(np.sum(np.log(np.abs(zeta[:, None] - self._near[None, :])))) if self._near.size else 0.0
        if self._far_sums.size:
            ls = np.arange(1, self._far_sums.size + 1)
            p = np.array([np.sum(zeta ** l) for l in ls])
            val -= float(np.real(np.sum(p * self._far_sums / ls)))
        return val

    def log_density(self, zeta) -> float:
        zeta = np.asarray(zeta, dtype=complex).reshape(-1)
        base = 2.0 * vandermonde_log_abs(zeta) + 2.0 * self.log_gamma(zeta)
        if self.model == "ginibre":
            return base - float(np.sum(np.abs(zeta) ** 2))
        return base - (self.n + 1) * log_gaf_denominator(zeta, self._sigma_out, self.n)


def ginibre_conditional_logratio(target: ConditionalTarget, zeta, zeta_new) -> float:
    """log rho(zeta') - log rho(zeta); the normalizer C(omega) never appears.

    Split as inside Vandermonde ratio + Gamma cross-term ratio + Gaussian weight.
    """
    zeta = np.asarray(zeta, dtype=complex).reshape(-1)
    zeta_new = np.asarray(zeta_new, dtype=complex).reshape(-1)
    vdm = 2.0 * (vandermonde_log_abs(zeta_new) - vandermonde_log_abs(zeta))
    gam = 2.0 * (target.log_gamma(zeta_new) - target.log_gamma(zeta))
    gauss = float(np.sum(np.abs(zeta) ** 2) - np.sum(np.abs(zeta_new) ** 2))
    return vdm + gam + gauss


def gaf_conditional_logratio(target: ConditionalTarget, zeta, zeta_new) -> float:
    zeta = np.asarray(zeta, dtype=complex).reshape(-1)
    zeta_new = np.asarray(zeta_new, dtype=complex).reshape(-1)
    if abs(np.sum(zeta_new) - np.sum(zeta)) > SUM_TOL:
        raise SumMismatch(f"sums differ by {abs(np.sum(zeta_new) - np.sum(zeta)):.3e}")
    return target.log_density(zeta_new) - target.log_density(zeta)


def logratio(target: ConditionalTarget, zeta, zeta_new) -> float:
    if target.model == "ginibre":
        return ginibre_conditional_logratio(target, zeta, zeta_new)
    return gaf_conditional_logratio(target, zeta, zeta_new)


@dataclass
class ChainReport:
    states: np.ndarray              # (records, m)
    acceptance: float
    drift: float                    # max |sum(state) - s| (gaf), 0 for ginibre
    step_size: float
    steps: int
    log_density: np.ndarray = field(default_factory=lambda: np.zeros(0))
    accepted: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    def occupancy(self, r0: float, cells: int = 10, coordinate: int = 0):
        """Visit counts on a cells x cells grid over [-r0, r0]^2 and a mask of cells inside the disk."""
        z = self.states[:, coordinate]
        edges = np.linspace(-r0, r0, cells + 1)
        hist, _, _ = np.histogram2d(z.real, z.imag, bins=[edges, edges])
        lo, hi = edges[:-1], edges[1:]
        far = np.maximum(np.abs(lo), np.abs(hi))
        inside = far[:, None] ** 2 + far[None, :] ** 2 <= r0 * r0 * (1 + 1e-12)
        return hist, inside


def _uniform_in_disk(gen, radius):
    u = gen.random()
    a = 2.0 * math.pi * gen.random()
    return radius * math.sqrt(u) * complex(math.cos(a), math.sin(a))


def mcmc_resample_inside(target: ConditionalTarget, steps: int, rng, initial=None,
                         step_size: float | None = None, burn_in: int | None = None,
                         thin: int | None = None, target_accept: float = 0.25,
                         stuck_window: int = 10_000, record_trace: bool = False) -> ChainReport:
    """Metropolis chain on the conditional law of the inside points.

    ginibre: redraw one coordinate uniformly in the disk.
    gaf: move a pair by (+d, -d), d uniform in a disk of radius ``step_size``;
    proposals leaving the disk are rejected outright, and the sum is preserved.
    The gaf step adapts during burn-in towards ``target_accept``.
    """
    gen = as_generator(rng)
    m, r0 = target.m, target.r0
    if target.model == "gaf" and m < 2:
        raise ValueError("gaf chains need m >= 2 (m = 1 is rigid)")
    if initial is None:
        if target.model == "gaf":
            raise ValueError("gaf chains need an initial state on the slice")
        initial = [_uniform_in_disk(gen, r0) for _ in range(m)]
    zeta = np.array(initial, dtype=complex).reshape(-1)
    if zeta.size != m or np.any(np.abs(zeta) >= r0):
        raise ValueError("initial state must have m points inside the disk")
    if step_size is None:
        step_size = 0.1 * r0
    if burn_in is None:
        burn_in = steps // 10 if target.model == "gaf" else 0
    if thin is None:
        thin = 10 * m
    s0 = complex(np.sum(zeta))
    logp = target.log_density(zeta)
    records, trace_lp, trace_acc = [], [], []
    acc_total = tried = window = window_acc = 0
    drift = 0.0
    for t in range(steps):
        prop = zeta.copy()
        if target.model == "ginibre":
            prop[gen.integers(m)] = _uniform_in_disk(gen, r0)
            ok = True
        else:
            i, j = gen.choice(m, size=2, replace=False)
            d = _uniform_in_disk(gen, step_size)
            prop[i] += d
            prop[j] -= d
            ok = abs(prop[i]) < r0 and abs(prop[j]) < r0
        accepted = False
        if ok:
            lr = logratio(target, zeta, prop)
            if gen.random() < accept_probability(lr):
                zeta, logp, accepted = prop, logp + lr, True
        if target.model == "gaf":
            drift = max(drift, abs(complex(np.sum(zeta)) - s0))
        if t < burn_in:
            window_acc += accepted
            if (t + 1) % 200 == 0:
                step_size *= math.exp(window_acc / 200.0 - target_accept)
                step_size = min(step_size, 2.0 * r0)
                window_acc = 0
            continue
        tried += 1
        acc_total += accepted
        window += 1
        window_acc += accepted
        if window == stuck_window:
            if window_acc / stuck_window < 0.01:
                raise StuckChain(f"acceptance {window_acc / stuck_window:.4f} over {stuck_window} steps")
            window = window_acc = 0
        if (t - burn_in + 1) % thin == 0:
            records.append(zeta.copy())
            if record_trace:
                trace_lp.append(logp)
        if record_trace:
            trace_acc.append(accepted)
    states = np.array(records, dtype=complex).reshape(-1, m)
    return ChainReport(states, acc_total / tried if tried else float("nan"), drift, step_size, steps,
                       np.array(trace_lp), np.array(trace_acc, dtype=bool))


def slice_parameter(states, s) -> np.ndarray:
    """For m = 2 on the slice zeta_1 + zeta_2 = s: arg(t) mod pi with zeta_1 = s/2 + t.

    Mod pi identifies t with -t, i.e. the two labelings of the same pair.
    """
    t = np.asarray(states, dtype=complex)[:, 0] - s / 2.0
    return np.mod(np.angle(t), math.pi)


def delta_separated(points, r0: float, m: int, delta: float) -> bool:
    """Exactly m points inside, none within delta of the circle."""
    r = np.abs(np.asarray(points, dtype=complex))
    return int(np.sum(r < r0)) == m and not np.any(np.abs(r - r0) < delta)


def gamma_envelope_constant(r0: float, delta: float) -> float:
    """K with |log|Gamma(zeta',w)| - log|Gamma(zeta,w)|| <= 2 m K (|S_1| + |S_2| + S~_3),
    valid when every |omega| > r0 + delta (derived from the power expansion of log(1 - zeta/omega))."""
    r = r0
    q = r / (r + delta)
    return max(r, r * r / 2.0, r ** 3 / (3.0 * (1.0 - q)))
