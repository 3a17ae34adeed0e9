"""Smoothed inverse-power sums of outside points, dyadic tails and full power sums alpha_k."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import PointConfiguration, RigidPointsError, check_no_origin
from .testfns import PartitionOfUnity, build_partition


class InsufficientScale(RigidPointsError):
    pass


@dataclass
class PowerSumReport:
    l_max: int
    S: dict = field(default_factory=dict)          # l -> sum over outside points of 1/omega^l
    S_tilde: dict = field(default_factory=dict)    # l >= 3 -> sum of 1/|omega|^l
    tau: dict = field(default_factory=dict)        # (l, k) -> sum_{j>=k} int phi_{2^j} / z^l
    alpha: dict = field(default_factory=dict)      # k -> sum over all points of 1/z^k
    inside: dict = field(default_factory=dict)     # k -> sum over inside points of 1/z^k

    @property
    def x_n(self) -> float:
        """|S_1| + |S_2| + S~_3, the envelope scale for the Ginibre ratio bound."""
        return abs(self.S[1]) + abs(self.S[2]) + self.S_tilde[3]


def _points(config):
    if isinstance(config, PointConfiguration):
        return config.points
    return np.asarray(config, dtype=complex).reshape(-1)


def inverse_power_sums(config, partition: PartitionOfUnity, l_max: int = 3) -> PowerSumReport:
    """Partition-weighted power sums over the configuration.

    Points with |z| < r0 receive zero weight (they are the inside points) but
    still enter alpha_k.
    """
    z = _points(config)
    check_no_origin(z)
    r = np.abs(z)
    if r.size and np.max(r) >= partition.coverage:
        raise ValueError("configuration extends beyond the partition coverage")
    W = partition.weights(r)                    # (j_max + 1, N), row 0 is phi_tilde
    rep = PowerSumReport(l_max)
    inside = r < partition.r0
    for l in range(1, l_max + 1):
        inv = z ** (-l)
        per_scale = W @ inv                      # scale-by-scale contributions
        rep.S[l] = complex(np.sum(per_scale))
        # tails tau_l(2^k) = sum_{j >= k} of the scale contributions, k = 1..j_max
        tails = np.cumsum(per_scale[::-1])[::-1]
        for k in range(1, partition.j_max + 1):
            rep.tau[(l, k)] = complex(tails[k])
        if l >= 3:
            rep.S_tilde[l] = float(np.sum(W @ (r ** (-l))))
        rep.inside[l] = complex(np.sum(inv[inside]))
        rep.alpha[l] = complex(np.sum(inv))
    return rep


def direct_outside_sum(config, r0: float, l: int) -> complex:
    z = _points(config)
    out = z[np.abs(z) >= r0]
    return complex(np.sum(out ** (-l)))


@dataclass
class TailRegression:
    model: str
    n: int
    l: int
    r0: float
    scales: list
    mean_abs_tau: list
    sem_abs_tau: list
    slope: float
    slope_se: float
    replicas: int
    rows: list = field(default_factory=list)     # (replica, l, k, |tau|)

    @property
    def log2_means(self):
        return [math.log2(m) for m in self.mean_abs_tau]


def fit_log2_slope(ks, means, sems=None):
    """OLS slope of log2(mean) against k, with its standard error.

    With three or more scales the residual-based error is used, floored by
    the propagated Monte Carlo error of the means.
    """
    k = np.asarray(ks, dtype=float)
    y = np.log2(np.asarray(means, dtype=float))
    kc = k - k.mean()
    sxx = float(np.sum(kc ** 2))
    slope = float(np.sum(kc * (y - y.mean())) / sxx)
    resid = y - (y.mean() + slope * kc)
    se_res = math.sqrt(float(np.sum(resid ** 2)) / max(k.size - 2, 1) / sxx) if k.size > 2 else 0.0
    se_mc = 0.0
    if sems is not None:
        sy = np.asarray(sems, dtype=float) / (np.asarray(means, dtype=float) * math.log(2.0))
        se_mc = math.sqrt(float(np.sum((kc / sxx) ** 2 * sy ** 2)))
    return slope, max(se_res, se_mc)


def tail_decay_experiment(model: str, n: int, l: int, scales, replicas: int, rng_seed: int,
                          r0: float, j_max: int = 20, sampler=None) -> TailRegression:
    """Monte Carlo E|tau_l(2^k)| for k in ``scales`` and the fitted dyadic slope.

    ``sampler(replica) -> points`` overrides the default model samplers.
    """
    from .core import RngState
    from .samplers import sample_gaf, sample_ginibre_eigen

    scales = sorted(int(k) for k in scales)
    usable = [k for k in scales if 2 ** k * 3 * r0 <= 0.7 * math.sqrt(n)]
    if len(usable) < 3:
        raise InsufficientScale(f"{len(usable)} usable dyadic scales, need >= 3 "
                                f"(2^k 3 r0 <= 0.7 sqrt(n) = {0.7 * math.sqrt(n):.3g})")
    if sampler is None:
        if model == "ginibre":
            def sampler(i):
                return sample_ginibre_eigen(n, RngState(rng_seed, i)).points
        elif model == "gaf":
            def sampler(i):
                return sample_gaf(n, RngState(rng_seed, i)).points
        else:
            raise ValueError(f"unknown model {model!r}")
    part = build_partition(r0, j_max)
    vals = np.zeros((replicas, len(usable)))
    rows = []
    for i in range(replicas):
        rep = inverse_power_sums(sampler(i), part, l)
        for c, k in enumerate(usable):
            vals[i, c] = abs(rep.tau[(l, k)])
            rows.append((i, l, k, vals[i, c]))
    means = vals.mean(axis=0)
    sems = vals.std(axis=0, ddof=1) / math.sqrt(replicas)
    slope, se = fit_log2_slope(usable, means, sems)
    return TailRegression(model, n, l, r0, usable, means.tolist(), sems.tolist(), slope, se, replicas, rows)
