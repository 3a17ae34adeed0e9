import math

import numpy as np
import pytest

from rigid_points.core import OriginPoint, RngState
from rigid_points.powersums import (
    InsufficientScale,
    direct_outside_sum,
    fit_log2_slope,
    inverse_power_sums,
    tail_decay_experiment,
)
from rigid_points.samplers import sample_gaf
from rigid_points.testfns import build_partition


def test_partition_sums_equal_direct_sums():
    s = sample_gaf(80, RngState(2))
    part = build_partition(0.5)
    rep = inverse_power_sums(s.points, part, l_max=4)
    for l in range(1, 5):
        assert abs(rep.S[l] - direct_outside_sum(s.points, 0.5, l)) <= 1e-9 * max(1, abs(rep.S[l]))
        assert abs(rep.alpha[l] - (rep.S[l] + rep.inside[l])) <= 1e-9 * max(1, abs(rep.alpha[l]))
    assert rep.S_tilde[3] >= abs(rep.S[3])
    assert rep.x_n == abs(rep.S[1]) + abs(rep.S[2]) + rep.S_tilde[3]


def test_tails_are_nested():
    s = sample_gaf(80, RngState(3))
    rep = inverse_power_sums(s.points, build_partition(0.5, j_max=8), 2)
    # phi_{2^8} starts at 128 r0 = 64, beyond every zero of this sample
    assert np.max(np.abs(s.points)) < 64 and rep.tau[(2, 8)] == 0
    W = build_partition(0.5, j_max=8).weights(np.abs(s.points))
    assert abs(rep.tau[(1, 1)] - np.sum(W[1:] @ (s.points ** -1.0))) <= 1e-12


def test_errors():
    part = build_partition(1.0, j_max=2)
    with pytest.raises(OriginPoint):
        inverse_power_sums([0.0, 2.0], part)
    with pytest.raises(ValueError):
        inverse_power_sums([100.0], part)
    with pytest.raises(InsufficientScale):
        tail_decay_experiment("gaf", 100, 2, [1, 2, 3, 4], 10, 0, r0=1.0)


def test_fit_slope_exact_line():
    slope, se = fit_log2_slope([1, 2, 3], [2.0 ** -1, 2.0 ** -2, 2.0 ** -3])
    assert slope == pytest.approx(-1.0) and se == pytest.approx(0.0, abs=1e-12)
    slope, se = fit_log2_slope([1, 2, 3], [1.0, 0.5, 0.25], [0.01, 0.01, 0.01])
    assert se > 0


def test_tail_experiment_with_custom_sampler():
    # uniform annulus points: decay of |tau| is deterministic enough to have a negative slope
    def sampler(i):
        gen = np.random.default_rng(i)
        r = np.sqrt(gen.uniform(0.25 ** 2, 6.0 ** 2, 400))
        return r * np.exp(2j * math.pi * gen.random(400))

    reg = tail_decay_experiment("custom", 100, 2, [1, 2, 3], 30, 0, r0=0.25, sampler=sampler)
    assert reg.scales == [1, 2, 3] and reg.slope < 0 and len(reg.rows) == 90
    assert len(reg.log2_means) == 3
