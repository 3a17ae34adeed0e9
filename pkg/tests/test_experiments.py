import math

from rigid_points import experiments as ex


def test_map_replicas_order():
    assert ex.map_replicas(lambda i: i * i, 7, threads=3) == [i * i for i in range(7)]


def test_rigidity_sum_small():
    rep = ex.run_rigidity_sum([1.0, 0.5], 5, 0, n=100, r0=0.3)
    assert set(rep.summary["per_eps"]) == {"1.0", "0.5"} and len(rep.rows) == 10


def test_rigidity_sum_rejects_large_support():
    import pytest

    with pytest.raises(ValueError):
        ex.run_rigidity_sum([0.1], 2, 0, n=100, r0=0.3)


def test_rigidity_count_small():
    rep = ex.run_rigidity_count([1.0], 5, 0, predict=False)
    assert rep.summary["per_eps"]["1.0"]["n"] == ex.ginibre_degree_for(ex.build_bump(1.0, 1.0))


def test_tolerance_mcmc_gaf_single_point_is_rigid():
    rep = ex.run_tolerance_mcmc("gaf", 20, 1, 1.0, 10, 0)
    assert rep.summary["rigid"] is True


def test_diagnostics_gaf_small():
    rep = ex.run_diagnostics_gaf([20, 30], 2, 1.0, 3, 0, zeta_draws=5)
    assert set(rep.summary["per_n"]) == {"20", "30"}
    assert all(v["dratio_p95"] >= 0 for v in rep.summary["per_n"].values())


def test_ratio_envelope_small():
    rep = ex.run_ratio_envelope(n=64, m=2, r0=math.sqrt(2), delta=0.1, pairs=200, calibration_pairs=100,
                                draws=20, seed=0)
    assert 0 <= rep.summary["coverage"] <= 1 and rep.summary["k_fit"] > 0


def test_variance_quadrature_small():
    rep = ex.run_variance_quadrature([2.0], [16], 0, mc_replicas=0)
    assert rep.summary["max_ratio"] == 1.0
