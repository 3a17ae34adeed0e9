import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rigid_points.core import (
    BoundaryPoint,
    Disk,
    OriginPoint,
    PointConfiguration,
    RngState,
    check_no_origin,
    sample_standard_complex_gaussian,
    split_configuration,
    standard_complex_gaussian,
)


def test_gaussian_moments():
    xi = standard_complex_gaussian(RngState(3), 10**6)
    assert 0.997 <= np.mean(np.abs(xi) ** 2) <= 1.003
    assert abs(np.mean(xi)) <= 0.003
    # real and imaginary parts each carry variance 1/2
    assert abs(np.var(xi.real) - 0.5) < 0.003 and abs(np.var(xi.imag) - 0.5) < 0.003


def test_same_state_same_draws():
    a = [sample_standard_complex_gaussian(g) for g in [RngState(1, 0).generator()] for _ in range(100)]
    gen = RngState(1, 0).generator()
    b = [sample_standard_complex_gaussian(gen) for _ in range(100)]
    gen2 = RngState(1, 0).generator()
    c = [sample_standard_complex_gaussian(gen2) for _ in range(100)]
    assert b == c
    assert len(a) == 100


def test_streams_differ_and_are_uncorrelated():
    a = standard_complex_gaussian(RngState(1, 0), 20000)
    b = standard_complex_gaussian(RngState(1, 1), 20000)
    assert not np.allclose(a[:10], b[:10])
    assert abs(np.mean(a * np.conj(b))) < 4 / np.sqrt(20000)


def test_child_streams_are_deterministic():
    assert RngState(5, 2).child(3) == RngState(5, 2).child(3)
    assert RngState(5, 2).child(3) != RngState(5, 2).child(4)


def test_rng_state_rejects_negative_seed():
    with pytest.raises(ValueError):
        RngState(-1)


def test_split_small_example():
    inside, outside = split_configuration(PointConfiguration([0.5, 2.0]), Disk(1.0))
    assert inside.tolist() == [0.5] and outside.tolist() == [2.0]


def test_split_empty():
    inside, outside = split_configuration(PointConfiguration([]), Disk(1.0))
    assert inside.size == 0 and outside.size == 0


def test_split_boundary_point_raises():
    with pytest.raises(BoundaryPoint):
        split_configuration(PointConfiguration([1.0 + 0j]), Disk(1.0))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False), max_size=100))
def test_split_is_a_partition(points):
    pts = np.array(points, dtype=complex)
    if np.any(np.abs(np.abs(pts) - 1.5) <= 1e-14):
        return
    inside, outside = split_configuration(pts, Disk(1.5))
    assert inside.size + outside.size == pts.size
    assert sorted(map(complex, np.concatenate([inside, outside])), key=lambda z: (z.real, z.imag)) == \
        sorted(map(complex, pts), key=lambda z: (z.real, z.imag))


def test_random_hundred_points_partition():
    pts = standard_complex_gaussian(RngState(9), 100)
    inside, outside = PointConfiguration(pts).split(Disk(1.0))
    assert inside.size + outside.size == 100


def test_configuration_rejects_nan():
    with pytest.raises(ValueError):
        PointConfiguration([complex(np.nan, 0)])


def test_configuration_is_read_only():
    cfg = PointConfiguration([1j])
    with pytest.raises(ValueError):
        cfg.points[0] = 0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(allow_nan=False, allow_infinity=False),
                          st.floats(allow_nan=False, allow_infinity=False)), max_size=20))
def test_json_round_trip_is_bit_exact(pairs):
    cfg = PointConfiguration([complex(a, b) for a, b in pairs])
    back, r0, meta = PointConfiguration.from_json(cfg.to_json(0.75, {"model": "gaf"}))
    assert r0 == 0.75 and meta == {"model": "gaf"}
    assert back.points.tobytes() == cfg.points.tobytes()
    assert set(json.loads(cfg.to_json(1.0))) == {"r0", "points"}


def test_disk_validation():
    with pytest.raises(ValueError):
        Disk(0.0)
    with pytest.raises(ValueError):
        Disk(1.0, 1j)


def test_origin_check():
    check_no_origin([1.0, 2j])
    with pytest.raises(OriginPoint):
        check_no_origin([1.0, 1e-15])
