import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bimix.geometry import (BallSpec, BoxSpec, ball_box_overlap_volume, ball_volume, balls_intersect,
                            corona_volume, distance, grid_intersection_volume, k_intersection_volume,
                            lens_volume, lens_volume_array, min_enclosing_radius, periodic_distance,
                            shell_fraction, two_ball_intersection_volume, unit_ball_volume)


def test_unit_ball_volumes():
    assert unit_ball_volume(1) == pytest.approx(2.0)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)


def test_lens_limits():
    assert lens_volume(1.1, 0.0) == pytest.approx(ball_volume(1.1))
    assert lens_volume(1.1, 2.2) == 0.0
    assert lens_volume(1.1, 5.0) == 0.0


def test_lens_at_contact_matches_closed_form():
    R, r = 1.0, 0.1
    assert lens_volume(R + r, 2 * R) == pytest.approx(2 * math.pi / 3 * r * r * (3 * R + 2 * r), rel=1e-13)
    assert lens_volume(R + r, 2 * R) == pytest.approx(0.0670206432, rel=1e-8)


@given(st.floats(0.1, 5.0), st.floats(0.0, 1.0))
def test_lens_monotone_in_distance(rho, frac):
    d1 = frac * 2 * rho
    d2 = min(d1 + 0.01 * rho, 2 * rho)
    assert lens_volume(rho, d2) <= lens_volume(rho, d1) + 1e-12


def test_lens_array_matches_scalar():
    ds = np.linspace(0, 3, 31)
    arr = lens_volume_array(1.1, ds)
    assert np.allclose(arr, [lens_volume(1.1, d) for d in ds])


def test_two_ball_equal_radii_matches_lens():
    assert two_ball_intersection_volume(1.1, 1.1, 1.5) == pytest.approx(lens_volume(1.1, 1.5))
    # small ball swallowed by the big one
    assert two_ball_intersection_volume(2.0, 0.5, 0.5) == pytest.approx(ball_volume(0.5))


def test_corona_and_shell_fraction():
    R, r = 1.0, 0.1
    assert corona_volume(R, r) == pytest.approx(ball_volume(R + r) - ball_volume(R - r))
    assert shell_fraction(0.1) == pytest.approx(corona_volume(1.0, 0.1) / ball_volume(2.0))


def test_periodic_distance_wraps():
    assert periodic_distance([0.1, 0, 0], [5.9, 0, 0], 6.0) == pytest.approx(0.2)
    box = BoxSpec(6.0)
    assert distance([0.1, 0, 0], [5.9, 0, 0], box) == pytest.approx(0.2)
    assert distance([0.1, 0, 0], [5.9, 0, 0]) == pytest.approx(5.8)


def test_min_enclosing_radius_and_intersection():
    tri = np.array([[0, 0, 0], [2, 0, 0], [1, math.sqrt(3), 0]], dtype=float)
    assert min_enclosing_radius(tri) == pytest.approx(2 / math.sqrt(3))
    assert balls_intersect(tri, 1.2)
    assert not balls_intersect(tri, 1.1)


def test_mc_intersection_matches_lens():
    balls = [BallSpec([0, 0, 0], 1.1), BallSpec([1.5, 0, 0], 1.1)]
    est = k_intersection_volume(balls, 200_000, seed=3)
    assert est.agrees_with(lens_volume(1.1, 1.5), 4)


def test_grid_matches_lens():
    balls = [BallSpec([0, 0, 0], 1.1), BallSpec([1.2, 0.3, -0.2], 1.1)]
    d = float(np.linalg.norm([1.2, 0.3, -0.2]))
    assert grid_intersection_volume(balls, h=0.004) == pytest.approx(lens_volume(1.1, d), rel=2e-4)


def test_ball_box_overlap_interior_and_corner():
    inside = ball_box_overlap_volume([3, 3, 3], 1.0, 6.0, 50_000, seed=1)
    assert inside.value == pytest.approx(ball_volume(1.0))
    corner = ball_box_overlap_volume([0, 0, 0], 1.0, 6.0, 200_000, seed=1)
    assert corner.agrees_with(ball_volume(1.0) / 8, 4)


def test_box_validation():
    with pytest.raises(ValueError):
        BoxSpec(-1.0)
