import math
import warnings

import numpy as np
import pytest

from bimix import clouds
from bimix.effective import (ActivityMode, PenetrableW, colloid_pair_term_quadrature, dzhat_dzR_identity,
                             higher_body_threshold, w_J_cloud_series, w_J_penetrable, zhat)
from bimix.geometry import BoxSpec, ball_volume, lens_volume
from bimix.interactions import MixtureParams

P = MixtureParams(1.0, 0.1, 1.0, 0.1)


def test_zhat_penetrable_closed_form():
    res = zhat(P)
    assert res.value == pytest.approx(0.5726228, abs=1e-7)
    assert res.exponent == pytest.approx(-0.1 * ball_volume(1.1))
    assert zhat(P.with_(z_r=0.0)).value == 1.0


def test_zhat_linear_in_zR():
    lhs, rhs = dzhat_dzR_identity(P)
    assert lhs == pytest.approx(rhs, rel=1e-8)


def test_zhat_periodic_ratio_equals_closed_form():
    p = P.with_(box=BoxSpec(6.0))
    assert zhat(p, mode="finite_volume_ratio").value == pytest.approx(zhat(P).value)


def test_zhat_free_box_corner_sees_less_exclusion():
    p = P.with_(box=BoxSpec(6.0, "free"))
    corner = zhat(p, mode="finite_volume_ratio", x=[0, 0, 0], samples=100_000)
    assert corner.value > zhat(P).value


def test_colloid_pair_term_mc_vs_quadrature():
    p = P.with_(model="colloid")
    quad = colloid_pair_term_quadrature(p)
    mc = clouds.zeta_integral(p, 200_000, seed=4, k_only=2)
    assert quad > 0
    assert mc.agrees_with(quad, 4)


def test_colloid_zhat_first_order_matches_penetrable():
    p = P.with_(model="colloid")
    res = zhat(p, truncation=1)
    assert res.value == pytest.approx(zhat(P).value, rel=1e-12)


def test_colloid_zhat_truncation_warning():
    p = MixtureParams(1.0, 0.1, 1.0, 8.0, model="colloid")
    with pytest.warns(clouds.TruncationWarning):
        zhat(p, truncation=2, samples=20_000)


def test_w2_penetrable_at_contact():
    w = w_J_penetrable([[0, 0, 0], [2.0, 0, 0]], P)
    assert w.value == pytest.approx(-0.1 * lens_volume(1.1, 2.0))
    assert w.value == pytest.approx(-0.0067021, abs=1e-7)


def test_higher_body_terms_vanish_below_threshold():
    assert higher_body_threshold() == pytest.approx(2 / math.sqrt(3) - 1)
    tri = np.array([[0, 0, 0], [2.0, 0, 0], [1.0, math.sqrt(3), 0]])
    assert w_J_penetrable(tri, P).value == 0.0
    big = P.with_(r=0.3)
    assert w_J_penetrable(tri, big, samples=100_000).value > 0


def test_w2_cloud_series_matches_exact():
    w = w_J_cloud_series([[0, 0, 0], [2.0, 0, 0]], P, samples=100_000, seed=1)
    assert abs(w.value + 0.1 * lens_volume(1.1, 2.0)) <= 4 * w.error


def test_w_provider_derivative():
    W = PenetrableW(P)
    xs = [[0, 0, 0], [2.05, 0, 0]]
    assert W(xs) == pytest.approx(P.z_r * W.dW(xs))


def test_unknown_mode_rejected():
    with pytest.raises(ValueError):
        zhat(P, mode="nope")
    with pytest.raises(ValueError):
        zhat(P.with_(model="colloid"), mode=ActivityMode.PENETRABLE_EXACT)
