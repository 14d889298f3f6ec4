import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bimix import convergence as cv
from bimix.geometry import ball_volume
from bimix.interactions import MixtureParams

P = MixtureParams(1.0, 0.1, 0.0, 0.1)
# reference values recomputed in 30-digit arithmetic
ZHAT_EASY = 0.008364771173165897
ZR_EASY = 0.014607819317672625
ZR_KP = 0.006286307168926241
RATIO = 2.323752073376296


def test_closed_forms():
    zh, zR = cv.max_zhat_easy(P)
    assert zh == pytest.approx(ZHAT_EASY, rel=1e-6)
    assert zR == pytest.approx(ZR_EASY, rel=1e-6)
    assert cv.max_zR_kp(P) == pytest.approx(ZR_KP, rel=1e-6)
    assert cv.improvement_ratio(P) == pytest.approx(RATIO, rel=1e-6)
    assert zR / cv.max_zR_kp(P) == pytest.approx(cv.improvement_ratio(P), rel=1e-12)


def test_hard_sphere_limit_coincides():
    p = P.with_(z_r=0.0)
    assert cv.max_zR_kp(p) == pytest.approx(math.exp(-1) / ball_volume(2.0))
    assert cv.improvement_ratio(p) == 1.0


def test_easy_witness_is_tight():
    zh, _ = cv.max_zhat_easy(P)
    assert cv.check_easy(P, zh * (1 - 1e-9)).satisfied
    assert not cv.check_easy(P, zh * 1.01).satisfied


def test_abstract_conditions_match_closed_volumes():
    a, A = cv.easy_witness(P)
    zh, _ = cv.max_zhat_easy(P)
    lhs1, lhs2 = cv.abstract_condition_sides(P, zh, a, A)
    w = cv.check_col1(P, zh, a, A)
    assert lhs1 == pytest.approx(w.detail["lhs1"], rel=1e-10)
    assert lhs2 == pytest.approx(w.detail["lhs2"], rel=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.5, 2.0), st.floats(0.02, 0.5), st.floats(0.0, 0.3), st.floats(0.01, 3.0),
       st.floats(0.01, 3.0), st.floats(0.0, 1.0))
def test_volume_scaling_witness_implies_bound(R, h, zr, a, extra, frac):
    p = MixtureParams(R, h * R, 0.0, zr)
    v2R, _, vex = cv._volumes(p)
    A = vex * math.exp(a) * zr + extra
    zmax = min(extra / (v2R * math.exp(A)), a / (vex * math.exp(A)))
    zR = frac * zmax
    assert cv.check_kp_u1u2(p, a, A, zR).satisfied
    assert zR <= cv.max_zR_kp(p) * (1 + 1e-12)


def test_ratio_nondecreasing_in_zr():
    rows = cv.region_sweep(np.linspace(0, 0.2, 41))
    ratios = [r["ratio"] for r in rows]
    assert min(ratios) >= 1.0
    assert all(b >= a for a, b in zip(ratios, ratios[1:]))


def test_sweep_csv_header():
    text = cv.sweep_csv(cv.region_sweep(np.linspace(0, 0.1, 11)))
    lines = text.strip().splitlines()
    assert lines[0] == "zr,R,r,zhat_easy,zR_easy,zR_kp,ratio"
    assert len(lines) == 12


def test_smallest_c():
    q = 0.2
    c = cv.smallest_c(q)
    assert c * math.exp(-c) == pytest.approx(q)
    assert cv.smallest_c(0.5) is None
    assert cv.smallest_c(0.0) == 0.0


def test_colloid_witness_found_and_verified():
    p = MixtureParams(1.0, 0.1, 0.0, 0.05, model="colloid")
    w = cv.witness_search_hs(p, 0.001)
    assert w.satisfied
    c = w.constants
    assert cv.check_hs(p, 0.001, c["a"], c["b"], c["c"], strict=True).satisfied


def test_colloid_default_construction_bound():
    p = MixtureParams(1.0, 0.1, 0.0, 0.05, model="colloid")
    b, c, alpha = cv.default_construction(p)
    bound = cv.hs_zhat_bound(p, b, c, alpha)
    a = alpha * p.corona * p.z_r
    assert cv.check_hs(p, 0.99 * bound, a, b, c, strict=True).satisfied


def test_colloid_precondition():
    zr = 1.0 / (math.e * ball_volume(0.2))
    with pytest.raises(cv.PreconditionError):
        cv.witness_search_hs(MixtureParams(1.0, 0.1, 0.0, 1.01 * zr, model="colloid"), 1e-6)


def test_colloid_pure_hard_spheres():
    p = MixtureParams(1.0, 0.1, 0.0, 0.0, model="colloid")
    assert cv.witness_search_hs(p, 0.9 * math.exp(-1) / ball_volume(2.0)).satisfied


def test_pair_criterion_is_flagged_nonrigorous():
    res = cv.pair_criterion_bound(P)
    assert res["rigorous"] is False
    assert res["multi_body_vanish"]
    assert res["zhat"] > 0


def test_negative_constants_rejected():
    with pytest.raises(ValueError):
        cv.ConvergenceWitness(cv.Criterion.EASY, {"a": -1.0})
