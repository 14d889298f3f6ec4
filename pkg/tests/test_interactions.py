import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bimix import interactions as it
from bimix.effective import PenetrableW
from bimix.estimates import rng_for
from bimix.geometry import BoxSpec, lens_volume
from bimix.interactions import Cloud, Configuration, MixtureParams

P = MixtureParams(1.0, 0.1, 0.003, 0.1)


def test_params_validation():
    with pytest.raises(ValueError):
        MixtureParams(0.1, 1.0)
    with pytest.raises(ValueError):
        MixtureParams(1.0, 0.1, box=BoxSpec(2.0))


def test_mayer_functions():
    assert it.f_large([0, 0, 0], [1.9, 0, 0], P) == -1
    assert it.f_large([0, 0, 0], [2.0, 0, 0], P) == 0
    # touching at exactly R + r is allowed
    assert it.mayer_f(([0, 0, 0], "large"), ([1.1, 0, 0], "small"), P) == 0
    assert it.mayer_f(([0, 0, 0], "large"), ([1.09, 0, 0], "small"), P) == -1
    assert it.f_small([0, 0, 0], [0.1, 0, 0], P) == 0
    col = P.with_(model="colloid")
    assert it.f_small([0, 0, 0], [0.1, 0, 0], col) == -1


def test_zeta_and_corona_surrogate():
    Y = Cloud(((0.5, 0, 0),))
    assert it.zeta([0, 0, 0], Y, P) == -1
    assert it.zeta_tilde([0, 0, 0], Y, P) == 0
    Y = Cloud(((1.0, 0, 0),))
    assert it.zeta_tilde([0, 0, 0], Y, P) == -1


def test_corona_surrogate_never_exceeds_zeta():
    rng = rng_for(0, 1)
    for _ in range(1000):
        y = rng.uniform(-1.5, 1.5, 3)
        Y = Cloud((tuple(y),))
        assert abs(it.zeta_tilde([0, 0, 0], Y, P)) <= abs(it.zeta([0, 0, 0], Y, P))


def test_ursell_small_cases():
    pts = np.array([[0, 0, 0], [0.05, 0, 0], [0, 0.05, 0]])
    col = P.with_(model="colloid")
    assert it.ursell_phi_T(pts[:1], col) == 1
    assert it.ursell_phi_T(pts[:2], col) == -1
    assert it.ursell_phi_T(pts, col) == 2


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10_000))
def test_ursell_recursion_matches_graph_sum(n, seed):
    rng = np.random.default_rng(seed)
    F = -(rng.random((n, n)) < 0.5).astype(float)
    F = np.triu(F, 1)
    F = F + F.T
    assert it.ursell_from_f(F) == pytest.approx(it.ursell_recursive(F), abs=1e-9)
    assert it.ursell_batch(F[None])[0] == pytest.approx(it.ursell_from_f(F), abs=1e-9)


def test_phi_star_examples():
    overlap = Configuration(((0, 0, 0), (1.5, 0, 0)))
    assert it.phi_star_T(overlap, P) == -1
    y = Cloud(((1.0, 0.3, 0),))
    cfg = Configuration(((0, 0, 0), (2.0, 0, 0)), (y,))
    assert it.phi_star_T(cfg, P) == 1
    assert it.phi_star_T(Configuration(((0, 0, 0),), (y,)), P) == 0


def test_tree_bound_on_double_cloud():
    # both clouds touch both stars: the only admissible graph is the 4-cycle
    y1, y2 = Cloud(((1.0, 0.3, 0),)), Cloud(((1.0, -0.3, 0),))
    cfg = Configuration(((0, 0, 0), (2.0, 0, 0)), (y1, y2))
    assert it.phi_star_T(cfg, P) == 1
    assert it.tree_majorant(cfg, P) >= 1


def test_psi_examples():
    W = PenetrableW(P)
    assert it.psi([[0, 0, 0]], P, W) == 1
    assert it.psi([[0, 0, 0], [1.5, 0, 0]], P, W) == 0
    assert it.psi([[0, 0, 0], [2.3, 0, 0]], P, W) == 1


def test_psi_T_at_contact():
    W = PenetrableW(P)
    xs = [[0, 0, 0], [2.0, 0, 0]]
    expect = math.expm1(0.1 * lens_volume(1.1, 2.0))
    assert it.psi_T(xs, P, W) == pytest.approx(expect, rel=1e-12)
    assert expect == pytest.approx(0.0067246, abs=1e-7)
    assert it.psi_T([[0, 0, 0], [1.0, 0, 0]], P, W) == -1
    assert it.psi_T([[0, 0, 0], [2.3, 0, 0]], P, W) == 0


def test_hypergraph_and_partition_agree_for_three():
    W = PenetrableW(P.with_(r=0.3))
    xs = np.array([[0, 0, 0], [2.05, 0, 0], [1.0, 1.9, 0]])
    p = P.with_(r=0.3)
    assert it.psi_T(xs, p, W, mode="hypergraph") == pytest.approx(it.psi_T(xs, p, W, mode="partition"), abs=1e-14)


@pytest.mark.parametrize("m", [2, 3])
def test_set_partition_identity(m):
    p = P.with_(r=0.3)
    W = PenetrableW(p)
    rng = rng_for(5, m)
    for _ in range(20):
        xs = it.random_large_configuration(rng, m, p)
        total, psi_val = it.set_partition_identity(xs, p, W)
        assert total == pytest.approx(psi_val, abs=1e-12)


def test_rooted_derivative_matches_difference():
    W = PenetrableW(P)
    xs = np.array([[0, 0, 0], [2.05, 0, 0]])
    h = 1e-6
    up = it.psi_T(xs, P.with_(z_r=P.z_r + h), PenetrableW(P.with_(z_r=P.z_r + h)))
    dn = it.psi_T(xs, P.with_(z_r=P.z_r - h), PenetrableW(P.with_(z_r=P.z_r - h)))
    assert it.dpsi_T_rooted(xs, P, W, W.dW) == pytest.approx((up - dn) / (2 * h), rel=1e-6)


def test_corona_surrogate_sides_on_lens_points():
    rng = rng_for(2, 2)
    for model in ("penetrable", "colloid"):
        p = MixtureParams(1.0, 0.2, 0.0, 0.1, model=model)
        for _ in range(200):
            xs = np.array([[0, 0, 0], [rng.uniform(2.0, 2.4), 0, 0]])
            Y = Cloud(((rng.uniform(0.8, 1.4), rng.uniform(-0.4, 0.4), 0),))
            l1, r1, l2, r2 = it.tildezeta_sides(xs, Y, p)
            assert l1 <= r1 and l2 <= r2
