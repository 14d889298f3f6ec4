import math

import numpy as np
import pytest

pytestmark = pytest.mark.filterwarnings("ignore::bimix.oracle.OracleWarning")

from bimix import oracle
from bimix.geometry import BoxSpec, ball_volume, lens_volume
from bimix.interactions import MixtureParams

BOX = BoxSpec(6.0)
P = MixtureParams(1.0, 0.1, 0.003, 0.05, box=BOX)


def test_excluded_volume_exact_cases():
    one = oracle.excluded_volume([[3, 3, 3]], P)
    assert one.value == pytest.approx(ball_volume(1.1))
    two = oracle.excluded_volume([[1, 1, 1], [3.05, 1, 1]], P)
    assert two.value == pytest.approx(2 * ball_volume(1.1) - lens_volume(1.1, 2.05))


def test_excluded_volume_paths_agree():
    xs = np.array([[0.5, 0.5, 0.5], [2.55, 0.5, 0.5], [1.5, 2.3, 0.5]])
    ie = oracle.excluded_volume(xs, P)
    hit = oracle.free_volume_hit_test(xs, P, 200_000, seed=3)
    assert hit.agrees_with(BOX.volume - ie.value, 4)


def test_pure_solvent_limit():
    # with no large spheres the grand partition function is exp(z_r V)
    cfg = oracle.OracleConfig(BOX, N1_max=0, N2_max=40, samples_per_term=2000, seed=1)
    res = oracle.run_oracle(P.with_(z_R=0.0), cfg)
    assert res.log_xi.value == pytest.approx(P.z_r * BOX.volume, rel=1e-12)
    assert res.rho_r.value == pytest.approx(P.z_r, rel=1e-6)


def test_single_large_sphere_first_order():
    # N1 <= 1: Xi = exp(z_r V) (1 + z_R V exp(-z_r |B|))
    cfg = oracle.OracleConfig(BOX, N1_max=1, N2_max=40, samples_per_term=5000, seed=1)
    res = oracle.run_oracle(P, cfg)
    zh = P.z_R * math.exp(-P.z_r * ball_volume(1.1))
    expect = P.z_r * BOX.volume + math.log1p(zh * BOX.volume)
    assert res.log_xi.agrees_with(expect, 4, slack=1e-9)


def test_rao_blackwell_and_raw_paths_agree():
    cfg = oracle.OracleConfig(BOX, N1_max=3, N2_max=40, samples_per_term=20_000, seed=5)
    res = oracle.run_oracle(P, cfg)
    assert res.log_xi.agrees_with(res.log_xi_raw, 4)


def test_mixed_ratio_two_spheres():
    cfg = oracle.OracleConfig(BOX, samples_per_term=50_000, seed=2)
    direct, eff = oracle.mixed_ratio_check(P, cfg, [[1, 1, 1], [3.05, 1, 1]])
    assert direct.agrees_with(eff, 4)


def test_solvent_log_ratio_periodic_penetrable():
    est = oracle.solvent_log_ratio(P, [3, 3, 3], samples=20_000, seed=1)
    assert est.agrees_with(-P.z_r * ball_volume(1.1), 4)


def test_deterministic_for_fixed_seed():
    cfg = oracle.OracleConfig(BOX, N1_max=2, N2_max=30, samples_per_term=5000, seed=9)
    a = oracle.run_oracle(P, cfg).log_xi
    b = oracle.run_oracle(P, cfg).log_xi
    assert a.value == b.value and a.stderr == b.stderr


def test_config_validation():
    with pytest.raises(ValueError):
        oracle.OracleConfig(BOX, N1_max=-1)
