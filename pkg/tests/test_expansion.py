import math
import warnings

import pytest

from bimix import expansion
from bimix.expansion import (CriterionWarning, b2_quadrature, b_m, b_m_finite_difference, db2_quadrature,
                             db_m_dzr, pressure_series, rho_R, rho_r)
from bimix.interactions import MixtureParams

HARD = MixtureParams(1.0, 0.1, 0.0, 0.0)
P = MixtureParams(1.0, 0.1, 0.003, 0.05)


def test_b1_is_one():
    assert b_m(1, P).estimate == 1.0


def test_b2_hard_sphere_value():
    assert b2_quadrature(HARD) == pytest.approx(-16.755160819145562, abs=1e-9)
    assert b2_quadrature(HARD) == pytest.approx(-0.5 * 4 * math.pi / 3 * 8, rel=1e-14)


def test_b2_mc_vs_quadrature():
    p = P.with_(z_r=0.2)
    c = b_m(2, p, 100_000, seed=1)
    assert abs(c.estimate - b2_quadrature(p)) <= 3.5 * c.stderr


def test_b3_hard_sphere_limit():
    # hard spheres of diameter 2: b_3 = 2 B_2^2 - B_3 / 2 from the virial coefficients
    B2 = 2 * math.pi / 3 * 2 ** 3
    B3 = 5 * math.pi ** 2 / 18 * 2 ** 6
    c = b_m(3, HARD, 100_000, seed=2)
    assert abs(c.estimate - (2 * B2 ** 2 - B3 / 2)) <= 4 * c.stderr


def test_methods_agree_for_three():
    p = P.with_(r=0.3, z_r=0.1)
    a = b_m(3, p, 2_000, seed=5, method="partition")
    b = b_m(3, p, 2_000, seed=5, method="hypergraph")
    assert a.estimate == pytest.approx(b.estimate, rel=1e-9)


def test_db2_three_ways():
    p = P.with_(z_r=0.1)
    quad = db2_quadrature(p)
    rooted = db_m_dzr(2, p, 100_000, seed=3)
    fd = b_m_finite_difference(2, p, 1e-3, 100_000, seed=4)
    assert abs(rooted.estimate - quad) <= 4 * rooted.stderr
    assert abs(fd.value - quad) <= 4 * fd.stderr


def test_pressure_series_structure():
    res = pressure_series(P, M=2)
    assert res.offset == P.z_r
    assert res.total == pytest.approx(P.z_r + sum(t[1] for t in res.terms))
    assert res.criterion_satisfied
    assert res.majorant["holds"]


def test_series_gate_warns_outside_region():
    far = P.with_(z_R=1.0)
    with pytest.warns(CriterionWarning):
        res = pressure_series(far, M=2)
    assert not res.criterion_satisfied
    with warnings.catch_warnings():
        warnings.simplefilter("error", CriterionWarning)
        with pytest.raises(CriterionWarning):
            pressure_series(far, M=2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert not pressure_series(far, M=2, force=True).criterion_satisfied


def test_density_first_order():
    res = rho_R(P, M=1)
    zh = math.exp(-P.z_r * P.excluded_volume) * P.z_R
    assert res.total == pytest.approx(zh)


def test_rho_r_majorant_reported():
    res = rho_r(P, M=2, samples=50_000)
    assert res.majorant["holds"]
    assert res.total < P.z_r


def test_rho_r_rejects_colloid():
    with pytest.raises(ValueError):
        rho_r(P.with_(model="colloid"), M=2)
