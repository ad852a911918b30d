from fractions import Fraction
from math import log, sqrt

import numpy as np
import pytest
from scipy.integrate import quad

from rmx.bounds import (NonTransitiveCode, Psi, RateEqualsCapacity, area_bound_check, ber_mmse_sandwich,
                        ber_two_look_converse, h_b_inv, integral_decay_check, kappa, mtilde, mtilde_reports, psi,
                        rho, t_R, theorem_ber_bounds)
from rmx.channels import bec_family, capacity_of, interpolate, make_bec, make_bsc
from rmx.gexit import Curve, GridTooCoarse, mmse_curve
from rmx.rm_code import LinearCode, build_code
from rmx.series import h_b

BSC_FAM = interpolate(make_bsc(0.11))


def test_h_b_inverse():
    assert h_b_inv(0.5) == pytest.approx(0.110028, abs=1e-6)
    assert h_b_inv(0.0) == 0.0 and h_b_inv(1.0) == 0.5
    ys = np.linspace(0, 1, 201)
    assert np.max(np.abs(h_b(h_b_inv(ys)) - ys)) <= 1e-11
    x = np.linspace(0, 0.5, 101)
    assert np.max(np.abs(h_b_inv(h_b(x)) - x)) <= 1e-7
    with pytest.raises(ValueError):
        h_b_inv(1.5)


def test_psi_and_its_integral():
    assert psi(0.0) == 0.0 and psi(1.0) == pytest.approx(1.0)
    assert psi(0.5) == pytest.approx(1 - (1 - 2 * 0.110028) ** 2, abs=1e-5)
    for u in (0.1, 0.4, 0.8, 1.0):
        ref, _ = quad(lambda x: float(psi(x)), 0, u, epsabs=1e-13, limit=200)
        assert Psi(u) == pytest.approx(ref, abs=1e-9)
    xs = np.linspace(0, 0.6, 600001)
    mids = 0.5 * (xs[1:] + xs[:-1])
    assert Psi(0.6) == pytest.approx(float(np.sum(psi(mids)) * (xs[1] - xs[0])), abs=1e-8)


def test_rho_values():
    assert rho(1) == pytest.approx(6.8, abs=1e-12)
    assert rho(3) == pytest.approx((6 * log(3) + 34) / (5 * sqrt(3)), abs=1e-15)
    assert rho(3) == pytest.approx(4.687, abs=1e-3)
    assert rho(1e5) == pytest.approx(0.0652, abs=1e-4)
    with pytest.raises(ValueError):
        rho(0.5)


def test_t_R_and_kappa():
    assert t_R(bec_family(), 0.3) == pytest.approx(0.7, abs=1e-15)
    tr = t_R(BSC_FAM, 0.3)
    assert BSC_FAM.C(tr) == pytest.approx(0.3, abs=1e-14)
    assert kappa(bec_family(), 0.2) == pytest.approx(1.0)
    assert kappa(BSC_FAM, 0.1) == pytest.approx(max(BSC_FAM.Hprime(0.0), BSC_FAM.Hprime(1.0)))
    assert kappa(BSC_FAM, 0.8) == pytest.approx(BSC_FAM.Hprime(1.0))


@pytest.mark.parametrize("fam", [bec_family(), BSC_FAM], ids=["bec", "bsc"])
def test_area_bounds_hold(fam):
    code = build_code(1, 3)
    M = mmse_curve(code, fam, 0, 2001)
    up, low = area_bound_check(code, fam, M, float(code.rate))
    assert up.passed and low.passed, (up.summary(), low.summary())
    # the check is not vacuous: a rate below the code's own breaks the upper bound
    up, _ = area_bound_check(code, fam, M, 0.25)
    assert not up.passed


def test_area_bound_guards():
    code = build_code(1, 3)
    M = mmse_curve(code, BSC_FAM, 0, 101)
    with pytest.raises(NonTransitiveCode):
        area_bound_check(LinearCode(code.generator), BSC_FAM, M, 0.5)
    with pytest.raises(GridTooCoarse):
        area_bound_check(code, BSC_FAM, Curve(np.linspace(0, 1, 5), np.zeros(5), [""] * 5), 0.5)


@pytest.mark.parametrize("r,m", [(1, 2), (1, 3), (2, 3)])
def test_integral_decay(r, m):
    assert integral_decay_check(build_code(r, m), BSC_FAM, n=401).passed


def test_ber_bounds_both_regimes():
    code = build_code(1, 3)
    good = make_bsc(0.05)
    assert capacity_of(good) > 0.5
    reps = theorem_ber_bounds(code, good)
    assert [r.name for r in reps] == ["BER_UB", "MMSE_UB"] and all(r.passed for r in reps)
    bad = make_bsc(0.2)
    reps = theorem_ber_bounds(code, bad)
    assert [r.name for r in reps] == ["BER_LB", "MMSE_LB"] and all(r.passed for r in reps)
    with pytest.raises(RateEqualsCapacity):
        theorem_ber_bounds(code, make_bec(0.5))


def test_ber_mmse_sandwich():
    for fam in (bec_family(), BSC_FAM):
        for rep in ber_mmse_sandwich(build_code(1, 3), fam, 0, np.linspace(0, 1, 51)):
            assert rep.passed


@pytest.mark.parametrize("y,u,mu", [(make_bsc(0.11), make_bsc(0.3), 0.0), (make_bsc(0.2), make_bec(0.5), 0.0),
                                    (make_bec(0.3), None, 0.5), (make_bsc(0.3), make_bsc(0.01), 0.0)])
def test_two_look_converse(y, u, mu):
    assert ber_two_look_converse(y, u, mu).passed


def test_mtilde_exact():
    m = mtilde(Fraction(1, 2), Fraction(1, 10), Fraction(1, 5))
    assert m.u_star == Fraction(1, 2) + Fraction(1, 10) * Fraction(3, 10) / Fraction(2, 10)
    assert m.integral() == Fraction(1, 2)
    assert m.variance_integral() == Fraction(1, 10)
    assert m.plateau == m.upper_bound_at_tstar()
    assert all(r.passed for r in mtilde_reports(m))
    assert m(0.1) == 0.0 and m(0.5) == pytest.approx(1 / 3) and m(0.99) == 1.0


def test_mtilde_float_and_domain():
    m = mtilde(0.4, 0.05, 0.1)
    assert all(r.passed for r in mtilde_reports(m))
    with pytest.raises(ValueError):
        mtilde(0.5, 0.6, 0.0)
    with pytest.raises(ValueError):
        mtilde(0.5, 0.1, 0.45)
