import numpy as np
import pytest

from oracles import codebook, codeword_entropy_mixed, rm_generator
from rmx.channels import KinkError, bec_family, interpolate, make_bec, make_bsc, perfect_channel
from rmx.gexit import (Curve, Extended, GridTooCoarse, SecondLook, area_integral, ber_direct, bridge_reports,
                       cumulative_integral, gexit_augmented, gexit_curve, gexit_diff_lower_bound, gexit_fd,
                       gexit_series, gexit_truncated, gii_fd, gij_integral_check, kink_grid, mmse_curve,
                       mmse_direct, two_look_direct, two_look_entropy, two_look_series)
from rmx.inference import bit_statistics
from rmx.rm_code import build_code, rate
from rmx.series import h_b

BSC_FAM = interpolate(make_bsc(0.11))


@pytest.mark.parametrize("t", [0.1, 0.2, 0.6, 0.85])
def test_series_matches_oracle_difference(t):
    code, words, h = build_code(1, 2), codebook(rm_generator(1, 2)), 1e-4

    def H(s):
        cs, ct = BSC_FAM.channel_at(s), BSC_FAM.channel_at(t)
        return codeword_entropy_mixed(words, [(cs.llr, cs.prob)] + [(ct.llr, ct.prob)] * 3)

    oracle = (H(t + h) - H(t - h)) / (2 * h)
    assert gexit_series(code, BSC_FAM, t, 0) == pytest.approx(oracle, abs=1e-7)
    assert gexit_fd(code, BSC_FAM, t, 0, h) == pytest.approx(oracle, abs=1e-9)


def test_truncated_series_agrees_with_closed_form():
    code = build_code(1, 3)
    for t in (0.15, 0.5, 0.9):
        s = gexit_truncated(code, BSC_FAM, t, 0)
        assert abs(s.value - gexit_series(code, BSC_FAM, t, 0)) <= s.tail_bound + 1e-13


def test_fd_guards():
    code = build_code(1, 2)
    with pytest.raises(KinkError):
        gexit_fd(code, BSC_FAM, BSC_FAM.mstar, 0)
    with pytest.raises(ValueError):
        gexit_fd(code, BSC_FAM, 0.5, 0, h=1e-12)
    with pytest.raises(ValueError):
        gexit_fd(code, BSC_FAM, 0.99995, 0)


def test_bec_gexit_is_extrinsic_erasure():
    code = build_code(1, 3)
    fam = bec_family()
    st = bit_statistics(code, fam, 0)
    for t in np.linspace(0, 1, 41):
        for side in ("-", "+"):
            assert gexit_series(code, fam, t, 0, side) == pytest.approx(st.mmse(t), abs=1e-13)


@pytest.mark.parametrize("r,m", [(0, 2), (1, 2), (1, 3), (2, 3)])
@pytest.mark.parametrize("fam", [bec_family(), BSC_FAM], ids=["bec", "bsc"])
def test_area_theorem(r, m, fam):
    code = build_code(r, m)
    assert area_integral(gexit_curve(code, fam, 0, 2001)) == pytest.approx(float(code.rate), abs=1e-9)


def test_kink_grid_duplicates_kink():
    grid, sides = kink_grid(BSC_FAM, 2001)
    assert len(grid) == 2002
    j = sides.index("-")
    assert sides[j + 1] == "+" and grid[j] == grid[j + 1] == BSC_FAM.mstar
    assert all(s == "" for k, s in enumerate(sides) if k not in (j, j + 1))
    g, s = kink_grid(bec_family(), 101)
    assert len(g) == 102 and g[s.index("-")] == 0.5


def test_grid_too_coarse():
    with pytest.raises(GridTooCoarse):
        area_integral(Curve(np.linspace(0, 1, 5), np.zeros(5), [""] * 5))
    with pytest.raises(GridTooCoarse):
        gexit_curve(build_code(1, 2), BSC_FAM, 0, 5)


def test_quadrature_on_known_functions():
    x = np.linspace(0, 1, 101)
    c = Curve(x, x ** 2, [""] * x.size)
    assert area_integral(c) == pytest.approx(1 / 3, abs=1e-12)
    assert cumulative_integral(c)[-1] == pytest.approx(1 / 3, abs=1e-12)
    # step at a duplicated point integrates exactly
    x = np.concatenate([np.linspace(0, 0.3, 31), np.linspace(0.3, 1, 71)])
    sides = [""] * 30 + ["-", "+"] + [""] * 70
    y = np.where(np.arange(x.size) <= 30, 1.0, 2.0)
    assert area_integral(Curve(x, y, sides)) == pytest.approx(0.3 + 1.4, abs=1e-13)


def test_extended_gap_equals_rate_loss():
    code = build_code(1, 2)
    for fam in (BSC_FAM, bec_family()):
        g = gexit_curve(code, fam, 0, 2001)
        ge = gexit_curve(code, fam, 0, 2001, Extended(1))
        assert np.all(g.values - ge.values >= -1e-12)
        gap = area_integral(Curve(g.grid, g.values - ge.values, g.sides))
        assert gap == pytest.approx(float(rate(1, 2) - rate(1, 3)), abs=1e-9)


def test_second_look_integral_bound():
    code = build_code(1, 3)
    vals = []
    for j in (1, 2, 7):
        rep = gij_integral_check(code, bec_family(), 0, j, 2001)
        assert rep.passed
        vals.append(rep.notes["value"])
    assert max(vals) - min(vals) <= 1e-9


def test_gii_is_twice_second_look_gexit():
    code = build_code(1, 2)
    for t in (0.2, 0.6):
        assert gii_fd(code, BSC_FAM, t, 0) == pytest.approx(2 * gexit_augmented(code, BSC_FAM, t, 0, SecondLook(0)),
                                                            abs=1e-8)


def test_second_look_lowers_gexit():
    code = build_code(1, 2)
    for t in np.linspace(0.05, 0.95, 10):
        lhs, rhs = gexit_diff_lower_bound(code, BSC_FAM, t, 0, SecondLook(1))
        assert lhs >= rhs - 1e-12 and rhs >= -1e-15


@pytest.mark.parametrize("fam", [bec_family(), BSC_FAM], ids=["bec", "bsc"])
def test_bridges(fam):
    grid, sides = kink_grid(fam, 201)
    for rep in bridge_reports(build_code(1, 3), fam, 0, grid, sides):
        assert rep.passed, rep.summary()


def test_curves_monotone_and_bounded():
    m = mmse_curve(build_code(1, 3), BSC_FAM, 0, 401)
    assert m.is_nondecreasing() and m.values[0] == pytest.approx(0.0, abs=1e-15)
    assert m.values[-1] == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("y,u", [(make_bsc(0.11), make_bsc(0.3)), (make_bec(0.3), make_bsc(0.2)),
                                 (make_bsc(0.2), make_bec(0.6)), (make_bsc(0.05), perfect_channel())])
def test_two_look_series_vs_enumeration(y, u):
    assert two_look_entropy(y, u) == pytest.approx(two_look_direct(y, u), abs=1e-12)


def test_two_look_examples():
    y = make_bsc(0.11)
    assert two_look_entropy(y) == pytest.approx(h_b(0.11), abs=1e-12)
    for mu in (0.0, 0.3, 0.9):
        assert two_look_entropy(make_bec(0.4), ([mu], [1.0])) == pytest.approx(0.4 * h_b((1 + mu) / 2), abs=1e-12)
    # moments of the side law given explicitly stop at K with a tail bound
    u = make_bsc(0.3)
    s = [float(np.sum(u.prob * u.tanh ** (2 * k))) for k in range(1, 2001)]
    res = two_look_series(y, side_moments=s)
    assert abs(res.value - two_look_direct(y, u)) <= res.tail_bound + 1e-12


def test_direct_estimators():
    assert ber_direct(make_bsc(0.2)) == pytest.approx(0.2)
    assert ber_direct(make_bec(0.4)) == pytest.approx(0.2)
    assert mmse_direct(None, 0.6) == pytest.approx(0.64)
    assert mmse_direct(make_bec(0.25)) == pytest.approx(0.25)
