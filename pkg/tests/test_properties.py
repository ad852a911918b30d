import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bit_stats, codebook, rm_generator
from rmx.channels import SymmetricChannel, capacity_of, entropy_direct, interpolate, make_bsc, mmse_of, q_moment
from rmx.harness import RunConfig, parse_channel_spec
from rmx.inference import bit_statistics
from rmx.rm_code import build_code, puncture, same_codebook
from rmx.series import h_b

FAST = settings(max_examples=40, deadline=None)


@st.composite
def bms_channels(draw):
    """Random finite L-densities: each atom l > 0 carries its mirror -l with weight e^-l times its own."""
    n = draw(st.integers(1, 4))
    mags = draw(st.lists(st.floats(0.0, 12.0), min_size=n, max_size=n))
    mass = np.array(draw(st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n)))
    perfect = draw(st.booleans())
    mass = mass / (mass.sum() + (0.3 if perfect else 0.0))
    llr, prob = [], []
    for l, w in zip(mags, mass):
        llr += [l, -l]
        prob += [w / (1 + np.exp(-l)), w * np.exp(-l) / (1 + np.exp(-l))]
    if perfect:
        llr.append(np.inf)
        prob.append(1.0 - sum(prob))
    return SymmetricChannel(llr, prob)


@FAST
@given(bms_channels())
def test_channel_functionals_in_range(ch):
    assert 0.0 <= mmse_of(ch) <= 1.0
    H = entropy_direct(ch)
    assert -1e-12 <= H <= 1.0 + 1e-12
    assert abs(capacity_of(ch) - (1.0 - H)) <= 1e-10
    # entropy sandwich between the MMSE and its binary entropy image
    M = mmse_of(ch)
    assert M - 1e-12 <= H <= h_b((1 - np.sqrt(1 - M)) / 2) + 1e-12
    q = [q_moment(ch, k) for k in range(1, 6)]
    assert all(a >= b - 1e-15 for a, b in zip(q, q[1:]))


@FAST
@given(bms_channels(), st.floats(0.0, 1.0))
def test_interpolated_family_hits_its_mmse(ch, t):
    if not 0.0 < mmse_of(ch) < 1.0:
        return
    fam = interpolate(ch)
    assert abs(mmse_of(fam.channel_at(t)) - t) <= 1e-12


@FAST
@given(st.floats(0.001, 0.499), st.floats(0.0, 1.0), st.integers(0, 3))
def test_rm12_stats_match_enumeration(p, t, i):
    fam = interpolate(make_bsc(p))
    ch = fam.channel_at(t)
    S = [j for j in range(4) if j != i]
    mmse, ber = bit_stats(codebook(rm_generator(1, 2)), ch.llr, ch.prob, i, S)
    s = bit_statistics(build_code(1, 2), fam, i)
    assert abs(s.mmse(t) - mmse) <= 1e-12 and abs(s.ber(t) - ber) <= 1e-12


@FAST
@given(st.integers(1, 4), st.data())
def test_puncturing_rm_on_subcube(m, data):
    # restricting to a subcube where the top coordinates are frozen gives the smaller code
    r = data.draw(st.integers(0, m - 1))
    big = build_code(r, m)
    fixed = data.draw(st.integers(0, 1))
    pattern = [x for x in range(1 << m) if (x >> (m - 1)) & 1 == fixed]
    assert same_codebook(puncture(big, pattern), build_code(r, m - 1).codebook)


@FAST
@given(st.integers(0, 5), st.integers(0, 5), st.integers(9, 5000), st.integers(0, 2 ** 32))
def test_config_round_trip(r, dm, grid, seed):
    cfg = RunConfig(r=r, m=r + dm, grid=grid, seed=seed)
    assert RunConfig.parse(cfg.format()) == cfg


@FAST
@given(st.floats(0.0, 0.5))
def test_bsc_spec_round_trip(p):
    ch = parse_channel_spec(f"bsc:{p!r}")
    assert np.array_equal(ch.llr, make_bsc(p).llr) and np.allclose(ch.prob, make_bsc(p).prob)
