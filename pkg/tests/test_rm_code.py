from fractions import Fraction

import numpy as np
import pytest

from oracles import codebook, rm_dimension, rm_generator
from rmx.rm_code import (CodeError, EnumerationGuardError, LinearCode, apply_automorphism, build_code,
                         gf2_nullspace, gf2_rank, is_invariant, nesting_sets, permute_codebook, puncture, rate,
                         rate_change_bound, same_codebook, sorted_rows)


@pytest.mark.parametrize("r,m", [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (1, 4), (2, 4), (3, 5)])
def test_generator_matches_direct_evaluation(r, m):
    code = build_code(r, m)
    assert np.array_equal(code.generator, rm_generator(r, m))
    assert code.K == rm_dimension(r, m)


def test_worked_generator_matrices():
    g13 = build_code(1, 3).generator
    expected = np.array([[1, 1, 1, 1, 1, 1, 1, 1],
                         [0, 1, 0, 1, 0, 1, 0, 1],
                         [0, 0, 1, 1, 0, 0, 1, 1],
                         [0, 0, 0, 0, 1, 1, 1, 1]])
    assert np.array_equal(g13, expected)
    assert np.array_equal(build_code(0, 2).generator, [[1, 1, 1, 1]])


def test_full_code_is_whole_space():
    code = build_code(3, 3)
    assert code.K == 8 and code.codebook.shape == (256, 8)
    assert same_codebook(code.codebook, np.array(list(np.ndindex(*(2,) * 8)), dtype=np.uint8))


@pytest.mark.parametrize("r,m", [(1, 3), (2, 4), (1, 4)])
def test_codebook_is_linear_and_matches_oracle(r, m):
    code = build_code(r, m)
    words = code.codebook
    assert same_codebook(words, np.array(codebook(rm_generator(r, m)), dtype=np.uint8))
    rng = np.random.default_rng(0)
    a, b = words[rng.integers(len(words), size=50)], words[rng.integers(len(words), size=50)]
    keys = {w.tobytes() for w in words}
    assert all((x ^ y).tobytes() in keys for x, y in zip(a, b))


def test_dual_code_is_orthogonal():
    code = build_code(1, 3)
    dual = code.dual_basis
    assert dual.shape == (4, 8)
    assert not np.any((code.generator.astype(int) @ dual.T.astype(int)) % 2)
    # RM(1,3) is self-dual
    assert same_codebook(LinearCode(dual).codebook, code.codebook)


def test_gf2_helpers():
    mat = np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]], dtype=np.uint8)
    assert gf2_rank(mat) == 2
    null = gf2_nullspace(mat)
    assert null.shape == (1, 3) and not np.any((mat.astype(int) @ null.T) % 2)


def test_rates():
    assert rate(1, 3) == Fraction(1, 2)
    assert rate(2, 5) == Fraction(1, 2)
    assert all(rate(m, m) == 1 for m in range(6))
    with pytest.raises(CodeError):
        rate(3, 2)


def test_rate_change_bound_values_and_dominance():
    assert rate_change_bound(4, 1) == pytest.approx(0.7, abs=1e-15)
    assert rate_change_bound(100, 1) == pytest.approx(0.14, abs=1e-15)
    for m in range(1, 13):
        for k in range(1, min(3, m) + 1):
            for r in range(m + 1):
                assert float(rate(r, m) - rate(r, m + k)) <= rate_change_bound(m, k)


@pytest.mark.parametrize("pattern", [(0, 1, 2, 3), (0, 1, 4, 5)])
def test_puncture_rm13_gives_rm12(pattern):
    assert same_codebook(puncture(build_code(1, 3), pattern), build_code(1, 2).codebook)


def test_puncture_full_pattern_is_identity():
    code = build_code(2, 4)
    assert same_codebook(puncture(code, range(code.N)), code.codebook)


def test_puncture_size_divides_codebook():
    code = build_code(1, 4)
    for pat in [(0, 3, 5), (1, 2, 7, 9, 15), tuple(range(0, 16, 3))]:
        n = len(puncture(code, pat))
        assert len(code.codebook) % n == 0


def test_nesting_sets_worked_example():
    ns = nesting_sets(1, 2, 1, 0)
    assert ns.I == (0, 1, 2, 3) and ns.I_prime == (0, 1, 4, 5)
    assert ns.A == (1,) and ns.B == (2, 3) and ns.C == (4, 5)
    overlap = sorted(set(ns.I) & set(ns.I_prime))
    assert overlap == [0, 1]
    assert same_codebook(puncture(build_code(1, 3), overlap), build_code(1, 1).codebook)


@pytest.mark.parametrize("r,m,k", [(1, 2, 1), (1, 3, 1), (2, 3, 1), (1, 3, 2), (2, 4, 1)])
def test_nesting_invariants(r, m, k):
    big, small = build_code(r, m + k), build_code(r, m)
    for i in range(1 << m):
        ns = nesting_sets(r, m, k, i)
        T = {ns.i, *ns.A}
        assert {ns.i, *ns.A, *ns.B} == set(ns.I)
        assert {ns.i, *ns.A, *ns.C} == set(ns.I_prime)
        assert set(ns.I) & set(ns.I_prime) == T and len(T) == 2 ** (m - k)
        perm = np.array(ns.permutation)
        assert np.array_equal(perm[perm], np.arange(ns.L))
        assert all(perm[j] == j for j in T)
        assert is_invariant(big, perm)
        assert same_codebook(puncture(big, ns.I), small.codebook)
        assert same_codebook(puncture(big, ns.I_prime), small.codebook)


def test_translated_nesting_fixes_anchor():
    ns = nesting_sets(1, 3, 1, 5)
    assert ns.permutation[5] == 5 and 5 in ns.I and 5 in ns.I_prime
    assert is_invariant(build_code(1, 4), ns.permutation)


def test_automorphisms():
    c12, c13 = build_code(1, 2), build_code(1, 3)
    assert list(apply_automorphism(c12, np.eye(2), [0, 0])) == [0, 1, 2, 3]
    perm = apply_automorphism(c12, np.eye(2), [1, 0])
    assert list(perm) == [1, 0, 3, 2] and is_invariant(c12, perm)
    swap = np.array([[1, 0, 0], [0, 0, 1], [0, 1, 0]])
    perm = apply_automorphism(c13, swap, [0, 0, 0])
    assert list(perm) == [0, 1, 4, 5, 2, 3, 6, 7] and is_invariant(c13, perm)
    with pytest.raises(CodeError):
        apply_automorphism(c13, np.zeros((3, 3)), [0, 0, 0])


def test_non_automorphism_detected():
    code = build_code(1, 3)
    perm = [1, 0, 2, 3, 4, 5, 6, 7]
    assert not is_invariant(code, perm)
    moved = permute_codebook(code.codebook, perm)
    assert not same_codebook(moved, code.codebook)


def test_enumeration_guard():
    big = build_code(2, 7)  # K = 29
    with pytest.raises(EnumerationGuardError):
        _ = big.codebook


def test_sorted_rows_matches_numpy():
    rng = np.random.default_rng(3)
    words = rng.integers(0, 2, size=(400, 20)).astype(np.uint8)
    words = np.vstack([words, words[:37]])
    assert np.array_equal(sorted_rows(words), np.unique(words, axis=0))


def test_with_repeated_and_restrict():
    code = build_code(1, 2)
    rep = code.with_repeated(1)
    assert rep.N == 5 and rep.K == 2 ** 0 * code.K
    assert np.array_equal(rep.codebook[:, 1], rep.codebook[:, 4])
    assert code.restrict([0, 1]).K == 2


def test_bad_parameters():
    with pytest.raises(CodeError):
        build_code(-1, 2)
    with pytest.raises(CodeError):
        nesting_sets(1, 2, 1, 4)
    with pytest.raises(CodeError):
        puncture(build_code(1, 2), [0, 9])
