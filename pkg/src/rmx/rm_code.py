"""Reed-Muller codes, puncturing, nesting index sets and affine automorphisms.

Coordinates of RM(r, m) are indexed by integers ``0 <= i < 2**m``. Index ``i``
stands for the point ``v`` of F_2^m whose bit ``j`` is ``(i >> j) & 1``, so
``i = sum_j v_j 2**j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from math import comb, sqrt
from typing import Iterable, Sequence

import numpy as np

MAX_ENUM_DIM = 24


class CodeError(ValueError):
    """Raised for invalid code parameters or unsupported operations."""


class EnumerationGuardError(CodeError):
    """Raised when a codebook would be too large to enumerate."""


# ---------------------------------------------------------------------------
# GF(2) linear algebra


def gf2_rref(mat: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2). Returns (matrix, pivot columns)."""
    a = (np.asarray(mat, dtype=np.uint8) & 1).copy()
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hits = np.nonzero(a[r:, c])[0]
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        others = np.nonzero(a[:, c])[0]
        others = others[others != r]
        a[others] ^= a[r]
        pivots.append(c)
        r += 1
    return a[:r], pivots


def gf2_rank(mat: np.ndarray) -> int:
    return len(gf2_rref(mat)[1])


def gf2_nullspace(mat: np.ndarray) -> np.ndarray:
    """Basis (as rows) of {h : mat @ h = 0 mod 2}."""
    mat = np.asarray(mat, dtype=np.uint8)
    n = mat.shape[1]
    rref, pivots = gf2_rref(mat)
    free = [c for c in range(n) if c not in set(pivots)]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for t, f in enumerate(free):
        basis[t, f] = 1
        for row, p in enumerate(pivots):
            basis[t, p] = rref[row, f]
    return basis


def span(basis: np.ndarray) -> np.ndarray:
    """All 2**k combinations of the k basis rows, ordered by message integer."""
    basis = np.asarray(basis, dtype=np.uint8)
    k, n = basis.shape
    if k > MAX_ENUM_DIM:
        raise EnumerationGuardError(f"refusing to enumerate 2^{k} codewords (limit 2^{MAX_ENUM_DIM})")
    msgs = (np.arange(1 << k, dtype=np.int64)[:, None] >> np.arange(k)) & 1
    return ((msgs @ basis) & 1).astype(np.uint8)


def sorted_rows(words: np.ndarray) -> np.ndarray:
    """Unique rows in lexicographic order, used as a canonical codebook form."""
    words = np.asarray(words, dtype=np.uint8)
    n = words.shape[1]
    if n == 0:
        return words[:1]
    if n > 64:
        return np.unique(words, axis=0)
    # column 0 is the most significant bit, so key order is row lexicographic order
    shifts = np.arange(n - 1, -1, -1, dtype=np.uint64)
    keys = np.bitwise_or.reduce(words.astype(np.uint64) << shifts, axis=1)
    _, first = np.unique(keys, return_index=True)
    return words[first]


def same_codebook(a: np.ndarray, b: np.ndarray) -> bool:
    a, b = sorted_rows(a), sorted_rows(b)
    return a.shape == b.shape and bool(np.array_equal(a, b))


# ---------------------------------------------------------------------------
# Linear codes


@dataclass(frozen=True, eq=False)
class LinearCode:
    """Binary linear code given by a (not necessarily full rank) generator matrix."""

    generator: np.ndarray
    label: str = "linear"

    def __post_init__(self) -> None:
        g = np.atleast_2d(np.asarray(self.generator, dtype=np.uint8) & 1)
        g.setflags(write=False)
        object.__setattr__(self, "generator", g)

    @property
    def N(self) -> int:
        return self.generator.shape[1]

    @cached_property
    def basis(self) -> np.ndarray:
        b = gf2_rref(self.generator)[0]
        b.setflags(write=False)
        return b

    @property
    def K(self) -> int:
        return self.basis.shape[0]

    @cached_property
    def codebook(self) -> np.ndarray:
        """All 2**K codewords over {0,1}, shape (2**K, N)."""
        if self.K > MAX_ENUM_DIM:
            raise EnumerationGuardError(f"K={self.K} exceeds the enumeration limit {MAX_ENUM_DIM}")
        words = span(self.basis)
        words.setflags(write=False)
        return words

    @property
    def codebook_pm(self) -> np.ndarray:
        """Codewords in BPSK form, 0 -> +1 and 1 -> -1."""
        return 1 - 2 * self.codebook.astype(np.int8)

    @cached_property
    def dual_basis(self) -> np.ndarray:
        d = gf2_nullspace(self.basis)
        d.setflags(write=False)
        return d

    def restrict(self, positions: Sequence[int]) -> "LinearCode":
        """The code punctured to ``positions`` (kept in the given order)."""
        pos = _check_positions(positions, self.N, sort=False)
        return LinearCode(self.generator[:, pos], label=f"{self.label}|{len(pos)}")

    def with_repeated(self, j: int) -> "LinearCode":
        """Append a copy of coordinate ``j``; models a second channel use of bit j."""
        if not 0 <= j < self.N:
            raise CodeError(f"index {j} out of range for N={self.N}")
        g = np.concatenate([self.generator, self.generator[:, [j]]], axis=1)
        return LinearCode(g, label=f"{self.label}+{j}")

    def packed_codewords(self) -> np.ndarray:
        """Codewords as uint64 words, bit j holding coordinate j (N <= 64)."""
        if self.N > 64:
            raise CodeError("packing needs N <= 64")
        weights = np.left_shift(np.uint64(1), np.arange(self.N, dtype=np.uint64))
        return (self.codebook.astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64)


def _check_positions(positions: Iterable[int], n: int, sort: bool = True) -> list[int]:
    pos = [int(p) for p in positions]
    for p in pos:
        if not 0 <= p < n:
            raise CodeError(f"index {p} out of range [0, {n})")
    if len(set(pos)) != len(pos):
        raise CodeError("repeated index in pattern")
    return sorted(pos) if sort else pos


# ---------------------------------------------------------------------------
# Reed-Muller codes


def monomials(r: int, m: int) -> list[tuple[int, ...]]:
    """Monomial index sets of degree <= r, ordered by degree then lexicographically."""
    return [s for d in range(r + 1) for s in combinations(range(m), d)]


def point_bits(m: int) -> np.ndarray:
    """Row i holds the bits of point i, shape (2**m, m)."""
    return ((np.arange(1 << m)[:, None] >> np.arange(m)) & 1).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class Code(LinearCode):
    r: int = 0
    m: int = 0

    @property
    def rate(self) -> Fraction:
        return rate(self.r, self.m)


def build_code(r: int, m: int) -> Code:
    """Generator of RM(r, m): one row per monomial, evaluated at all points."""
    if m < 0 or r < 0 or r > m or m > MAX_ENUM_DIM:
        raise CodeError(f"parameter out of range: r={r}, m={m}")
    bits = point_bits(m)
    rows = [np.prod(bits[:, list(s)], axis=1) if s else np.ones(1 << m) for s in monomials(r, m)]
    g = np.array(rows, dtype=np.uint8)
    return Code(generator=g, label=f"RM({r},{m})", r=r, m=m)


def dimension(r: int, m: int) -> int:
    return sum(comb(m, i) for i in range(r + 1))


def rate(r: int, m: int) -> Fraction:
    if m < 0 or r < 0 or r > m:
        raise CodeError(f"parameter out of range: r={r}, m={m}")
    return Fraction(dimension(r, m), 1 << m)


def rate_change_bound(m: int, k: int) -> float:
    """Upper bound on rate(r, m) - rate(r, m + k), valid for every r <= m."""
    if not 1 <= k <= m:
        raise CodeError(f"need 1 <= k <= m, got m={m}, k={k}")
    return (3 * k + 4) / (5 * sqrt(m))


def puncture(code: LinearCode, pattern: Iterable[int]) -> np.ndarray:
    """Distinct restricted codewords on sorted ``pattern``, in canonical order."""
    pos = _check_positions(pattern, code.N)
    return sorted_rows(code.codebook[:, pos])


# ---------------------------------------------------------------------------
# Nesting sets


@dataclass(frozen=True)
class NestingSets:
    """Index sets of RM(r, m + k) anchored at ``i``; all sets sorted."""

    r: int
    m: int
    k: int
    i: int
    I: tuple[int, ...]
    I_prime: tuple[int, ...]
    A: tuple[int, ...]
    B: tuple[int, ...]
    C: tuple[int, ...]
    permutation: tuple[int, ...] = field(repr=False)

    @property
    def L(self) -> int:
        return 1 << (self.m + self.k)

    @property
    def T(self) -> tuple[int, ...]:
        return tuple(sorted((self.i,) + self.A))


def nesting_sets(r: int, m: int, k: int, i: int) -> NestingSets:
    """Two copies of RM(r, m) inside RM(r, m + k) sharing ``{i} | A``.

    With ``i' = tau^-1(i)`` the sets are the translates by ``i'`` of
    ``V = F_2^m x 0^k`` and ``V' = F_2^(m-k) x 0^k x F_2^k``. The stored
    permutation swaps point bits ``m-k+j`` and ``m+j`` after translating by
    ``i'``; it fixes ``V & V'`` pointwise and maps ``V`` onto ``V'``.
    """
    if not (1 <= k <= m and 0 <= r <= m):
        raise CodeError(f"parameter out of range: r={r}, m={m}, k={k}")
    if not 0 <= i < (1 << m):
        raise CodeError(f"anchor {i} out of range [0, {1 << m})")
    n_all = 1 << (m + k)
    idx = np.arange(n_all)
    low = (1 << (m - k)) - 1
    mid = ((1 << k) - 1) << (m - k)
    high = ((1 << k) - 1) << m
    u = idx ^ i
    I = np.sort(idx[(u & high) == 0])
    Ip = np.sort(idx[(u & mid) == 0])
    T = np.sort(idx[(u & ~low) == 0])
    swapped = (u & ~(mid | high)) | ((u & mid) << k) | ((u & high) >> k)
    perm = swapped ^ i
    t_set = set(T.tolist())
    return NestingSets(
        r=r,
        m=m,
        k=k,
        i=i,
        I=tuple(I.tolist()),
        I_prime=tuple(Ip.tolist()),
        A=tuple(x for x in T.tolist() if x != i),
        B=tuple(x for x in I.tolist() if x not in t_set),
        C=tuple(x for x in Ip.tolist() if x not in t_set),
        permutation=tuple(perm.tolist()),
    )


# ---------------------------------------------------------------------------
# Affine automorphisms


def apply_automorphism(code: Code, Q: np.ndarray, b: Sequence[int]) -> np.ndarray:
    """Index permutation i -> tau(Q tau^-1(i) + b) of the affine map (Q, b)."""
    m = code.m
    Q = np.asarray(Q, dtype=np.uint8) & 1
    b = np.asarray(b, dtype=np.uint8) & 1
    if Q.shape != (m, m) or b.shape != (m,):
        raise CodeError(f"need Q of shape ({m},{m}) and b of length {m}")
    if gf2_rank(Q) < m:
        raise CodeError("singular matrix: Q is not invertible over F_2")
    pts = point_bits(m).astype(np.int64)
    img = (pts @ Q.T.astype(np.int64) + b) & 1
    return img @ (1 << np.arange(m))


def permute_codebook(words: np.ndarray, perm: Sequence[int]) -> np.ndarray:
    """Move coordinate j of every word to position perm[j]."""
    words = np.asarray(words)
    out = np.empty_like(words)
    out[:, np.asarray(perm)] = words
    return out


def is_invariant(code: LinearCode, perm: Sequence[int]) -> bool:
    return same_codebook(code.codebook, permute_codebook(code.codebook, perm))
