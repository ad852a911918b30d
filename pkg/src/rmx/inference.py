"""Exact and Monte Carlo bit-MAP inference for small linear codes.

By channel symmetry and linearity, ``E[X_i | Y_S] = X_i f(Z_S)`` where ``f`` is the
conditional mean when the all-ones word is sent and ``Z`` is the channel noise.
Every expectation below is therefore an average over noise patterns only.

Two evaluation routes compute ``f``:

* primal: a log-domain sum over the codewords of the code punctured to the
  positions that matter;
* dual: the same ratio written as a sum over the dual code, in terms of
  ``tanh(l/2)``; used when the dual is much smaller.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import fsum, log
from typing import Iterator, Sequence

import numpy as np
from scipy.special import logsumexp

from .channels import ChannelFamily, SymmetricChannel
from .rm_code import CodeError, LinearCode, span
from .series import phi

BUDGET = 1 << 24
ROW_BLOCK = 1 << 22


class BudgetExceeded(RuntimeError):
    """The exhaustive sweep would exceed the pattern budget."""


class ZeroProbabilityPattern(ValueError):
    """No codeword is consistent with the given observation."""


# ---------------------------------------------------------------------------
# Conditional mean kernels


# rows whose dual sums cancel by more than this factor fall back to the primal kernel
DUAL_CONDITION = 64.0


class BitProblem:
    """Estimate bit ``i`` of ``code`` from the observations at ``observed``.

    ``observed`` may list positions in any order; LLR matrices passed to the
    kernels have one column per entry of ``observed`` in that order.
    """

    def __init__(self, code: LinearCode, i: int, observed: Sequence[int], method: str = "auto"):
        obs = [int(j) for j in observed]
        if not 0 <= i < code.N:
            raise CodeError(f"bit {i} out of range for N={code.N}")
        if any(not 0 <= j < code.N for j in obs) or len(set(obs)) != len(obs):
            raise CodeError("observed positions must be distinct indices of the code")
        self.code, self.i, self.observed = code, i, obs
        pos = sorted(set(obs) | {i})
        where = {p: n for n, p in enumerate(pos)}
        self.target = where[i]
        self.cols = np.array([where[j] for j in obs], dtype=int)
        self.sub = code.restrict(pos)
        self.width = len(pos)
        dual_dim = self.width - self.sub.K
        if method == "auto":
            method = "dual" if dual_dim + 2 < self.sub.K else "primal"
        self.method = method

    @cached_property
    def _primal(self):
        words = self.sub.codebook_pm.astype(float)
        plus = words[:, self.target] > 0
        return words[:, self.cols], plus

    @cached_property
    def _dual(self):
        hs = span(self.sub.dual_basis).astype(bool)
        flip = hs.copy()
        flip[:, self.target] ^= True
        return hs, flip

    def means(self, L: np.ndarray, strict: bool = False) -> np.ndarray:
        """Conditional means f for each row of the LLR matrix ``L``."""
        L = np.asarray(L, dtype=float)
        L = L.reshape(L.shape[0] if L.ndim == 2 else 1, -1) if not self.observed else L.reshape(-1, len(self.observed))
        out = np.empty(L.shape[0])
        step = max(1, ROW_BLOCK // max(1, self.sub.codebook.shape[0] if self.method == "primal" else 64))
        for lo in range(0, L.shape[0], step):
            blk = L[lo:lo + step]
            if self.method == "dual" and not strict:
                out[lo:lo + step] = self._dual_means(blk)
            else:
                out[lo:lo + step] = self._primal_means(blk, strict)
        return out

    def _primal_means(self, L: np.ndarray, strict: bool) -> np.ndarray:
        words, plus = self._primal
        hard = np.isinf(L)
        logw = np.where(hard, 0.0, L) @ words.T / 2.0
        if hard.any():
            sgn = np.where(hard, np.sign(L), 0.0)
            clash = np.abs(sgn).sum(axis=1, keepdims=True) - sgn @ words.T
            logw[clash > 0.5] = -np.inf
        with np.errstate(invalid="ignore", divide="ignore"):
            lp = logsumexp(logw[:, plus], axis=1) if plus.any() else np.full(len(L), -np.inf)
            lm = logsumexp(logw[:, ~plus], axis=1) if (~plus).any() else np.full(len(L), -np.inf)
            lam = lp - lm
        bad = np.isneginf(lp) & np.isneginf(lm)
        if strict and bad.any():
            raise ZeroProbabilityPattern("observation has zero probability under every codeword")
        return np.where(bad, np.nan, np.tanh(lam / 2.0))

    def _dual_means(self, L: np.ndarray) -> np.ndarray:
        hs, flip = self._dual
        T = np.zeros((L.shape[0], self.width))
        T[:, self.cols] = np.tanh(L / 2.0)
        dterms = np.where(hs[None], T[:, None, :], 1.0).prod(axis=2)
        nterms = np.where(flip[None], T[:, None, :], 1.0).prod(axis=2)
        den, num = dterms.sum(axis=1), nterms.sum(axis=1)
        # signed sums cancel for near-hard inputs; recompute those rows with the primal kernel
        cond = np.abs(dterms).sum(axis=1) + np.abs(nterms).sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.clip(num / den, -1.0, 1.0)
            bad = ~(cond <= DUAL_CONDITION * np.abs(den))
        if bad.any():
            out[bad] = self._primal_means(L[bad], False)
        return out


def posterior_mean(code: LinearCode, i: int, S: Sequence[int], llrs: Sequence[float]) -> float:
    """E[X_i | LLRs ``llrs`` observed at positions ``S``] for a uniform codeword."""
    prob = BitProblem(code, i, S, method="primal")
    return float(prob.means(np.asarray(llrs, dtype=float)[None, :], strict=True)[0])


def conditional_mean(code: LinearCode, channel: SymmetricChannel, i: int, S: Sequence[int],
                     pattern: Sequence[int]) -> float:
    """f(z_S) for the noise pattern given as atom indices into ``channel``."""
    pattern = np.asarray(pattern, dtype=int)
    if pattern.shape != (len(S),) or np.any((pattern < 0) | (pattern >= len(channel.llr))):
        raise ValueError("pattern must hold one valid atom index per position of S")
    return posterior_mean(code, i, S, channel.llr[pattern])


# ---------------------------------------------------------------------------
# Exhaustive sweeps


@dataclass(frozen=True)
class Alphabet:
    """Atoms of one noise variable. ``special`` atoms carry no base weight."""

    llr: np.ndarray
    weight: np.ndarray
    special: np.ndarray = field(default=None)

    @classmethod
    def of(cls, channel: SymmetricChannel) -> "Alphabet":
        return cls(channel.llr, channel.prob, np.zeros(len(channel.llr), dtype=bool))

    @classmethod
    def with_special(cls, base: SymmetricChannel, special: float) -> "Alphabet":
        return cls(np.append(base.llr, special), np.append(base.prob, 1.0),
                   np.append(np.zeros(len(base.llr), dtype=bool), True))

    def __len__(self) -> int:
        return len(self.llr)


def pattern_count(alphabets: Sequence[Alphabet]) -> int:
    n = 1
    for a in alphabets:
        n *= len(a)
    return n


def _digits(lo: int, hi: int, sizes: Sequence[int]) -> np.ndarray:
    """Mixed-radix digits of lo..hi-1, first position most significant."""
    idx = np.arange(lo, hi, dtype=np.int64)
    out = np.empty((hi - lo, len(sizes)), dtype=np.int64)
    for j in range(len(sizes) - 1, -1, -1):
        out[:, j] = idx % sizes[j]
        idx //= sizes[j]
    return out


def sweep(problem: BitProblem, alphabets: Sequence[Alphabet], budget: int = BUDGET,
          block: int = 1 << 16) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Yield (f, weight, special count) for every pattern, in mixed-radix order."""
    if len(alphabets) != len(problem.observed):
        raise ValueError("one alphabet per observed position")
    total = pattern_count(alphabets)
    if total > budget:
        raise BudgetExceeded(f"{total} noise patterns exceed the exhaustive budget {budget}")
    sizes = [len(a) for a in alphabets]
    for lo in range(0, total, block):
        hi = min(total, lo + block)
        d = _digits(lo, hi, sizes)
        L = np.empty(d.shape)
        w = np.ones(hi - lo)
        ns = np.zeros(hi - lo, dtype=np.int64)
        for j, a in enumerate(alphabets):
            L[:, j] = a.llr[d[:, j]]
            w *= a.weight[d[:, j]]
            ns += a.special[d[:, j]]
        yield problem.means(L), w, ns


def table(problem: BitProblem, alphabets: Sequence[Alphabet], budget: int = BUDGET):
    """Full pattern table (f, weight, special count) in mixed-radix order."""
    parts = list(sweep(problem, alphabets, budget))
    if not parts:
        return np.zeros(0), np.zeros(0), np.zeros(0, dtype=np.int64)
    return tuple(np.concatenate(p) for p in zip(*parts))


def _merge(u: np.ndarray, w: np.ndarray, ns: np.ndarray):
    key = np.round(u, 14)
    order = np.lexsort((key, ns))
    key, ns_s, w_s, u_s = key[order], ns[order], w[order], u[order]
    start = np.ones(len(key), dtype=bool)
    start[1:] = (key[1:] != key[:-1]) | (ns_s[1:] != ns_s[:-1])
    at = np.nonzero(start)[0]
    return u_s[at], np.add.reduceat(w_s, at), ns_s[at]


def distribution(problem: BitProblem, alphabets: Sequence[Alphabet], budget: int = BUDGET):
    """Law of f as merged atoms (f, weight, special count)."""
    us, ws, nss = [], [], []
    for f, w, ns in sweep(problem, alphabets, budget):
        u, w, ns = _merge(f, w, ns)
        us.append(u), ws.append(w), nss.append(ns)
    if not us:
        return np.zeros(0), np.zeros(0), np.zeros(0, dtype=np.int64)
    return _merge(np.concatenate(us), np.concatenate(ws), np.concatenate(nss))


# ---------------------------------------------------------------------------
# Statistics of f over a channel family


class SegmentProfile:
    """Law of f on one linear piece of an interpolated family.

    On the piece, each observation is a base-channel output with probability
    ``a`` and the special atom otherwise, so every expectation is a polynomial
    in ``a`` whose coefficients are computed once.
    """

    def __init__(self, problem: BitProblem, base: SymmetricChannel, special: float, budget: int):
        n = len(problem.observed)
        alph = [Alphabet.with_special(base, special)] * n
        self.n = n
        self.f, self.w, self.ns = distribution(problem, alph, budget)
        self.u = self.f * self.f
        self._cache: dict = {}

    def coefficients(self, values: np.ndarray) -> np.ndarray:
        out = np.zeros(self.n + 1)
        np.add.at(out, self.ns, self.w * values)
        return out

    def basis(self, a) -> np.ndarray:
        a = np.atleast_1d(np.asarray(a, dtype=float))
        j = np.arange(self.n + 1)
        return a[:, None] ** (self.n - j)[None, :] * (1.0 - a[:, None]) ** j[None, :]

    def expect(self, values: np.ndarray, a) -> np.ndarray:
        return self.basis(a) @ self.coefficients(values)


class BitStatistics:
    """Moments, MMSE, BER and GEXIT of the estimate of one bit along a family.

    Uses the polynomial profile when the family is an interpolation, and a
    direct sweep over ``channel_at(t)`` otherwise.
    """

    def __init__(self, problem: BitProblem, family: ChannelFamily, budget: int = BUDGET):
        self.problem, self.family, self.budget = problem, family, budget
        self._profiles: dict[str, SegmentProfile] = {}
        self._gexit_terms: dict[str, np.ndarray] = {}

    def _profile(self, t: float, side: str | None):
        mx = self.family.mixture(t, side)
        if mx is None:
            return None, None
        if mx.segment not in self._profiles:
            self._profiles[mx.segment] = SegmentProfile(self.problem, mx.base, mx.special, self.budget)
        return self._profiles[mx.segment], mx

    def signed_law(self, t: float, side: str | None = None) -> tuple[np.ndarray, np.ndarray]:
        """(f, prob): the law of the conditional mean at parameter t."""
        prof, mx = self._profile(t, side)
        if prof is not None:
            return prof.f, prof.w * prof.basis(mx.a)[0][prof.ns]
        alph = [Alphabet.of(self.family.channel_at(t))] * len(self.problem.observed)
        f, w, _ = distribution(self.problem, alph, self.budget)
        return f, w

    def law(self, t: float, side: str | None = None) -> tuple[np.ndarray, np.ndarray]:
        """(u, prob) with u = f^2, at parameter t."""
        f, p = self.signed_law(t, side)
        return f * f, p

    def expect(self, fn, t: float, side: str | None = None) -> float:
        u, p = self.law(t, side)
        return fsum(p * fn(u))

    def moment(self, t: float, k: int = 1) -> float:
        return self.expect(lambda u: u ** k, t)

    def mmse(self, t: float) -> float:
        return 1.0 - self.moment(t, 1)

    def abs_mean(self, t: float) -> float:
        return self.expect(np.sqrt, t)

    def ber(self, t: float) -> float:
        return 0.5 * (1.0 - self.abs_mean(t))

    def ber_with_own_look(self, t: float) -> float:
        """BER of bit i when its own channel output is added to the observed set.

        The posterior of X_i factors into the extrinsic part and the bit's own
        likelihood, so in the tanh domain f_full = (f + g) / (1 + f g).
        """
        if self.problem.i in self.problem.observed:
            raise ValueError("bit i is already observed")
        f, p = self.signed_law(t)
        ch = self.family.channel_at(t)
        g = ch.tanh
        with np.errstate(invalid="ignore", divide="ignore"):
            full = (f[:, None] + g[None, :]) / (1.0 + f[:, None] * g[None, :])
        weight = p[:, None] * ch.prob[None, :]
        ok = weight > 0
        return 0.5 * (1.0 - fsum(weight[ok] * np.abs(full[ok])))

    def gexit(self, t: float, side: str | None = None) -> float:
        """sum_k c_k (-q_k'(t)) (1 - E f^(2k)), summed in closed form.

        With -q_k' = sum_a w_a v_a^k the series equals
        sum_a w_a E[phi(v_a f^2) - phi(v_a)].
        """
        v, w = self.family.dq_mixture(t, side)
        prof, mx = self._profile(t, side)
        if prof is not None:
            if mx.segment not in self._gexit_terms:
                vals = self._gexit_values(prof.u, v, w)
                self._gexit_terms[mx.segment] = prof.coefficients(vals)
            return float(prof.basis(mx.a)[0] @ self._gexit_terms[mx.segment])
        u, p = self.law(t, side)
        return fsum(p * self._gexit_values(u, v, w))

    @staticmethod
    def _gexit_values(u: np.ndarray, v: np.ndarray, w: np.ndarray) -> np.ndarray:
        out = np.zeros_like(u)
        for va, wa in zip(v, w):
            out += wa * (phi(va * u) - phi(va))
        return out

    def curve(self, fn_name: str, grid, sides=None) -> np.ndarray:
        sides = [None] * len(grid) if sides is None else sides
        f = getattr(self, fn_name)
        if fn_name == "gexit":
            return np.array([f(t, s) for t, s in zip(grid, sides)])
        return np.array([f(t) for t in grid])


def extrinsic(code: LinearCode, i: int) -> list[int]:
    return [j for j in range(code.N) if j != i]


_STATS: dict = {}


def bit_statistics(code: LinearCode, family: ChannelFamily, i: int, S: Sequence[int] | None = None,
                   budget: int = BUDGET) -> BitStatistics:
    """Cached BitStatistics for (code, family, i, S); S defaults to all j != i."""
    S = extrinsic(code, i) if S is None else list(S)
    key = (id(code), id(family), i, tuple(S), budget)
    hit = _STATS.get(key)
    if hit is None or hit[0] is not code or hit[1] is not family:
        hit = (code, family, BitStatistics(BitProblem(code, i, S), family, budget))
        _STATS[key] = hit
    return hit[2]


def bms_linear_check(code: LinearCode, channel: SymmetricChannel, i: int, S: Sequence[int],
                     budget: int = BUDGET) -> float:
    """Largest |f(y_S) - x_i f(x_S y_S)| over all codewords x and channel patterns y_S.

    f here is the posterior mean for a uniform codeword, so the check does not
    rely on the all-ones reduction.
    """
    S = list(S)
    words = code.codebook_pm.astype(float)
    n = len(channel.llr)
    if len(words) * n ** len(S) > budget:
        raise BudgetExceeded("codeword by pattern sweep exceeds the exhaustive budget")
    problem = BitProblem(code, i, S, method="primal")
    pats = channel.llr[_digits(0, n ** len(S), [n] * len(S))]
    f_y = problem.means(pats)
    worst = 0.0
    for x in words:
        flipped = problem.means(pats * x[S])
        ok = ~np.isnan(f_y) & ~np.isnan(flipped)
        if ok.any():
            worst = max(worst, float(np.max(np.abs(f_y[ok] - x[i] * flipped[ok]))))
    return worst


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    method: str
    samples: int = 0


MC_BLOCK = 1 << 16


def sample_llrs(channel: SymmetricChannel, n_samples: int, width: int, seed: int, block: int):
    """Noise LLRs for one block; the stream depends only on (seed, block index)."""
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed & (2 ** 64 - 1), block])))
    uni = gen.random((n_samples, width))
    cdf = np.cumsum(channel.prob)
    idx = np.minimum(np.searchsorted(cdf, uni * cdf[-1], side="right"), len(cdf) - 1)
    return channel.llr[idx]


def mc_expect(problem: BitProblem, channel: SymmetricChannel, fn, samples: int, seed: int) -> Estimate:
    sums, sqs = [], []
    for b, lo in enumerate(range(0, samples, MC_BLOCK)):
        n = min(MC_BLOCK, samples - lo)
        vals = fn(problem.means(sample_llrs(channel, n, len(problem.observed), seed, b)))
        sums.append(fsum(vals))
        sqs.append(fsum(vals * vals))
    mean = fsum(sums) / samples
    var = max(fsum(sqs) / samples - mean * mean, 0.0) * samples / max(samples - 1, 1)
    return Estimate(mean, (var / samples) ** 0.5, "mc", samples)


# ---------------------------------------------------------------------------
# Public operations


def moment_norm(code: LinearCode, family: ChannelFamily, t: float, i: int, S: Sequence[int], two_k: int,
                samples: int | None = None, seed: int = 0, method: str = "auto",
                budget: int = BUDGET) -> Estimate:
    """E[f(Z_S)^(2k)].

    ``method="auto"`` sweeps exhaustively when the pattern count fits the budget
    and otherwise samples ``samples`` noise patterns; "exact" and "mc" force a route.
    """
    if two_k < 2 or two_k % 2:
        raise ValueError("moment order must be a positive even integer")
    k = two_k // 2
    S = list(S)
    if method not in ("auto", "exact", "mc"):
        raise ValueError(f"unknown method {method!r}")
    if method != "mc":
        try:
            return Estimate(bit_statistics(code, family, i, S, budget).moment(t, k), 0.0, "exact")
        except BudgetExceeded:
            if method == "exact" or samples is None:
                raise
    if not samples:
        raise ValueError("Monte Carlo needs a positive sample count")
    return mc_expect(BitProblem(code, i, S), family.channel_at(t), lambda f: f ** two_k, samples, seed)


def extrinsic_mmse(code: LinearCode, family: ChannelFamily, t: float, i: int, **kw) -> Estimate:
    est = moment_norm(code, family, t, i, extrinsic(code, i), 2, **kw)
    return Estimate(1.0 - est.value, est.stderr, est.method, est.samples)


def ber_of_bit(code: LinearCode, family: ChannelFamily, t: float, i: int, observe_all: bool = False,
               budget: int = BUDGET) -> float:
    """0.5 (1 - E|f(Z_S)|) with S = [N] or [N] minus i."""
    st = bit_statistics(code, family, i, extrinsic(code, i), budget)
    return st.ber_with_own_look(t) if observe_all else st.ber(t)


def _channel_table(code: LinearCode, family: ChannelFamily, t: float, i: int, obs: Sequence[int], budget: int):
    ch = family.channel_at(t)
    problem = BitProblem(code, i, obs)
    f, w, _ = table(problem, [Alphabet.of(ch)] * len(obs), budget)
    return f, w, len(ch.llr)


def delta_resample(code: LinearCode, family: ChannelFamily, t: float, i: int, S: Sequence[int],
                   budget: int = BUDGET) -> float:
    """0.5 E[(f(Z) - f(Z^S))^2] where Z^S redraws the noise on S independently.

    The sum runs over the joint law of (Z, resampled block) explicitly.
    """
    S = sorted(set(int(j) for j in S))
    if i in S:
        raise ValueError("the resampled block must avoid the estimated bit")
    if not S:
        return 0.0
    rest = [j for j in extrinsic(code, i) if j not in S]
    A = len(family.channel_at(t).llr)
    if A ** (len(rest) + 2 * len(S)) > budget:
        raise BudgetExceeded("resampling sweep exceeds the exhaustive budget")
    f, w, A = _channel_table(code, family, t, i, rest + S, budget)
    nS = A ** len(S)
    F = f.reshape(-1, nS)
    W = w.reshape(-1, nS)
    # every position sees the same channel, so the weights factor as p_rest * p_S
    p_rest = W.sum(axis=1)
    p_S = W[0] / W[0].sum()
    total = []
    step = max(1, (1 << 20) // (nS * nS))
    for lo in range(0, F.shape[0], step):
        blk = F[lo:lo + step]
        d2 = (blk[:, :, None] - blk[:, None, :]) ** 2
        inner = np.einsum("rst,s,t->r", d2, p_S, p_S)
        total.append(fsum(p_rest[lo:lo + step] * inner))
    return 0.5 * fsum(total)


def variance_identity_check(code: LinearCode, family: ChannelFamily, t: float, i: int, S: Sequence[int],
                            budget: int = BUDGET) -> tuple[float, float]:
    """(M (1 - M), 0.5 E[(f(Z_S) - f(Z'_S))^2]) with Z' an independent copy."""
    S = list(S)
    A = len(family.channel_at(t).llr)
    if A ** (2 * len(S)) > budget:
        raise BudgetExceeded("doubled sweep exceeds the exhaustive budget")
    f, w, _ = _channel_table(code, family, t, i, S, budget)
    M = 1.0 - fsum(w * f * f)
    parts = []
    step = max(1, (1 << 22) // max(1, len(f)))
    for lo in range(0, len(f), step):
        d2 = (f[lo:lo + step, None] - f[None, :]) ** 2
        parts.append(fsum(w[lo:lo + step] * (d2 @ w)))
    return M * (1.0 - M), 0.5 * fsum(parts)


def efron_stein_check(code: LinearCode, family: ChannelFamily, t: float, i: int,
                      partition: Sequence[Sequence[int]], budget: int = BUDGET) -> tuple[float, float]:
    """(M (1 - M), sum of Delta_i^B over the blocks B of a partition of [N] minus i)."""
    blocks = [sorted(int(j) for j in b) for b in partition]
    flat = sorted(j for b in blocks for j in b)
    if flat != extrinsic(code, i):
        raise ValueError("partition must cover every position except the estimated bit exactly once")
    f, w, _ = _channel_table(code, family, t, i, extrinsic(code, i), budget)
    M = 1.0 - fsum(w * f * f)
    return M * (1.0 - M), fsum(delta_resample(code, family, t, i, b, budget) for b in blocks)


def _pair_law(x: np.ndarray, y: np.ndarray, p: np.ndarray) -> dict:
    """Joint law of (X_i x, X_i y) for uniform X_i, as a dict of rounded pairs."""
    law: dict = {}
    for sgn in (1.0, -1.0):
        keys = zip(np.round(sgn * x, 12) + 0.0, np.round(sgn * y, 12) + 0.0)
        for key, q in zip(keys, p):
            law[key] = law.get(key, 0.0) + 0.5 * q
    return law


def tv_distance(a: dict, b: dict) -> float:
    return 0.5 * fsum(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in set(a) | set(b))


@dataclass
class ABCReport:
    t: float
    tv: float
    law_resampled: dict
    law_swapped: dict
    tolerance: float = 1e-12

    @property
    def passed(self) -> bool:
        return self.tv <= self.tolerance


def abc_distribution_check(code_ext: LinearCode, nesting, family: ChannelFamily, t: float,
                           budget: int = BUDGET) -> ABCReport:
    """Compare the laws of (E[X_i|Y_A,Y_B], E[X_i|Y_A,Y'_B]) and (E[X_i|Y_A,Y_B], E[X_i|Y_A,Y_C])."""
    i, A, B, C = nesting.i, list(nesting.A), list(nesting.B), list(nesting.C)
    if code_ext.N != nesting.L:
        raise ValueError("extended code length does not match the nesting sets")
    ch = family.channel_at(t)
    n = len(ch.llr)
    if n ** (len(A) + 2 * len(B)) > budget:
        raise BudgetExceeded("joint sweep exceeds the exhaustive budget")
    alph = Alphabet.of(ch)
    fAB, wAB, _ = table(BitProblem(code_ext, i, A + B), [alph] * (len(A) + len(B)), budget)
    fAC, _, _ = table(BitProblem(code_ext, i, A + C), [alph] * (len(A) + len(C)), budget)
    nB = n ** len(B)
    F = fAB.reshape(-1, nB)
    G = fAC.reshape(-1, n ** len(C))
    pA = wAB.reshape(-1, nB).sum(axis=1)
    pB = np.ones(1)
    for _ in B:
        pB = np.outer(pB, ch.prob).ravel()
    pC = np.ones(1)
    for _ in C:
        pC = np.outer(pC, ch.prob).ravel()
    # (a, b, b'): f(a, b), f(a, b')
    x1 = np.repeat(F[:, :, None], nB, axis=2).ravel()
    y1 = np.repeat(F[:, None, :], nB, axis=1).ravel()
    p1 = (pA[:, None, None] * pB[None, :, None] * pB[None, None, :]).ravel()
    # (a, b, c): f(a, b), g(a, c)
    nC = G.shape[1]
    x2 = np.repeat(F[:, :, None], nC, axis=2).ravel()
    y2 = np.repeat(G[:, None, :], nB, axis=1).ravel()
    p2 = (pA[:, None, None] * pB[None, :, None] * pC[None, None, :]).ravel()
    l1, l2 = _pair_law(x1, y1, p1), _pair_law(x2, y2, p2)
    return ABCReport(t, tv_distance(l1, l2), l1, l2)


def recoverable(code: LinearCode, i: int, unerased: np.ndarray) -> np.ndarray:
    """For each row of a boolean mask, whether bit i is determined by the unerased bits."""
    words = code.codebook.astype(np.int64)
    hits = words[:, i] == 1
    # bit i is determined iff no codeword has c_i = 1 and vanishes on the unerased set
    zero_on = (np.asarray(unerased, dtype=np.int64) @ words[hits].T) == 0
    return ~zero_on.any(axis=1)


def exit_influence_bec(code: LinearCode, i: int, j: int, t: float) -> float:
    """Probability that observing bit j decides whether bit i is recoverable on BEC(t)."""
    others = [p for p in range(code.N) if p not in (i, j)]
    n = len(others)
    masks = ((np.arange(1 << n)[:, None] >> np.arange(n)) & 1).astype(bool)
    full = np.zeros((1 << n, code.N), dtype=bool)
    full[:, others] = masks
    without = recoverable(code, i, full)
    full[:, j] = True
    with_j = recoverable(code, i, full)
    k = masks.sum(axis=1)
    prob = (1.0 - t) ** k * t ** (n - k)
    return fsum(prob[with_j & ~without])


def codeword_entropy(code: LinearCode, channels: Sequence[SymmetricChannel | None],
                     budget: int = BUDGET) -> float:
    """H(X | Y) in bits when position j is seen through ``channels[j]`` (None = unseen)."""
    if len(channels) != code.N:
        raise ValueError("one channel (or None) per code position")
    obs = [j for j, c in enumerate(channels) if c is not None]
    sub = code.restrict(obs) if obs else None
    hidden = code.K - (sub.K if sub is not None else 0)
    if not obs:
        return float(code.K)
    alph = [Alphabet.of(channels[j]) for j in obs]
    total = pattern_count(alph)
    if total > budget:
        raise BudgetExceeded("entropy sweep exceeds the exhaustive budget")
    words = sub.codebook_pm.astype(float)
    sizes = [len(a) for a in alph]
    parts = []
    for lo in range(0, total, 1 << 14):
        hi = min(total, lo + (1 << 14))
        d = _digits(lo, hi, sizes)
        L = np.column_stack([a.llr[d[:, j]] for j, a in enumerate(alph)])
        w = np.prod(np.column_stack([a.weight[d[:, j]] for j, a in enumerate(alph)]), axis=1)
        hard = np.isinf(L)
        logw = np.where(hard, 0.0, L) @ words.T / 2.0
        if hard.any():
            clash = hard.astype(float) @ (words < 0).T.astype(float)
            logw[clash > 0.5] = -np.inf
        lse = logsumexp(logw, axis=1, keepdims=True)
        logp = logw - lse
        p = np.exp(logp)
        ent = -np.sum(p * np.where(p > 0, logp, 0.0), axis=1) / log(2.0)
        parts.append(fsum(w * ent))
    return fsum(parts) + hidden
