"""Binary memoryless symmetric channels as finite LLR densities, and channel families.

A channel is the law of ``Z = X * llr(Y)`` given ``X = +1``: a finite list of
atoms ``(llr, prob)``. The atom ``+inf`` is a perfect observation and ``0`` an
erasure. The conditional mean of ``X`` given an output with LLR ``l`` is
``tanh(l / 2)``.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from math import log, log1p, sqrt

import numpy as np
from scipy.optimize import brentq
from scipy.stats import norm

from .reports import BoundReport, upper_report
from .series import power_series, h_b

ATOL = 1e-12


class ChannelError(ValueError):
    """Invalid channel parameters or an invalid density."""


class KinkError(ValueError):
    """A one-sided quantity was requested at the kink without choosing a side."""


@dataclass(frozen=True, eq=False)
class SymmetricChannel:
    llr: np.ndarray
    prob: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        llr = np.asarray(self.llr, dtype=float).ravel()
        prob = np.asarray(self.prob, dtype=float).ravel()
        if llr.shape != prob.shape:
            raise ChannelError("llr and prob must match")
        if np.any(np.isnan(llr)) or np.any(llr == -np.inf):
            raise ChannelError("atoms must be finite or +inf")
        if np.any(prob < 0):
            raise ChannelError("negative probability")
        keep = prob > 0
        llr, prob = llr[keep], prob[keep]
        vals, inv = np.unique(llr, return_inverse=True)
        merged = np.zeros(vals.size)
        np.add.at(merged, inv, prob)
        if abs(merged.sum() - 1.0) > ATOL:
            raise ChannelError(f"probabilities sum to {merged.sum()!r}")
        for l, p in zip(vals, merged):
            if 0 < l < np.inf:
                hit = np.nonzero(vals == -l)[0]
                mirror = merged[hit[0]] if hit.size else 0.0
                if abs(mirror - p * np.exp(-l)) > ATOL:
                    raise ChannelError(f"density is not symmetric at llr {l}")
        for l in vals[(vals < 0)]:
            if not np.any(vals == -l):
                raise ChannelError(f"atom {l} has no positive partner")
        vals.setflags(write=False)
        merged.setflags(write=False)
        object.__setattr__(self, "llr", vals)
        object.__setattr__(self, "prob", merged)

    @property
    def tanh(self) -> np.ndarray:
        return np.tanh(self.llr / 2.0)

    @property
    def v(self) -> np.ndarray:
        """Squared conditional means per atom."""
        return self.tanh ** 2

    def __repr__(self) -> str:
        return f"SymmetricChannel({self.label or len(self.llr)} atoms)"


def perfect_channel() -> SymmetricChannel:
    return SymmetricChannel([np.inf], [1.0], "perfect")


def make_bec(eps: float) -> SymmetricChannel:
    if not 0.0 <= eps <= 1.0:
        raise ChannelError(f"erasure probability {eps} outside [0, 1]")
    return SymmetricChannel([np.inf, 0.0], [1.0 - eps, eps], f"bec:{eps!r}")


def make_bsc(p: float) -> SymmetricChannel:
    if not 0.0 <= p <= 0.5:
        raise ChannelError(f"crossover probability {p} outside [0, 1/2]")
    if p == 0.0:
        return SymmetricChannel([np.inf], [1.0], "bsc:0.0")
    l = log1p(-p) - log(p)
    return SymmetricChannel([l, -l], [1.0 - p, p], f"bsc:{p!r}")


def _normal_mass(lo: float, hi: float) -> float:
    """Standard normal mass on [lo, hi], evaluated in the numerically safe tail."""
    if hi <= 0:
        return float(norm.cdf(hi) - norm.cdf(lo))
    if lo >= 0:
        return float(norm.sf(lo) - norm.sf(hi))
    return float(1.0 - norm.cdf(lo) - norm.sf(hi))


def make_biawgn(sigma: float, bins: int = 64) -> SymmetricChannel:
    """Quantized binary-input AWGN channel with ``bins`` output atoms.

    The LLR given +1 is Gaussian with mean ``2/sigma^2`` and variance twice that.
    Its magnitude is cut into ``bins/2`` equal-probability cells; each cell and
    sign is one output symbol, whose LLR is computed exactly from the masses of
    the two signs. Merging outputs is a degradation, so the result is a valid
    symmetric channel that is slightly worse than the unquantized one.
    """
    if not sigma > 0 or bins < 8 or bins % 2:
        raise ChannelError(f"need sigma > 0 and even bins >= 8, got {sigma}, {bins}")
    mu = 2.0 / sigma ** 2
    s = 2.0 / sigma
    half = bins // 2

    def abs_cdf(x: float) -> float:
        return _normal_mass((-x - mu) / s, (x - mu) / s)

    top = mu + 60.0 * s
    edges = [0.0]
    for j in range(1, half):
        target = j / half
        edges.append(brentq(lambda x: abs_cdf(x) - target, edges[-1], top, xtol=1e-14, rtol=1e-15))
    edges.append(np.inf)
    llr, prob = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        pos = _normal_mass((a - mu) / s, (b - mu) / s)
        neg = _normal_mass((-b - mu) / s, (-a - mu) / s)
        if neg <= 0.0:
            llr.append(np.inf)
            prob.append(pos)
            continue
        l = log(pos / neg)
        llr += [l, -l]
        prob += [pos, pos * np.exp(-l)]
    prob = np.array(prob)
    prob /= prob.sum()
    return SymmetricChannel(llr, prob, f"biawgn:{sigma!r},{bins}")


def q_moment(channel: SymmetricChannel, k: int) -> float:
    if k < 1:
        raise ChannelError("moment index must be >= 1")
    return float(np.sum(channel.prob * channel.v ** k))


def entropy_series(channel: SymmetricChannel, tol: float = 1e-14):
    """H = sum_k c_k (1 - q_k), as a truncated series with its remainder bound."""
    # sum_k c_k (1 - q_k) = 1 - sum_k c_k sum_j p_j v_j^k
    s = power_series(channel.v, channel.prob, tol=tol)
    return 1.0 - s.value, s


def entropy_of(channel: SymmetricChannel) -> float:
    return entropy_series(channel)[0]


def entropy_direct(channel: SymmetricChannel) -> float:
    """E h_b((1 + |tanh(l/2)|) / 2) evaluated atom by atom."""
    return float(np.sum(channel.prob * h_b((1.0 + np.abs(channel.tanh)) / 2.0)))


def mmse_of(channel: SymmetricChannel) -> float:
    return 1.0 - q_moment(channel, 1)


def capacity_series(channel: SymmetricChannel, tol: float = 1e-14):
    """C = sum_k c_k q_k, with truncation details."""
    s = power_series(channel.v, channel.prob, tol=tol)
    return s.value, s


def capacity_of(channel: SymmetricChannel) -> float:
    return 1.0 - entropy_of(channel)


# ---------------------------------------------------------------------------
# Families


@dataclass(frozen=True)
class Mixture:
    """channel_at(t) = a * base + (1 - a) * (point mass at ``special``)."""

    base: SymmetricChannel
    special: float
    a: float
    segment: str


class ChannelFamily(ABC):
    """Degradation-ordered family indexed by t in [0, 1]."""

    kink: float | None = None
    label: str = ""

    @abstractmethod
    def channel_at(self, t: float) -> SymmetricChannel: ...

    @abstractmethod
    def H(self, t: float) -> float: ...

    @abstractmethod
    def M(self, t: float) -> float: ...

    def C(self, t: float) -> float:
        return 1.0 - self.H(t)

    @abstractmethod
    def q(self, t: float, k: int) -> float: ...

    @abstractmethod
    def dq_mixture(self, t: float, side: str | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Atoms (v, w) with -q_k'(t) = sum_j w_j v_j**k for every k."""

    def dq(self, t: float, k: int, side: str | None = None) -> float:
        v, w = self.dq_mixture(t, side)
        return -float(np.sum(w * v ** k))

    def Hprime(self, t: float, side: str | None = None) -> float:
        # H'(t) = sum_k c_k (-q_k'(t)) = sum_j w_j (1 - phi(v_j))
        v, w = self.dq_mixture(t, side)
        return power_series(v, w).value

    def Mprime(self, t: float, side: str | None = None) -> float:
        return -self.dq(t, 1, side)

    def mixture(self, t: float, side: str | None = None) -> Mixture | None:
        """Decomposition of channel_at(t) used by the fast exact path, if any."""
        return None

    def segments(self) -> list[tuple[float, float]]:
        if self.kink is None:
            return [(0.0, 1.0)]
        return [(0.0, self.kink), (self.kink, 1.0)]


def _check_t(t: float) -> float:
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ChannelError(f"t = {t} outside [0, 1]")
    return t


class InterpolatedFamily(ChannelFamily):
    """Mix the base channel with perfect observations below M* and erasures above.

    M* is the MMSE of the base channel. The family satisfies M(t) = t, starts
    perfect at t = 0, ends useless at t = 1 and passes through the base at M*.
    """

    def __init__(self, base: SymmetricChannel) -> None:
        self.base = base
        self.mstar = mmse_of(base)
        self.capacity = capacity_of(base)
        if not (1e-15 < self.capacity < 1 - 1e-15) or not (0.0 < self.mstar < 1.0):
            raise ChannelError("degenerate base: capacity must lie strictly inside (0, 1)")
        self.kink = self.mstar
        self.label = f"interp({base.label})"

    def segment(self, t: float, side: str | None = None) -> str:
        t = _check_t(t)
        if t < self.mstar:
            return "lower"
        if t > self.mstar:
            return "upper"
        if side == "-":
            return "lower"
        if side == "+":
            return "upper"
        raise KinkError(f"t = {t} is the kink; pass side='-' or side='+'")

    def weight(self, t: float, segment: str) -> float:
        if segment == "lower":
            return t / self.mstar
        return (1.0 - t) / (1.0 - self.mstar)

    def mixture(self, t: float, side: str | None = None) -> Mixture:
        t = _check_t(t)
        # at the kink both segments give the base channel itself
        seg = "lower" if (t == self.mstar and side is None) else self.segment(t, side)
        special = np.inf if seg == "lower" else 0.0
        return Mixture(self.base, special, self.weight(t, seg), seg)

    def channel_at(self, t: float) -> SymmetricChannel:
        mx = self.mixture(t)
        llr = np.concatenate([mx.base.llr, [mx.special]])
        prob = np.concatenate([mx.a * mx.base.prob, [1.0 - mx.a]])
        return SymmetricChannel(llr, prob, f"{self.label}@{t!r}")

    def H(self, t: float) -> float:
        t = _check_t(t)
        C = self.capacity
        if t < self.mstar:
            return (t / self.mstar) * (1.0 - C)
        return (t - self.mstar) / (1.0 - self.mstar) * C + 1.0 - C

    def M(self, t: float) -> float:
        return _check_t(t)

    def q(self, t: float, k: int) -> float:
        t = _check_t(t)
        qs = q_moment(self.base, k)
        if t < self.mstar:
            return 1.0 - (t / self.mstar) * (1.0 - qs)
        return (1.0 - t) / (1.0 - self.mstar) * qs

    def dq_mixture(self, t: float, side: str | None = None) -> tuple[np.ndarray, np.ndarray]:
        seg = self.segment(t, side)
        v, p = self.base.v, self.base.prob
        if seg == "lower":
            return np.concatenate([[1.0], v]), np.concatenate([[1.0 / self.mstar], -p / self.mstar])
        return v.copy(), p / (1.0 - self.mstar)

    def Hprime(self, t: float, side: str | None = None) -> float:
        seg = self.segment(t, side)
        if seg == "lower":
            return (1.0 - self.capacity) / self.mstar
        return self.capacity / (1.0 - self.mstar)


class ConstantFamily(ChannelFamily):
    """The same channel for every t. Useful as a degenerate reference."""

    def __init__(self, channel: SymmetricChannel) -> None:
        self.channel = channel
        self.label = f"const({channel.label})"
        self._H = entropy_of(channel)

    def channel_at(self, t: float) -> SymmetricChannel:
        _check_t(t)
        return self.channel

    def H(self, t: float) -> float:
        return self._H

    def M(self, t: float) -> float:
        return mmse_of(self.channel)

    def q(self, t: float, k: int) -> float:
        return q_moment(self.channel, k)

    def dq_mixture(self, t: float, side: str | None = None) -> tuple[np.ndarray, np.ndarray]:
        return np.zeros(0), np.zeros(0)


def interpolate(base: SymmetricChannel) -> InterpolatedFamily:
    return InterpolatedFamily(base)


def bec_family() -> InterpolatedFamily:
    """The erasure family BEC(t), written as an interpolated family."""
    return InterpolatedFamily(make_bec(0.5))


def default_grid(family: ChannelFamily, n: int = 201) -> np.ndarray:
    """``n`` uniform points on [0, 1], the nearest interior one moved onto the kink."""
    if n < 3:
        raise ChannelError("grid needs at least 3 points")
    grid = np.linspace(0.0, 1.0, n)
    if family.kink is not None and not np.any(grid == family.kink):
        j = int(np.argmin(np.abs(grid[1:-1] - family.kink))) + 1
        grid[j] = family.kink
    return grid


def degradation_check(family: ChannelFamily, grid, kmax: int = 20, tol: float = 1e-12) -> BoundReport:
    """q_k(t) must not increase along the grid; violation = largest increase."""
    grid = np.asarray(grid, dtype=float)
    qs = np.array([[family.q(t, k) for t in grid] for k in range(1, kmax + 1)])
    inc = np.diff(qs, axis=1)
    worst = inc.max(axis=0) if inc.size else np.zeros(0)
    return upper_report("degradation", grid[1:], worst, np.zeros_like(worst), tol, kmax=kmax)


def sandwich_report(family: ChannelFamily, grid, tol: float = 1e-12) -> list[BoundReport]:
    """M <= H <= h_b((1 - sqrt(1 - M)) / 2) and M(t) - M(s) <= 2 ln2 (H(t) - H(s))."""
    grid = np.asarray(grid, dtype=float)
    H = np.array([family.H(t) for t in grid])
    M = np.array([family.M(t) for t in grid])
    upper = h_b((1.0 - np.sqrt(np.clip(1.0 - M, 0.0, 1.0))) / 2.0)
    dM = M[None, :] - M[:, None]
    dH = H[None, :] - H[:, None]
    later = np.triu(np.ones((grid.size, grid.size), dtype=bool))
    diff_viol = np.where(later, dM - 2.0 * log(2.0) * dH, -np.inf).max(axis=0)
    return [
        upper_report("M<=H", grid, M, H, tol),
        upper_report("H<=hb", grid, H, upper, tol),
        upper_report("dM<=2ln2dH", grid, diff_viol, np.zeros_like(diff_viol), tol),
    ]


def biawgn_capacity_exact(sigma: float) -> float:
    """Unquantized BIAWGN capacity by adaptive quadrature (an oracle for tests)."""
    from scipy.integrate import quad

    mu = 2.0 / sigma ** 2
    s = sqrt(2.0 * mu)
    f = lambda x: norm.pdf(x, mu, s) * np.logaddexp(0.0, -x) / log(2.0)
    loss = quad(f, mu - 40 * s, mu + 40 * s, limit=400, epsabs=1e-13)[0]
    return 1.0 - loss


def biawgn_q1_exact(sigma: float) -> float:
    from scipy.integrate import quad

    mu = 2.0 / sigma ** 2
    s = sqrt(2.0 * mu)
    return quad(lambda x: norm.pdf(x, mu, s) * np.tanh(x / 2.0) ** 2, mu - 40 * s, mu + 40 * s,
                limit=400, epsabs=1e-13)[0]
