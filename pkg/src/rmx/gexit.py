"""GEXIT functions, their augmented variants, the two-look expansion and curve quadrature."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import fsum, log
from typing import Sequence

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .channels import ChannelFamily, KinkError, SymmetricChannel, default_grid
from .inference import BitProblem, BitStatistics, bit_statistics, codeword_entropy, extrinsic
from .reports import BoundReport, lower_report, upper_report
from .rm_code import Code, LinearCode, build_code
from .series import LN2, SeriesSum, coefficient_tail, coefficients, h_b, phi, power_series

C1 = 1.0 / (2.0 * LN2)


class GridTooCoarse(ValueError):
    """Quadrature needs at least 9 grid points."""


# ---------------------------------------------------------------------------
# Curves


@dataclass
class Curve:
    """Values on a sorted grid of [0, 1]. A repeated t marks a kink (sides '-' then '+')."""

    grid: np.ndarray
    values: np.ndarray
    sides: list[str] = field(default_factory=list)
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if not self.sides:
            self.sides = [""] * len(self.grid)
        if self.grid.shape != self.values.shape or len(self.sides) != len(self.grid):
            raise ValueError("grid, values and sides must have equal length")
        if np.any(np.diff(self.grid) < 0) or self.grid.size and (self.grid[0] < 0 or self.grid[-1] > 1):
            raise ValueError("grid must be sorted inside [0, 1]")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("curve values must be finite")

    def pieces(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Split at repeated grid points."""
        cuts = np.nonzero(np.diff(self.grid) == 0)[0] + 1
        return list(zip(np.split(self.grid, cuts), np.split(self.values, cuts)))

    def is_nondecreasing(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.diff(self.values) >= -tol))

    def map(self, fn, label: str = "") -> "Curve":
        return Curve(self.grid, fn(self.values), list(self.sides), label or self.label, dict(self.meta))


def kink_grid(family: ChannelFamily, n: int) -> tuple[np.ndarray, list[str]]:
    """Grid of ``n`` distinct points with the kink present, the kink listed twice."""
    if n < 9:
        raise GridTooCoarse(f"need at least 9 grid points, got {n}")
    base = default_grid(family, n)
    if family.kink is None or not 0.0 < family.kink < 1.0:
        return base, [""] * n
    j = int(np.nonzero(base == family.kink)[0][0])
    grid = np.insert(base, j, family.kink)
    sides = [""] * len(grid)
    sides[j], sides[j + 1] = "-", "+"
    return grid, sides


def _piece_integral(x: np.ndarray, y: np.ndarray) -> float:
    if x.size < 2:
        return 0.0
    if x.size == 2:
        return float(0.5 * (x[1] - x[0]) * (y[0] + y[1]))
    return float(simpson(y, x=x))


def area_integral(curve: Curve) -> float:
    """Composite Simpson integral over [0, 1], piecewise between kinks."""
    if len(np.unique(curve.grid)) < 9:
        raise GridTooCoarse(f"need at least 9 grid points, got {len(np.unique(curve.grid))}")
    if curve.grid[0] != 0.0 or curve.grid[-1] != 1.0:
        raise ValueError("grid must include both 0 and 1")
    return fsum(_piece_integral(x, y) for x, y in curve.pieces())


def cumulative_integral(curve: Curve) -> np.ndarray:
    """Integral from 0 to each grid point, by cumulative Simpson on each piece."""
    out, offset = [], 0.0
    for x, y in curve.pieces():
        if x.size >= 3:
            part = np.concatenate([[0.0], cumulative_simpson(y, x=x)])
        elif x.size == 2:
            part = np.array([0.0, 0.5 * (x[1] - x[0]) * (y[0] + y[1])])
        else:
            part = np.zeros(x.size)
        out.append(offset + part)
        offset += part[-1]
    return np.concatenate(out)


# ---------------------------------------------------------------------------
# Augmentations


@dataclass(frozen=True)
class Independent:
    """Side information independent of the codeword."""


@dataclass(frozen=True)
class SecondLook:
    """A second, independent channel output of bit ``j``."""

    j: int


@dataclass(frozen=True)
class Extended:
    """All outputs of the supercode RM(r, m + k) outside the first 2^m positions."""

    k: int = 1


def augmented_problem(code: LinearCode, i: int, aug) -> tuple[LinearCode, list[int]]:
    """(code, observed positions) that realise the augmented observation."""
    if aug is None or isinstance(aug, Independent):
        return code, extrinsic(code, i)
    if isinstance(aug, SecondLook):
        big = code.with_repeated(aug.j)
        return big, extrinsic(code, i) + [code.N]
    if isinstance(aug, Extended):
        if not isinstance(code, Code):
            raise TypeError("the extended augmentation needs a Reed-Muller code")
        sup = supercode(code.r, code.m, aug.k)
        return sup, extrinsic(sup, i)
    raise TypeError(f"unknown augmentation {aug!r}")


_SUPER: dict = {}


def supercode(r: int, m: int, k: int) -> Code:
    key = (r, m + k)
    if key not in _SUPER:
        _SUPER[key] = build_code(r, m + k)
    return _SUPER[key]


_AUG: dict = {}


def _stats(code: LinearCode, family: ChannelFamily, i: int, aug=None) -> BitStatistics:
    if aug is None or isinstance(aug, Independent):
        return bit_statistics(code, family, i)
    key = (id(code), i, aug)
    hit = _AUG.get(key)
    if hit is None or hit[0] is not code:
        hit = (code,) + augmented_problem(code, i, aug)
        _AUG[key] = hit
    return bit_statistics(hit[1], family, i, hit[2])


# ---------------------------------------------------------------------------
# GEXIT


def gexit_series(code: LinearCode, family: ChannelFamily, t: float, i: int, side: str | None = None) -> float:
    """G_i(t) = sum_k c_k (-q_k'(t)) (1 - E f^(2k)), summed exactly."""
    return _stats(code, family, i).gexit(t, side)


def gexit_augmented(code: LinearCode, family: ChannelFamily, t: float, i: int, augmentation,
                    side: str | None = None) -> float:
    """G_i^+(t): the same series with the moments of E[X_i | Y_~i, U]."""
    return _stats(code, family, i, augmentation).gexit(t, side)


def gexit_truncated(code: LinearCode, family: ChannelFamily, t: float, i: int, side: str | None = None,
                    augmentation=None, K: int = 4000) -> SeriesSum:
    """The GEXIT series summed term by term up to K, with the limit of the terms split off.

    With x_k = -q_k'(t) and y_k = 1 - E f^(2k), both converge to limits x, y;
    the sum is sum_{k<=K} c_k x_k y_k + x y sum_{k>K} c_k plus a remainder whose
    size is bounded by the slowest geometric rate among the non-unit atoms.
    """
    st = _stats(code, family, i, augmentation)
    v, w = family.dq_mixture(t, side)
    u, p = st.law(t, side)
    ks = np.arange(1, K + 1)
    c = coefficients(K)
    x = np.array([fsum(w * v ** k) for k in ks])
    y = 1.0 - np.array([fsum(p * u ** k) for k in ks])
    x_lim = fsum(w[v >= 1.0])
    y_lim = 1.0 - fsum(p[u >= 1.0])
    head = fsum(c * x * y)
    rate = max([0.0] + list(v[v < 1.0]) + list(u[u < 1.0]))
    scale = fsum(np.abs(w)) * 2.0
    cK = coefficients(K + 1)[-1]
    bound = scale * cK * rate ** (K + 1) / (1.0 - rate) if rate < 1 else float("inf")
    return SeriesSum(head + x_lim * y_lim * coefficient_tail(K), K, bound, 0)


def _fd_check(family: ChannelFamily, t: float, h: float) -> None:
    if not h > 1e-9:
        raise ValueError("step underflow: h must exceed 1e-9")
    if t - h < 0 or t + h > 1:
        raise ValueError("t +/- h must stay inside [0, 1]")
    if family.kink is not None and t - h <= family.kink <= t + h:
        raise KinkError("finite-difference stencil straddles the kink")


def gexit_fd(code: LinearCode, family: ChannelFamily, t: float, i: int, h: float = 1e-4,
             augmentation=None, vary: Sequence[int] | None = None) -> float:
    """Central difference in s of H(X | Y_i(s), everything else at t).

    ``vary`` lists the positions of the (possibly augmented) code that move with s;
    by default only position i.
    """
    _fd_check(family, t, h)
    big, obs = augmented_problem(code, i, augmentation)
    moving = {i} if vary is None else set(vary)
    seen = set(obs) | {i}

    def H(s: float) -> float:
        cs, ct = family.channel_at(s), family.channel_at(t)
        chans = [(cs if j in moving else ct) if j in seen else None for j in range(big.N)]
        return codeword_entropy(big, chans)

    return (H(t + h) - H(t - h)) / (2.0 * h)


def gii_fd(code: LinearCode, family: ChannelFamily, t: float, i: int, h: float = 1e-4) -> float:
    """d/ds H(X | Y_i(s), Y'_i(s), Y_~i(t)), both looks at bit i moving together."""
    return gexit_fd(code, family, t, i, h, SecondLook(i), vary=[i, code.N])


def gexit_diff_lower_bound(code: LinearCode, family: ChannelFamily, t: float, i: int, augmentation,
                           side: str | None = None) -> tuple[float, float]:
    """(G_i - G_i^+, c_1 (-q_1') (mmse(X_i | Y_~i) - mmse(X_i | Y_~i, U)))."""
    plain = _stats(code, family, i)
    aug = _stats(code, family, i, augmentation)
    lhs = plain.gexit(t, side) - aug.gexit(t, side)
    rhs = C1 * (-family.dq(t, 1, side)) * (plain.mmse(t) - aug.mmse(t))
    return lhs, rhs


def gexit_curve(code: LinearCode, family: ChannelFamily, i: int, n: int = 2001, augmentation=None) -> Curve:
    grid, sides = kink_grid(family, n)
    st = _stats(code, family, i, augmentation)
    vals = [st.gexit(t, s or None) for t, s in zip(grid, sides)]
    return Curve(grid, vals, sides, f"G_{i}", {"code": getattr(code, "label", ""), "family": family.label})


def mmse_curve(code: LinearCode, family: ChannelFamily, i: int, n: int = 2001, augmentation=None) -> Curve:
    grid, sides = kink_grid(family, n)
    st = _stats(code, family, i, augmentation)
    return Curve(grid, [st.mmse(t) for t in grid], sides, f"M_{i}",
                 {"code": getattr(code, "label", ""), "family": family.label})


def gij_integral_check(code: LinearCode, family: ChannelFamily, i: int, j: int, n: int = 2001,
                       tol: float = 1e-6) -> BoundReport:
    """Integral of G_i - G_i^j over [0, 1] against 1 / (N - 1)."""
    g = gexit_curve(code, family, i, n)
    gj = gexit_curve(code, family, i, n, SecondLook(j))
    val = area_integral(Curve(g.grid, g.values - gj.values, g.sides))
    return upper_report(f"Gij({i},{j})", [0.0], [val], [1.0 / (code.N - 1)], tol, value=val)


def bridge_reports(code: LinearCode, family: ChannelFamily, i: int, grid, sides=None,
                   tol: float = 1e-12) -> list[BoundReport]:
    """Pointwise GEXIT inequalities against H'(t) and the extrinsic MMSE."""
    sides = [None] * len(grid) if sides is None else [s or None for s in sides]
    st = _stats(code, family, i)
    G = np.array([st.gexit(t, s) for t, s in zip(grid, sides)])
    Hp = np.array([family.Hprime(t, s) for t, s in zip(grid, sides)])
    Mp = np.array([family.Mprime(t, s) for t, s in zip(grid, sides)])
    M = np.array([st.mmse(t) for t in grid])
    return [
        lower_report("G>=0", grid, G, np.zeros_like(G), tol),
        upper_report("G<=H'", grid, G, Hp, tol),
        lower_report("G>=M*H'", grid, G, M * Hp, tol),
        lower_report("H'-G>=(1-M)M'/2ln2", grid, Hp - G, (1.0 - M) * Mp * C1, tol),
        upper_report("H'-G<=(1-M)H'", grid, Hp - G, (1.0 - M) * Hp, tol),
    ]


# ---------------------------------------------------------------------------
# Two looks at one bit


def _law(side) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(side, SymmetricChannel):
        return side.tanh, side.prob
    vals, probs = side
    return np.asarray(vals, dtype=float), np.asarray(probs, dtype=float)


def two_look_series(channel: SymmetricChannel, side_law=None, side_moments=None, tol: float = 1e-15) -> SeriesSum:
    """H(X | Y, U) = sum_k c_k (1 - q_k)(1 - s_k) with s_k = E[E[X|U]^(2k)].

    ``side_law`` is the law of E[X|U] as (values, probs) or a channel; ``side_moments``
    is a finite sequence s_1..s_K, in which case the series stops at K and the
    tail bound is sum_{k>K} c_k.
    """
    q_v, q_p = channel.v, channel.prob
    if side_moments is not None:
        s = np.asarray(side_moments, dtype=float)
        K = len(s)
        q = np.array([fsum(q_p * q_v ** k) for k in range(1, K + 1)])
        val = fsum(coefficients(K) * (1.0 - q) * (1.0 - s))
        return SeriesSum(val, K, coefficient_tail(K), 0)
    vals, probs = _law(side_law if side_law is not None else ([0.0], [1.0]))
    u = vals ** 2
    # 1 - q_k - s_k + q_k s_k, each a mixture of powers
    sq = power_series(q_v, q_p, tol)
    ss = power_series(u, probs, tol)
    sx = power_series(np.outer(q_v, u).ravel(), np.outer(q_p, probs).ravel(), tol)
    val = 1.0 - sq.value - ss.value + sx.value
    return SeriesSum(val, max(sq.K, ss.K, sx.K), sq.tail_bound + ss.tail_bound + sx.tail_bound,
                     sq.resummed + ss.resummed + sx.resummed)


def two_look_entropy(channel: SymmetricChannel, side_law=None, side_moments=None) -> float:
    return two_look_series(channel, side_law, side_moments).value


def _likelihoods(channel: SymmetricChannel):
    """Output alphabet (by LLR value) and P(output | x = +1), P(output | x = -1)."""
    outs = np.union1d(channel.llr, -channel.llr)
    p_plus = np.array([channel.prob[channel.llr == o].sum() for o in outs])
    p_minus = np.array([channel.prob[channel.llr == -o].sum() for o in outs])
    return outs, p_plus, p_minus


def two_look_direct(channel_y: SymmetricChannel, channel_u: SymmetricChannel | None = None,
                    mu: float = 0.0) -> float:
    """H(X | Y, U) by enumerating inputs and both outputs; P(X = +1) = (1 + mu) / 2."""
    _, yp, ym = _likelihoods(channel_y)
    if channel_u is None:
        up, um = np.ones(1), np.ones(1)
    else:
        _, up, um = _likelihoods(channel_u)
    joint_p = (1 + mu) / 2 * np.outer(yp, up)
    joint_m = (1 - mu) / 2 * np.outer(ym, um)
    tot = joint_p + joint_m
    keep = tot > 0
    post = joint_p[keep] / tot[keep]
    return fsum(tot[keep] * h_b(np.clip(post, 0.0, 1.0)))


def ber_direct(channel_y: SymmetricChannel, channel_u: SymmetricChannel | None = None, mu: float = 0.0) -> float:
    """MAP error probability of X from (Y, U) by enumeration."""
    _, yp, ym = _likelihoods(channel_y)
    if channel_u is None:
        up, um = np.ones(1), np.ones(1)
    else:
        _, up, um = _likelihoods(channel_u)
    joint_p = (1 + mu) / 2 * np.outer(yp, up)
    joint_m = (1 - mu) / 2 * np.outer(ym, um)
    return fsum(np.minimum(joint_p, joint_m).ravel())


def mmse_direct(channel_u: SymmetricChannel | None, mu: float = 0.0) -> float:
    """E[(X - E[X|U])^2] by enumeration."""
    if channel_u is None:
        return 1.0 - mu * mu
    _, up, um = _likelihoods(channel_u)
    jp, jm = (1 + mu) / 2 * up, (1 - mu) / 2 * um
    tot = jp + jm
    keep = tot > 0
    mean = (jp[keep] - jm[keep]) / tot[keep]
    return fsum(tot[keep] * (1.0 - mean ** 2))
