"""Bound functions and the inequality checks built on them."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import fsum, log, sqrt

import numpy as np

from .channels import (ChannelFamily, ConstantFamily, InterpolatedFamily, SymmetricChannel,
                       capacity_of)
from .gexit import Curve, GridTooCoarse, ber_direct, cumulative_integral, mmse_direct
from .inference import bit_statistics
from .reports import BoundReport, equality_report, lower_report, upper_report
from .rm_code import Code, LinearCode
from .series import LN2, h_b

__all__ = ["h_b", "h_b_inv", "psi", "Psi", "rho", "t_R", "kappa", "area_bound_check",
           "integral_decay_check", "theorem_ber_bounds", "ber_mmse_sandwich", "ber_two_look_converse", "mtilde", "MTilde"]

QUAD_SLACK = 1e-6
EXACT_SLACK = 1e-12


class RateEqualsCapacity(ValueError):
    """The rate and the capacity coincide; the bounds are undefined."""


class NonTransitiveCode(ValueError):
    """The area bounds are only claimed for transitive codes."""


def h_b_inv(y, iterations: int = 200):
    """Inverse of h_b on [0, 1/2] by bisection, run to full double precision."""
    arr = np.asarray(y, dtype=float)
    if np.any((arr < 0) | (arr > 1)) or np.any(np.isnan(arr)):
        raise ValueError("h_b_inv needs arguments in [0, 1]")
    lo = np.zeros_like(arr)
    hi = np.full_like(arr, 0.5)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if np.all((mid == lo) | (mid == hi)):
            break
        below = np.asarray(h_b(mid)) < arr
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = np.where(arr >= 1.0, 0.5, np.where(arr <= 0.0, 0.0, 0.5 * (lo + hi)))
    return float(out) if out.ndim == 0 else out


def psi(u):
    """1 - (1 - 2 h_b^-1(u))^2."""
    return 1.0 - (1.0 - 2.0 * h_b_inv(u)) ** 2


def _adaptive_simpson(f, a: float, b: float, tol: float, depth: int = 60) -> float:
    def simpson(fa, fm, fb, a, b):
        return (b - a) * (fa + 4 * fm + fb) / 6.0

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left, right = simpson(fa, flm, fm, a, m), simpson(fm, frm, fb, m, b)
        if depth <= 0 or abs(left + right - whole) <= 15 * tol:
            return left + right + (left + right - whole) / 15.0
        return rec(a, m, fa, flm, fm, left, tol / 2, depth - 1) + rec(m, b, fm, frm, fb, right, tol / 2, depth - 1)

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return rec(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, depth)


def Psi(u: float, tol: float = 1e-10) -> float:
    """Integral of psi from 0 to u by adaptive Simpson."""
    if not 0.0 <= u <= 1.0:
        raise ValueError("Psi needs u in [0, 1]")
    if u == 0.0:
        return 0.0
    return _adaptive_simpson(lambda x: float(psi(x)), 0.0, float(u), tol)


def rho(m: float) -> float:
    if m < 1:
        raise ValueError("rho needs m >= 1")
    return (6.0 * log(m) + 34.0) / (5.0 * sqrt(m))


def t_R(family: ChannelFamily, R: float, iterations: int = 200) -> float:
    """The t where the family capacity C(t) equals R, by bisection."""
    if not 0.0 < R < 1.0:
        raise ValueError(f"rate {R} outside (0, 1)")
    lo, hi = 0.0, 1.0
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if family.C(mid) > R:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def kappa(family: ChannelFamily, t: float) -> float:
    """sup of H'(s) over s in [t, 1]."""
    if isinstance(family, InterpolatedFamily):
        up = family.Hprime(1.0)
        return max(family.Hprime(0.0), up) if t < family.mstar else up
    if isinstance(family, ConstantFamily):
        return 0.0
    raise TypeError("kappa needs a family with piecewise-constant H'")


def _require_transitive(code: LinearCode) -> None:
    # the affine group of an RM code contains all translations, so it is transitive
    if not isinstance(code, Code):
        raise NonTransitiveCode("area bounds are only checked for Reed-Muller codes")


def _unique_curve(curve: Curve) -> tuple[np.ndarray, np.ndarray]:
    keep = np.concatenate([[True], np.diff(curve.grid) > 0])
    return curve.grid[keep], curve.values[keep]


def _with_kink(family: ChannelFamily, xs: np.ndarray, ys_fn) -> Curve:
    """Curve of ys_fn on xs, the family kink duplicated so quadrature splits there."""
    xs = np.unique(xs)
    k = family.kink
    sides = [""] * len(xs)
    if k is not None and xs[0] < k < xs[-1]:
        if k not in xs:
            xs = np.sort(np.append(xs, k))
        j = int(np.nonzero(xs == k)[0][0])
        xs = np.insert(xs, j, k)
        sides = [""] * len(xs)
        sides[j], sides[j + 1] = "-", "+"
    return Curve(xs, ys_fn(xs), sides)


def area_bound_check(code: LinearCode, family: ChannelFamily, M_curve: Curve, R: float,
                     tol: float = QUAD_SLACK) -> tuple[BoundReport, BoundReport]:
    """Upper bound on M below t_R and lower bound above it, on the curve's grid points."""
    _require_transitive(code)
    if len(np.unique(M_curve.grid)) < 9:
        raise GridTooCoarse("need at least 9 grid points")
    R = float(R)
    tr = t_R(family, R)
    grid, M = _unique_curve(M_curve)
    var = Curve(M_curve.grid, M_curve.values * (1.0 - M_curve.values), M_curve.sides)
    Fv_all = cumulative_integral(var)
    keep = np.concatenate([[True], np.diff(M_curve.grid) > 0])
    Fv = Fv_all[keep]
    total = Fv[-1]

    below = grid < tr
    C = np.array([family.C(t) for t in grid])
    kap = np.array([kappa(family, t) for t in grid])
    ub = np.full(grid.shape, np.inf)
    ub[below] = kap[below] * (total - Fv[below]) / (C[below] - R)
    up = upper_report("area_UB", grid[below], M[below], ub[below], tol, t_R=tr)

    above = grid > tr
    Fv_tr = float(np.interp(tr, grid, Fv))
    xs = np.concatenate([[tr], grid[above]])
    psi_curve = _with_kink(family, xs, lambda s: psi(np.clip(R - np.array([family.C(x) for x in s]), 0.0, 1.0)))
    Fp_all = cumulative_integral(psi_curve)
    keep_p = np.concatenate([[True], np.diff(psi_curve.grid) > 0])
    Fp = dict(zip(psi_curve.grid[keep_p], Fp_all[keep_p]))
    den = np.array([Fp[t] for t in grid[above]])
    num = Fv[above] - Fv_tr
    with np.errstate(divide="ignore", invalid="ignore"):
        lb = np.where(den > 0, 1.0 - num / den, -np.inf)
    low = lower_report("area_LB", grid[above], M[above], lb, tol, t_R=tr)
    return up, low


def integral_decay_check(code: Code, family: ChannelFamily, M_curve: Curve | None = None,
                         n: int = 2001, tol: float = QUAD_SLACK) -> BoundReport:
    """Integral of M (1 - M) over [0, 1] against rho(m)."""
    from .gexit import area_integral, mmse_curve

    if M_curve is None:
        M_curve = mmse_curve(code, family, 0, n)
    val = area_integral(M_curve.map(lambda m: m * (1.0 - m)))
    return upper_report("integral_decay", [0.0], [val], [rho(code.m) if code.m >= 1 else np.inf], tol,
                        integral=val)


def theorem_ber_bounds(code: Code, base: SymmetricChannel, i: int = 0, tol: float = QUAD_SLACK) -> list[BoundReport]:
    """BER and extrinsic MMSE bounds at the base channel, in whichever regime R sits."""
    R = float(code.rate)
    C = capacity_of(base)
    if abs(C - R) < EXACT_SLACK:
        raise RateEqualsCapacity(f"rate {R} equals capacity {C}")
    fam = ConstantFamily(base)
    ext = bit_statistics(code, fam, i)
    ber = ext.ber_with_own_look(0.0)
    mmse = ext.mmse(0.0)
    r = rho(code.m)
    if R < C:
        return [
            upper_report("BER_UB", [0.0], [ber], [0.5 * r / (C - R)], tol, R=R, C=C),
            upper_report("MMSE_UB", [0.0], [mmse], [r / (C - R)], tol, R=R, C=C),
        ]
    single = 0.5 * (1.0 - fsum(base.prob * np.abs(base.tanh)))
    a, b = float(psi(1.0 - C)), Psi(R - C)
    ber_lb = single - (1.0 - C) * sqrt(LN2 * r / (2.0 * a * b))
    mmse_lb = 1.0 - (1.0 - C) * r / (a * b)
    return [
        lower_report("BER_LB", [0.0], [ber], [ber_lb], tol, R=R, C=C),
        lower_report("MMSE_LB", [0.0], [mmse], [mmse_lb], tol, R=R, C=C),
    ]


def ber_mmse_sandwich(code: LinearCode, family: ChannelFamily, i: int, grid,
                      tol: float = EXACT_SLACK) -> list[BoundReport]:
    """(1 - sqrt(1 - M)) / 2 <= BER <= M / 2 for the extrinsic estimate of bit i."""
    grid = np.asarray(grid, dtype=float)
    st = bit_statistics(code, family, i)
    M = np.array([st.mmse(t) for t in grid])
    ber = np.array([st.ber(t) for t in grid])
    low = 0.5 * (1.0 - np.sqrt(np.clip(1.0 - M, 0.0, 1.0)))
    return [lower_report("BER>=(1-sqrt(1-M))/2", grid, ber, low, tol),
            upper_report("BER<=M/2", grid, ber, 0.5 * M, tol)]


def ber_two_look_converse(channel: SymmetricChannel, side: SymmetricChannel | None = None, mu: float = 0.0,
                          tol: float = EXACT_SLACK) -> BoundReport:
    """BER(X | Y, U) >= BER(X | Y) - sqrt(ln2 (1 - C)(1 - mmse(X | U)) / 2), all by enumeration."""
    C = capacity_of(channel)
    both = ber_direct(channel, side, mu)
    alone = ber_direct(channel, None, mu)
    side_mmse = mmse_direct(side, mu)
    bound = alone - sqrt(max(LN2 * (1.0 - C) * (1.0 - side_mmse) / 2.0, 0.0))
    return lower_report("BER_two_look", [0.0], [both], [bound], tol, side_mmse=side_mmse, ber_y=alone)


@dataclass(frozen=True)
class MTilde:
    """Step profile that meets the area upper bound with equality on the BEC family."""

    R: float
    rho: float
    t_star: float
    u_star: float
    plateau: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.where(t < self.t_star, 0.0, np.where(t < self.u_star, float(self.plateau), 1.0))
        return float(out) if out.ndim == 0 else out

    def integral(self):
        """Integral of M H' over [0, 1]; H' = 1 on the BEC family."""
        return self.plateau * (self.u_star - self.t_star) + (1 - self.u_star)

    def variance_integral(self):
        return self.plateau * (1 - self.plateau) * (self.u_star - self.t_star)

    def upper_bound_at_tstar(self):
        """kappa * integral_{t*}^1 M (1 - M) / (C(t*) - R) with kappa = 1 and C(t) = 1 - t."""
        return self.variance_integral() / (1 - self.t_star - self.R)


def mtilde(R, rho_value, t_star) -> MTilde:
    """Exact arithmetic when the inputs are Fractions, floating point otherwise."""
    if not 0 < R < 1 or not 0 < rho_value < 1 - R or not 0 <= t_star < 1 - R - rho_value:
        raise ValueError("need 0 < R < 1, 0 < rho < 1 - R and 0 <= t* < 1 - R - rho")
    gap = 1 - t_star - R
    u = 1 - R + rho_value * gap / (gap - rho_value)
    if u > 1:
        raise ValueError(f"u* = {u} exceeds 1")
    return MTilde(R, rho_value, t_star, u, rho_value / gap)


def mtilde_reports(m: MTilde) -> list[BoundReport]:
    return [
        equality_report("mtilde_area", [0.0], [float(m.integral())], [float(m.R)], EXACT_SLACK),
        equality_report("mtilde_variance", [0.0], [float(m.variance_integral())], [float(m.rho)], EXACT_SLACK),
        equality_report("mtilde_UB_equality", [float(m.t_star)], [float(m.plateau)],
                        [float(m.upper_bound_at_tstar())], EXACT_SLACK),
    ]
