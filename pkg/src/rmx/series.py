"""Binary entropy and its power series in the squared conditional mean.

For ``mu`` in [-1, 1],

    h_b((1 + mu) / 2) = sum_k c_k (1 - mu**(2k)),   c_k = 1 / (ln2 * 2k * (2k - 1)),

and ``sum_k c_k = 1``. Everything is written in terms of ``v = mu**2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import log

import numpy as np
from scipy.special import digamma, entr

LN2 = log(2.0)


def h_b(x):
    """Binary entropy in bits, with 0 log 0 = 0. Accepts scalars or arrays."""
    arr = np.asarray(x, dtype=float)
    if np.any((arr < 0) | (arr > 1)) or np.any(np.isnan(arr)):
        raise ValueError("h_b needs arguments in [0, 1]")
    out = (entr(arr) + entr(1.0 - arr)) / LN2
    return float(out) if out.ndim == 0 else out


def phi(v):
    """sum_k c_k (1 - v**k) summed in closed form, i.e. h_b((1 + sqrt v) / 2)."""
    v = np.clip(np.asarray(v, dtype=float), 0.0, 1.0)
    s = np.sqrt(v)
    lo = (1.0 - v) / (2.0 * (1.0 + s))
    out = (entr(lo) + entr(1.0 - lo)) / LN2
    return float(out) if out.ndim == 0 else out


def coefficients(K: int) -> np.ndarray:
    k = np.arange(1, K + 1, dtype=float)
    return 1.0 / (LN2 * 2.0 * k * (2.0 * k - 1.0))


def coefficient_tail(K: int) -> float:
    """sum_{k > K} c_k, exactly."""
    if K == 0:
        return 1.0
    return float((digamma(K + 1.0) - digamma(K + 0.5)) / (2.0 * LN2))


@dataclass(frozen=True)
class SeriesTerms:
    """A truncated series: terms used, their coefficients and a remainder bound."""

    K: int
    coefficients: np.ndarray
    tail_bound: float

    @classmethod
    def upto(cls, K: int) -> "SeriesTerms":
        return cls(K=K, coefficients=coefficients(K), tail_bound=coefficient_tail(K))


@dataclass(frozen=True)
class SeriesSum:
    value: float
    K: int
    tail_bound: float
    resummed: int


def power_series(v, w, tol: float = 1e-14, kmax: int = 4096) -> SeriesSum:
    """Truncated evaluation of sum_k c_k sum_j w_j v_j**k with a remainder bound.

    Atoms with ``v = 1`` contribute ``w`` exactly since the coefficients sum to one.
    Atoms with ``v < 1`` are summed up to the first K with
    ``c_1 v**(K+1) / (1 - v) <= tol``. An atom that would need more than ``kmax``
    terms is summed in closed form and counted in ``resummed``.
    """
    v = np.asarray(v, dtype=float).ravel()
    w = np.asarray(w, dtype=float).ravel()
    if v.shape != w.shape:
        raise ValueError("v and w must have the same shape")
    if np.any((v < 0) | (v > 1)):
        raise ValueError("series variable must lie in [0, 1]")
    unit = v >= 1.0
    total = float(np.sum(w[unit]))
    live = (~unit) & (v > 0) & (w != 0)
    vl, wl = v[live], w[live]
    c1 = 1.0 / (2.0 * LN2)
    with np.errstate(divide="ignore"):
        need = np.ceil(np.log(tol * (1.0 - vl) / c1) / np.log(vl)).astype(float)
    need = np.maximum(need, 1.0)
    far = need > kmax
    if np.any(far):
        total += float(np.sum(wl[far] * (1.0 - phi(vl[far]))))
    vn, wn, kn = vl[~far], wl[~far], need[~far].astype(int)
    K = int(kn.max()) if kn.size else 0
    bound = 0.0
    if K:
        c = coefficients(K)
        for lo in range(0, vn.size, 256):
            vb, wb, kb = vn[lo:lo + 256], wn[lo:lo + 256], kn[lo:lo + 256]
            ks = np.arange(1, K + 1)
            powers = vb[:, None] ** ks[None, :]
            powers[ks[None, :] > kb[:, None]] = 0.0
            total += float(np.sum(wb * (powers @ c)))
            cn = 1.0 / (LN2 * 2.0 * (kb + 1) * (2.0 * kb + 1))
            bound += float(np.sum(np.abs(wb) * cn * vb ** (kb + 1) / (1.0 - vb)))
    return SeriesSum(value=total, K=K, tail_bound=bound, resummed=int(np.sum(far)))
