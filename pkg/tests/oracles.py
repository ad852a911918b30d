"""Brute-force reference computations used only by the tests.

These sum over every codeword and every output pattern with explicit
likelihoods, so they share no code path with the library's kernels.
"""

from __future__ import annotations

import itertools
from math import comb, log2

import numpy as np


def rm_generator(r, m):
    """Rows are monomials in degree then lexicographic order, evaluated at points v with v_j = bit j of the index."""
    rows = []
    for d in range(r + 1):
        for subset in itertools.combinations(range(m), d):
            rows.append([int(all((x >> j) & 1 for j in subset)) for x in range(1 << m)])
    return np.array(rows, dtype=np.uint8)


def codebook(gen):
    gen = np.asarray(gen, dtype=int)
    words = {tuple(int(v) for v in (np.array(msg) @ gen) % 2) for msg in itertools.product((0, 1), repeat=len(gen))}
    return sorted(words)


def output_model(llr, prob):
    """Output symbols (as LLR values) with P(y | +1) and P(y | -1)."""
    mass = {}
    for l, p in zip(llr, prob):
        mass[float(l)] = mass.get(float(l), 0.0) + float(p)
    outs = sorted(set(mass) | {-l for l in mass})
    return outs, [mass.get(o, 0.0) for o in outs], [mass.get(-o, 0.0) for o in outs]


def bit_stats(words, llr, prob, i, S):
    """(mmse, ber) of X_i from Y_S for a uniform codeword, by full enumeration."""
    outs, pp, pm = output_model(llr, prob)
    signs = [[1 - 2 * b for b in w] for w in words]
    mmse = ber = 0.0
    for ys in itertools.product(range(len(outs)), repeat=len(S)):
        joint_plus = joint_minus = 0.0
        for x in signs:
            p = 1.0 / len(words)
            for j, y in zip(S, ys):
                p *= pp[y] if x[j] > 0 else pm[y]
            if x[i] > 0:
                joint_plus += p
            else:
                joint_minus += p
        tot = joint_plus + joint_minus
        if tot > 0:
            f = (joint_plus - joint_minus) / tot
            mmse += tot * (1.0 - f * f)
            ber += min(joint_plus, joint_minus)
    return mmse, ber


def codeword_entropy(words, llr, prob):
    """H(X | Y) in bits with every position observed through the same channel."""
    outs, pp, pm = output_model(llr, prob)
    signs = [[1 - 2 * b for b in w] for w in words]
    n = len(words[0])
    h = 0.0
    for ys in itertools.product(range(len(outs)), repeat=n):
        ps = []
        for x in signs:
            p = 1.0 / len(words)
            for j in range(n):
                p *= pp[ys[j]] if x[j] > 0 else pm[ys[j]]
            ps.append(p)
        tot = sum(ps)
        h -= sum(p * log2(p / tot) for p in ps if p > 0)
    return h


def bec_bit_recovery(words, i, eps):
    """P(bit i is determined by the unerased others) on BEC(eps), by subset enumeration."""
    n = len(words[0])
    others = [j for j in range(n) if j != i]
    total = 0.0
    for kept in itertools.product((0, 1), repeat=len(others)):
        seen = [j for j, k in zip(others, kept) if k]
        # determined iff every codeword vanishing on the seen positions also has x_i = 0
        ok = all(w[i] == 0 for w in words if all(w[j] == 0 for j in seen))
        if ok:
            k = sum(kept)
            total += (1 - eps) ** k * eps ** (len(others) - k)
    return total


def rm_dimension(r, m):
    return sum(comb(m, j) for j in range(r + 1))


def codeword_entropy_mixed(words, channels):
    """H(X | Y) in bits with position j observed through channels[j] = (llr, prob) or None."""
    models = [output_model(*c) if c is not None else ([0.0], [1.0], [1.0]) for c in channels]
    signs = [[1 - 2 * b for b in w] for w in words]
    h = 0.0
    for ys in itertools.product(*[range(len(m[0])) for m in models]):
        ps = []
        for x in signs:
            p = 1.0 / len(words)
            for j, y in enumerate(ys):
                p *= models[j][1][y] if x[j] > 0 else models[j][2][y]
            ps.append(p)
        tot = sum(ps)
        h -= sum(p * log2(p / tot) for p in ps if p > 0)
    return h
