"""Brute-force reference computations.

These enumerate every input tuple or every (pattern, error word) pair and
deliberately share no code with the package's fast paths.
"""
import itertools

import numpy as np


def random_pmf(rng, n_levels, sparsity=0.3):
    m = rng.dirichlet(np.full(n_levels, 0.7))
    m[rng.random(n_levels) < sparsity] = 0.0
    if m.sum() == 0:
        m[rng.integers(n_levels)] = 1.0
    return m / m.sum()


def check_law(p, d_c):
    L = len(p)
    M = L // 2
    out = np.zeros(L)
    for tup in itertools.product(range(L), repeat=d_c - 1):
        w = 1.0
        for i in tup:
            w *= p[i]
        if w == 0.0:
            continue
        vals = [i - M for i in tup]
        sign = 1
        for v in vals:
            if v < 0:
                sign = -sign
        out[sign * min(abs(v) for v in vals) + M] += w
    return out


def saturated_sum_law(p0, q, copies):
    L = len(p0)
    M = L // 2
    out = np.zeros(L)
    for i0 in range(L):
        if p0[i0] == 0.0:
            continue
        for tup in itertools.product(range(L), repeat=copies):
            w = p0[i0]
            for i in tup:
                w *= q[i]
            if w == 0.0:
                continue
            s = (i0 - M) + sum(i - M for i in tup)
            out[max(-M, min(M, s)) + M] += w
    return out


def corrupted_law(p, bits, delta):
    """Enumerate input words (zero split evenly) times all error words."""
    M = 2 ** (bits - 1) - 1
    out = np.zeros(2 * M + 1)
    for idx, mass in enumerate(p):
        v = idx - M
        if v > 0:
            words = [(v, 1.0)]
        elif v < 0:
            words = [((1 << (bits - 1)) + (-v), 1.0)]
        else:
            words = [(0, 0.5), (1 << (bits - 1), 0.5)]
        for word, share in words:
            for e in range(2 ** bits):
                wt = bin(e).count("1")
                pe = delta ** wt * (1 - delta) ** (bits - wt)
                r = word ^ e
                mag = r % (1 << (bits - 1))
                val = -mag if r >= (1 << (bits - 1)) else mag
                out[val + M] += mass * share * pe
    return out
