"""Vectorized Riemann zeta on vertical strips.

Euler--Maclaurin with a per-point cutoff N ~ max(24, 0.55|t|) and fifteen
Bernoulli correction terms.  With that cutoff the remainder after the B_30
term stays below ~1e-11 on the whole validated domain

    -1 <= Re s,  |Im s| <= 1e4,  s != 1,

so no functional-equation reflection is needed (reflection only pays off for
Re s well below -1).  The cutoff is deliberately small: the dominant error at
large |t| is phase-quantization noise in the partial sum (it grows like
N^(3/2 - Re s) * |t| * 2^-53), so a shorter main sum is both faster and more
accurate.  Validated against mpmath in the test suite (1e-10 relative).

Heights up to 4.2e4 are accepted for the doubled-argument zeta(2s+2)
factors that the accelerated products feed in; the same noise model keeps
the relative error below ~2e-6 out there.

The evaluator is vectorized over mixed-height points: points are sorted by
cutoff and the partial sums are accumulated suffix-wise, so the total work is
sum_i N_i array element operations instead of len(s) * max N.
"""

from __future__ import annotations

import numpy as np

_EM_TERMS = 15  # Bernoulli pairs B_2 .. B_30

# B_{2k} / (2k)! for k = 1..15.
_BERN = np.array(
    [
        8.333333333333333e-02,    # B2/2!   = 1/12
        -1.3888888888888889e-03,  # B4/4!   = -1/720
        3.3068783068783067e-05,   # B6/6!   = 1/30240
        -8.267195767195768e-07,   # B8/8!   = -1/1209600
        2.08767569878681e-08,     # B10/10!
        -5.284190138687493e-10,   # B12/12!
        1.3382536530684679e-11,   # B14/14!
        -3.389680296322583e-13,   # B16/16!
        8.586062056277845e-15,    # B18/18!
        -2.1748686985580617e-16,  # B20/20!
        5.509002828360229e-18,    # B22/22!
        -1.3954464685812522e-19,  # B24/24!
        3.534707039629467e-21,    # B26/26!
        -8.953517427037546e-23,   # B28/28!
        2.267952452337683e-24,    # B30/30!
    ],
    dtype=np.float64,
)


def zeta(s) -> np.ndarray | complex:
    """zeta(s) for scalar or array s with -1 <= Re s, |Im s| <= 1e4, s != 1."""
    arr = np.asarray(s, dtype=np.complex128)
    scalar = arr.ndim == 0
    flat = np.atleast_1d(arr).ravel()
    if flat.size == 0:
        return arr.astype(np.complex128)
    if np.any(flat.real < -1.0 - 1e-12):
        raise ValueError("zeta: Re s < -1 not supported")
    if np.any(np.abs(flat.imag) > 4.2e4 + 1.0):
        raise ValueError("zeta: |Im s| > 4.2e4 not supported")

    n_pts = flat.size
    cut = np.maximum(24, np.ceil(0.55 * np.abs(flat.imag))).astype(np.int64)
    order = np.argsort(cut, kind="stable")
    cut_sorted = cut[order]
    s_sorted = flat[order]

    out = np.zeros(n_pts, dtype=np.complex128)
    # partial sums sum_{n < N_i} n^{-s_i}: term n hits the suffix of points
    # (in cutoff-sorted order) whose cutoff exceeds n.
    start = 0
    n = 1
    n_max = int(cut_sorted[-1])
    while n < n_max:
        while start < n_pts and cut_sorted[start] <= n:
            start += 1
        if start >= n_pts:
            break
        out[start:] += np.exp(-np.log(n) * s_sorted[start:])
        n += 1

    logN = np.log(cut_sorted.astype(np.float64))
    em = np.exp((1.0 - s_sorted) * logN) / (s_sorted - 1.0)
    em += 0.5 * np.exp(-s_sorted * logN)
    # Bernoulli tail: B_{2k}/(2k)! * (s)_{2k-1} * N^{-s-2k+1}
    poch = s_sorted.copy()  # rising factorial (s)_1
    power = np.exp((-s_sorted - 1.0) * logN)
    invN2 = np.exp(-2.0 * logN)
    for k in range(1, _EM_TERMS + 1):
        em += _BERN[k - 1] * poch * power
        if k < _EM_TERMS:
            poch = poch * (s_sorted + 2 * k - 1) * (s_sorted + 2 * k)
            power = power * invN2
    out += em

    result = np.empty(n_pts, dtype=np.complex128)
    result[order] = out
    result = result.reshape(np.atleast_1d(arr).shape)
    return complex(result[0]) if scalar else result
