# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: residue-class log sums and convolution prefixes.

Must stay drop-in compatible with apmlab._kernels._pykernels.
"""

import numpy as np

cimport numpy as cnp

BACKEND = "cython"


def residue_log_sums(primes, logs, int q):
    """Sum of log p over primes in each residue class mod q."""
    if q <= 0:
        raise ValueError("q must be positive")
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] p = np.ascontiguousarray(primes, dtype=np.uint64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.ascontiguousarray(logs, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(q, dtype=np.float64)
    cdef Py_ssize_t i, n = p.shape[0]
    cdef unsigned long long qq = <unsigned long long> q
    for i in range(n):
        out[p[i] % qq] += w[i]
    return out


def conv_prefix(g, int n):
    """c[m] = sum_{l=1}^{m-1} g[l] g[m-l] for m <= n (triangular self-convolution)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] gg = np.ascontiguousarray(g, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] c = np.zeros(max(n + 1, 1), dtype=np.float64)
    cdef Py_ssize_t m, l, half
    cdef double acc
    if n < 2:
        return c
    for m in range(2, n + 1):
        acc = 0.0
        half = m // 2
        for l in range(1, half + 1):
            if l != m - l:
                acc += 2.0 * gg[l] * gg[m - l]
            else:
                acc += gg[l] * gg[l]
        c[m] = acc
    return c
