"""Pure-numpy fallbacks for the hot kernels.

Semantics must match apmlab._kernels._ckernels; both backends are exercised
by the test suite and timed against each other in benchmarks/bench_kernels.py.
Reductions that must be bit-identical across worker counts are not done here:
kernels return per-item arrays and the callers combine them with math.fsum in
a fixed order.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def residue_log_sums(primes: np.ndarray, logs: np.ndarray, q: int) -> np.ndarray:
    """Sum of log p over primes in each residue class mod q.

    Returns a length-q float64 array t with t[a] = sum(logs[primes % q == a]),
    accumulated in ascending prime order.
    """
    if q <= 0:
        raise ValueError("q must be positive")
    res = (primes % np.uint64(q)).astype(np.int64)
    return np.bincount(res, weights=logs, minlength=q)


def conv_prefix(g: np.ndarray, n: int) -> np.ndarray:
    """Prefix of the self-convolution of g.

    Returns c with c[m] = sum_{l=1}^{m-1} g[l] * g[m-l] for 0 <= m <= n
    (so c[0] = c[1] = 0).  g must have length >= n; g[0] is ignored.
    """
    if n < 2:
        return np.zeros(max(n + 1, 1), dtype=np.float64)
    body = np.asarray(g[1:n], dtype=np.float64)
    full = np.convolve(body, body)
    c = np.zeros(n + 1, dtype=np.float64)
    c[2:] = full[: n - 1]  # full[k] is the m = k + 2 diagonal sum
    return c
