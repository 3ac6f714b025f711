"""Brute-force lattice sums over pairs Delta*(l + l') <= X.

These are the quadratic-cost oracles that every analytic main term in the
package is measured against.  The triple sum over (Delta, l, l') is grouped
by lt = l + l': for each squarefree Delta the inner double sum collapses to
the self-convolution

    c_Delta(lt) = sum_{l=1}^{lt-1} Gamma_Delta(l) * Gamma_Delta(lt - l),

which the compiled kernel produces as a prefix table in O((X/Delta)^2) time.
Summing that over squarefree Delta costs about 1.5 X^2 multiply-adds per
evaluation, which is why X is capped at 3e4: past that the brute force stops
being a practical oracle and a faster algorithm is explicitly a non-goal.

Determinism: the outer Delta loop is chunked at fixed boundaries and reduced
with math.fsum in Delta order, and per-Delta reductions are numpy dots over
arrays whose layout depends only on (Delta, X).  Worker counts never change
a bit of the output.

Gamma_Delta, I, g_Delta and psi_1 are multiplicative and depend only on the
set of primes dividing the argument, so their float mirrors are memoized per
prime-set signature (factorizations come from a smallest-prime-factor table,
not per-entry trial division), and the dense Gamma/psi_1 tables are filled by
one sieve pass per prime.  Float error here is harmless: the identity checks
discriminate at relative scale 1e-9 and the asymptotic checks at X^0.4, both
far above double rounding on ~1e4-term sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kernels
from .constants import c8
from .localfactors import (
    I_local,
    K_local,
    U_of,
    psi1_local,
    r_local,
)
from .util import chunk_bounds, fsum, run_chunked

__all__ = [
    "SUM_IDS",
    "X_BUDGET",
    "LatticeSumResult",
    "MWeights",
    "jstar",
    "jcal",
    "l_sum",
    "identity_check",
    "dsum_identity_check",
    "psi1_sums",
    "m1_weight",
    "m2_weight",
    "m_sums",
    "mu_phi_sum",
    "clear_tables",
]

X_BUDGET = 3.0e4

SUM_IDS = (
    "Jstar",
    "Jcal",
    "L",
    "psi1_linear",
    "psi1_quadratic",
    "psi1_plain",
    "psi1_log",
    "M1sum",
    "M2sum",
    "mu_phi",
)


@dataclass(frozen=True)
class LatticeSumResult:
    X: float
    value: float
    term_count: int
    sum_id: str

    def __post_init__(self) -> None:
        if self.sum_id not in SUM_IDS:
            raise ValueError(f"unknown sum_id {self.sum_id!r}")


@dataclass(frozen=True)
class MWeights:
    """Parameters of the two smoothed weights M_1, M_2 on the l-sum.

    X, gamma_M and delta_M are derived from (x, Q); they are stored (rather
    than recomputed) so a result row can echo exactly what was summed.
    """

    x: float
    Q: float
    X: float = field(init=False)
    gamma_M: float = field(init=False)
    delta_M: float = field(init=False)

    def __post_init__(self) -> None:
        if self.x <= 0 or self.Q <= 0:
            raise ValueError("MWeights needs x > 0 and Q > 0")
        object.__setattr__(self, "X", self.x / self.Q)
        object.__setattr__(self, "gamma_M", 0.5 * math.log(self.x) - 0.25)
        object.__setattr__(self, "delta_M", 0.75 - 0.5 * math.log(self.x))


# -- factor tables ------------------------------------------------------------
#
# All caches grow monotonically and only ever extend to longer tables whose
# prefixes are bitwise identical to the shorter ones they replace (both
# backends fill c[m] from g[1..m-1] in ascending order), so caching cannot
# change any result.

_SPF: np.ndarray = np.zeros(2, dtype=np.int64)
_SQFREE: np.ndarray = np.array([False, True])
_GAMMA: dict[tuple[int, ...], np.ndarray] = {}
_CONV: dict[tuple[int, ...], np.ndarray] = {}
_PSI1: np.ndarray = np.zeros(1, dtype=np.float64)
_R_F: dict[int, float] = {}
_I_F: dict[tuple[int, ...], float] = {}
_SIG: dict[int, tuple[int, ...]] = {}


def clear_tables() -> None:
    """Drop all memoized factor tables (mainly for tests)."""
    global _SPF, _SQFREE, _PSI1
    _SPF = np.zeros(2, dtype=np.int64)
    _SQFREE = np.array([False, True])
    _PSI1 = np.zeros(1, dtype=np.float64)
    _GAMMA.clear()
    _CONV.clear()
    _R_F.clear()
    _I_F.clear()
    _SIG.clear()


def _spf_table(n: int) -> np.ndarray:
    """Smallest-prime-factor table for 0..n (entries 0, 1 unused)."""
    global _SPF, _SQFREE
    if len(_SPF) >= n + 1:
        return _SPF
    spf = np.zeros(n + 1, dtype=np.int64)
    for p in range(2, n + 1):
        if spf[p] == 0:
            view = spf[p::p]
            view[view == 0] = p
    sqfree = np.ones(n + 1, dtype=bool)
    sqfree[0] = False
    for p in range(2, math.isqrt(n) + 1):
        if spf[p] == p:
            sqfree[p * p :: p * p] = False
    _SPF, _SQFREE = spf, sqfree
    return _SPF


def _primes_upto(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    spf = _spf_table(n)
    primes = np.nonzero(spf == np.arange(len(spf)))[0]
    return primes[(primes >= 2) & (primes <= n)]


def _squarefree_upto(n: int) -> np.ndarray:
    _spf_table(n)
    return np.nonzero(_SQFREE[: n + 1])[0]


def _signature(m: int) -> tuple[int, ...]:
    """Ascending tuple of distinct primes dividing m (the prime-set key)."""
    sig = _SIG.get(m)
    if sig is not None:
        return sig
    spf = _spf_table(max(m, 2))
    primes = []
    k = m
    while k > 1:
        p = int(spf[k])
        primes.append(p)
        while k % p == 0:
            k //= p
    sig = tuple(primes)
    _SIG[m] = sig
    return sig


def _r_float(p: int) -> float:
    v = _R_F.get(p)
    if v is None:
        v = float(r_local(p))
        _R_F[p] = v
    return v


def _i_float(delta: int) -> float:
    """float I(Delta) for squarefree Delta, memoized per prime set."""
    sig = _signature(delta)
    v = _I_F.get(sig)
    if v is None:
        v = 1.0
        for p in sig:
            v *= float(I_local(p))
        _I_F[sig] = v
    return v


def _gamma_table(n: int, delta: int) -> np.ndarray:
    """Gamma_Delta(l) for l = 0..n as float64 (index 0 is set to 0)."""
    sig = _signature(delta)
    tbl = _GAMMA.get(sig)
    if tbl is not None and len(tbl) >= n + 1:
        return tbl[: n + 1]
    g = np.ones(n + 1, dtype=np.float64)
    g[0] = 0.0
    for p in _primes_upto(n):
        p = int(p)
        if p in sig:
            continue
        g[p::p] *= 1.0 + _r_float(p)
    _GAMMA[sig] = g
    return g


def _conv_table(n: int, delta: int) -> np.ndarray:
    """c_Delta(m) for m = 0..n (prefix of the Gamma_Delta self-convolution)."""
    sig = _signature(delta)
    tbl = _CONV.get(sig)
    if tbl is not None and len(tbl) >= n + 1:
        return tbl[: n + 1]
    c = kernels.conv_prefix(_gamma_table(n, delta), n)
    _CONV[sig] = c
    return c


def _psi1_table(n: int) -> np.ndarray:
    """psi_1(l) for l = 0..n as float64 (index 0 is set to 0)."""
    global _PSI1
    if len(_PSI1) >= n + 1:
        return _PSI1[: n + 1]
    t = np.ones(n + 1, dtype=np.float64)
    t[0] = 0.0
    for p in _primes_upto(n):
        t[p::p] *= float(psi1_local(int(p)))
    _PSI1 = t
    return _PSI1


def _check_budget(X: float) -> None:
    if X < 0:
        raise ValueError("lattice sums need X >= 0")
    if X > X_BUDGET:
        raise ValueError(f"budget exceeded: X = {X} > {X_BUDGET:.0e} (quadratic cost)")


# -- the pair sums J*, J, L ---------------------------------------------------


def _pair_sum(X: float, star: bool, workers: int) -> tuple[float, int]:
    """Shared skeleton of J*(X) (star=True) and J(X) (star=False)."""
    deltas = [int(D) for D in _squarefree_upto(int(X / 2)) if D >= 1]

    def work(lo: int, hi: int) -> list[tuple[float, int]]:
        out = []
        for D in deltas[lo:hi]:
            n = int(X / D)
            if n < 2:
                out.append((0.0, 0))
                continue
            c = _conv_table(n, D)
            g = _gamma_table(n, D)
            lt = np.arange(2, n + 1, dtype=np.float64)
            base = X - D * lt
            w = base * base * g[2 : n + 1]
            w = w * (D * lt) if star else w / (D * lt)
            val = _i_float(D) * float(np.dot(w, c[2 : n + 1]))
            out.append((val, n * (n - 1) // 2))
        return out

    chunks = run_chunked(work, chunk_bounds(len(deltas), 64), workers)
    flat = [item for chunk in chunks for item in chunk]
    return fsum(v for v, _ in flat), sum(k for _, k in flat)


def jstar(X: float, workers: int = 1) -> LatticeSumResult:
    """J*(X) = sum over Delta(l+l') <= X of I(Delta) (X-Delta lt)^2 Delta lt
    Gamma_Delta(l) Gamma_Delta(l') Gamma_Delta(lt), Delta squarefree."""
    _check_budget(X)
    value, count = _pair_sum(float(X), True, workers)
    return LatticeSumResult(float(X), value, count, "Jstar")


def jcal(X: float, workers: int = 1) -> LatticeSumResult:
    """J(X): same lattice as J*(X) but weighted 1/(Delta lt) in place of
    Delta lt."""
    _check_budget(X)
    value, count = _pair_sum(float(X), False, workers)
    return LatticeSumResult(float(X), value, count, "Jcal")


def l_sum(d: int, delta: int, X: float) -> LatticeSumResult:
    """L_{d,Delta}(X) = sum_{l+l' <= X, d | lt} (X-lt)^2 lt Gamma_Delta(l)
    Gamma_Delta(l').

    Note there is no Gamma_Delta(lt) factor here: it has already been opened
    into the g_Delta(d) divisor weights that multiply this sum.
    """
    if d < 1:
        raise ValueError("l_sum needs d >= 1")
    if math.gcd(d, delta) != 1:
        raise ValueError("l_sum needs gcd(d, Delta) = 1")
    _check_budget(X)
    n = int(X)
    if n < 2:
        return LatticeSumResult(float(X), 0.0, 0, "L")
    c = _conv_table(n, delta)
    lt = np.arange(d, n + 1, d, dtype=np.int64)
    base = X - lt.astype(np.float64)
    value = float(np.dot(base * base * lt, c[lt]))
    count = int(np.sum(lt - 1))
    return LatticeSumResult(float(X), value, count, "L")


def identity_check(X: float) -> tuple[float, float]:
    """Evaluate J*(X) two ways: directly, and reassembled through the
    divisor opening J*(X) = sum_Delta I(Delta) Delta^3 sum_d g_Delta(d)
    L_{d,Delta}(X/Delta).

    Returns (direct, reassembled); the two agree to ~1e-9 relative for every
    X <= 200 (they are the same finite sum, rearranged).
    """
    _check_budget(X)
    direct = jstar(X).value
    parts: list[float] = []
    for D in _squarefree_upto(int(X / 2)):
        D = int(D)
        if D < 1:
            continue
        Xp = X / D
        n = int(Xp)
        if n < 2:
            continue
        c = _conv_table(n, D)
        sig = set(_signature(D))
        inner: list[float] = []
        for d in _squarefree_upto(n):
            d = int(d)
            if d < 1 or any(p in sig for p in _signature(d)):
                continue
            gw = 1.0
            for p in _signature(d):
                gw *= _r_float(p)
            if gw == 0.0:
                continue
            lt = np.arange(d, n + 1, d, dtype=np.int64)
            base = Xp - lt.astype(np.float64)
            inner.append(gw * float(np.dot(base * base * lt, c[lt])))
        parts.append(_i_float(D) * D**3 * fsum(inner))
    return direct, fsum(parts)


# -- the D-sum closed form ----------------------------------------------------


def _g_table(n: int, delta: int) -> np.ndarray:
    """g_Delta(D) for D = 0..n as float64 (zero off squarefree-coprime D)."""
    sig = _signature(delta)
    g = np.ones(n + 1, dtype=np.float64)
    g[0] = 0.0
    for p in _primes_upto(n):
        p = int(p)
        if p in sig:
            g[p::p] = 0.0
            continue
        g[p::p] *= _r_float(p)
        if p * p <= n:
            g[p * p :: p * p] = 0.0
    return g


def dsum_identity_check(delta: int, m: int, cutoff: int) -> float:
    """Signed residual of the truncated double D-sum against its closed form.

    Compares  sum_{D,D' <= cutoff, (D,D') | m} g_Delta(D) g_Delta(D') / [D,D']
    with  C8 U(Delta) K_Delta(m); the tail decays like 1/cutoff, so the
    residual must shrink as the cutoff grows.  The per-prime exact version of
    the same identity lives in local_identity_suite.
    """
    if m < 1:
        raise ValueError("dsum_identity_check needs m >= 1")
    if cutoff < 1:
        raise ValueError("dsum_identity_check needs cutoff >= 1")
    g = _g_table(cutoff, delta)
    idx = np.nonzero(g)[0].astype(np.int64)
    vals = g[idx]
    parts: list[float] = []
    for j in range(len(idx)):
        D = int(idx[j])
        gcds = np.gcd(D, idx)
        mask = (m % gcds) == 0
        lcm = (D // gcds[mask]) * idx[mask]
        parts.append(float(vals[j]) * float(np.sum(vals[mask] / lcm)))
    target = c8() * float(U_of(delta))
    for p in _signature(m):
        if p not in _signature(delta):
            target *= float(K_local(p))
    return fsum(parts) - target


# -- psi_1-weighted sums and the smoothed M-weights ---------------------------


def psi1_sums(which: str, X: float) -> LatticeSumResult:
    """Direct evaluation of the psi_1-weighted sums over l < X.

    which selects the weight on psi_1(l):
      linear     (X - l) / l
      quadratic  (X - l)^2 / l
      plain      (X - l)
      log        log(X/l) * l
    """
    if which not in ("linear", "quadratic", "plain", "log"):
        raise ValueError(f"unknown psi1 sum {which!r}")
    if X < 1:
        raise ValueError("psi1_sums needs X >= 1")
    n = math.ceil(X) - 1  # l ranges over 1 <= l < X
    sum_id = f"psi1_{which}"
    if n < 1:
        return LatticeSumResult(float(X), 0.0, 0, sum_id)
    t = _psi1_table(n)[1 : n + 1]
    l = np.arange(1, n + 1, dtype=np.float64)
    if which == "linear":
        w = (X - l) / l
    elif which == "quadratic":
        w = (X - l) ** 2 / l
    elif which == "plain":
        w = X - l
    else:
        w = np.log(X / l) * l
    value = fsum(np.asarray(w * t, dtype=np.float64))
    return LatticeSumResult(float(X), value, n, sum_id)


def m1_weight(cfg: MWeights, l: float) -> float:
    """M_1(l) = Q^2 (X-l)(gamma_M X + delta_M l) - (lQ)^2 log(X/l) / 2."""
    Q, X = cfg.Q, cfg.X
    return Q * Q * (X - l) * (cfg.gamma_M * X + cfg.delta_M * l) - (l * Q) ** 2 * math.log(X / l) / 2


def m2_weight(cfg: MWeights, l: float) -> float:
    """M_2(l) = integral_0^{x-Ql} log t (x - Ql - t) dt, in closed form
    y^2 (log(y)/2 - 3/4) with y = x - Ql (and 0 at y <= 0)."""
    y = cfg.x - cfg.Q * l
    if y <= 0:
        return 0.0
    return y * y * (0.5 * math.log(y) - 0.75)


def m_sums(cfg: MWeights, which: str) -> float:
    """sum_{l <= X} M_i(l) psi_1(l) / l for i = 1, 2 (X = x/Q)."""
    if which not in ("M1", "M2"):
        raise ValueError(f"unknown M-sum {which!r}")
    n = int(cfg.X)
    if n < 1:
        return 0.0
    t = _psi1_table(n)[1 : n + 1]
    l = np.arange(1, n + 1, dtype=np.float64)
    if which == "M1":
        w = cfg.Q**2 * (cfg.X - l) * (cfg.gamma_M * cfg.X + cfg.delta_M * l)
        w -= (l * cfg.Q) ** 2 * np.log(cfg.X / l) / 2
    else:
        y = cfg.x - cfg.Q * l
        w = np.where(y > 0, y * y * (0.5 * np.log(np.maximum(y, 1e-300)) - 0.75), 0.0)
    return fsum(np.asarray(w * t / l, dtype=np.float64))


def mu_phi_sum(l: int, cutoff: float) -> float:
    """sum_{d <= cutoff} mu(d) / (d phi(d l)); tends to C3 psi_1(l) / l."""
    if l < 1:
        raise ValueError("mu_phi_sum needs l >= 1")
    n = int(cutoff)
    if n < 1:
        return 0.0
    if n * l > 10**7:
        raise ValueError("mu_phi_sum table budget exceeded (cutoff * l > 1e7)")
    spf = _spf_table(max(n * l, 2))
    # mu(d) sieve on 0..n
    mu = np.ones(n + 1, dtype=np.int64)
    mu[0] = 0
    for p in _primes_upto(n):
        p = int(p)
        mu[p::p] *= -1
        if p * p <= n:
            mu[p * p :: p * p] = 0
    # phi table on 0..n*l
    m = n * l
    phi = np.arange(m + 1, dtype=np.int64)
    for p in _primes_upto(m):
        p = int(p)
        phi[p::p] -= phi[p::p] // p
    d = np.arange(1, n + 1, dtype=np.int64)
    terms = mu[1:] / (d.astype(np.float64) * phi[d * l].astype(np.float64))
    return fsum(np.asarray(terms[mu[1:] != 0], dtype=np.float64))
