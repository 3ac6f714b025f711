"""Dirichlet-series factorizations: zeta-shift bookkeeping, per-prime
remainder rules, numeric evaluation, and exact Dirichlet coefficients.

Every registered series is stored as

    prefactor * prod_k zeta(mult_k * s + shift_k)^exponent_k * prod_p remainder(p, Y)

with Y = p^{-s}.  The remainder rule is written once in generic arithmetic
and is evaluated three ways: with float context and complex/array Y (contour
quadrature), with Fraction context and Fraction Y (exact spot values), and
with Fraction context and a formal RatPoly Y (exact power-series
coefficients, used by the coefficientwise factorization checks).

Two conventions worth spelling out:

* Several series converge slowly on the left of sigma = 0; the registered
  factorization then carries extra zeta(s+2)/zeta(2s+2)-type shifts so the
  remainder terms decay like p^(-sigma-2) or faster.  Any equivalent
  factorization reproduces the same Dirichlet coefficients, so the
  coefficient check is still against the defining series.
* The phi-ratio product V_s(p) has the constant part 1 + 2r/p, so the plain
  product over primes is not a normalized Dirichlet series.  The registered
  factorization divides each local by (1 + 2r/p) and pushes the resulting
  constant prod(1 + 2r/p) = C8 (less the excluded primes) into `prefactor`.

The regularized evaluation drops exactly one polar zeta factor (residue 1
bookkeeping): eval_series_reg(f, s0) = lim_{s->s0} (s - s0) * F(s) up to that
residue, e.g. the U-series at s = 0 regularizes to exactly 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

from . import zeta as zetamod
from .constants import RatPoly, c8, s_script
from .localfactors import (
    K_local,
    U_local,
    factorize,
    gamma_weight,
    g_weight,
    is_squarefree,
    mobius,
    psi1,
    r_local,
)
from .sieve import sieve_primes

__all__ = [
    "ZetaShift",
    "SeriesFactorization",
    "local_ctx",
    "f_series",
    "f1_series",
    "u_series",
    "q_series",
    "k_series",
    "v_series",
    "g_series",
    "r_series",
    "eval_series",
    "eval_series_reg",
    "remainder_tail",
    "local_coefficients",
    "dirichlet_coefficients",
    "defining_coefficients",
    "coefficient_check",
    "L_chi0",
    "L_chi0_reg1",
    "delta_s",
    "tau_of",
    "r_log_deriv_0",
    "euler_phi",
]


# ---------------------------------------------------------------------------
# local context
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LocalCtx:
    """Per-prime quantities in the caller's numeric type (float or Fraction)."""

    p: int
    r: object
    u: object  # U(p)
    km1: object  # K(p) - 1
    psi1m1: object  # psi_1(p) - 1
    lam: object  # V_s(p) = (1 + 2r/p)(1 + lam * Y)


def local_ctx(p: int, exact: bool = False) -> LocalCtx:
    r = r_local(p)
    u = U_local(p)
    km1 = K_local(p) - 1
    psi1m1 = Fraction(p, p * p - p - 1)
    lam = r * (p + 3 * r + r * r) / (p + 2 * r)
    if exact:
        return LocalCtx(p, r, u, km1, psi1m1, lam)
    return LocalCtx(p, float(r), float(u), float(km1), float(psi1m1), float(lam))


# ---------------------------------------------------------------------------
# factorization registry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZetaShift:
    """zeta(mult*s + shift)^exponent."""

    shift: int
    exponent: int
    mult: int = 1

    def argument(self, s):
        return self.mult * s + self.shift

    def local(self, p: int, Y):
        """The per-prime factor this zeta power contributes."""
        base = 1 - Y**self.mult * Fraction(1, p**self.shift)
        if self.exponent >= 0:
            return 1 / base ** self.exponent
        return base ** (-self.exponent)


@dataclass(frozen=True)
class SeriesFactorization:
    factor_id: str
    zeta_shifts: tuple[ZetaShift, ...]
    remainder: Callable  # remainder(ctx, Y) -> value; entire part
    validity_sigma: float
    defining: Callable[[int], Fraction] | None = None  # n -> defining coefficient
    prefactor: float = 1.0
    prime_cutoff: int = 20000
    exceptional: tuple[int, ...] = ()  # primes of d, Delta (documentation)


def _exceptional(*moduli: int) -> tuple[int, ...]:
    out = set()
    for m in moduli:
        for p, _ in factorize(m):
            out.add(p)
    return tuple(sorted(out))


def euler_phi(n: int) -> int:
    out = n
    for p, _ in factorize(n):
        out = out // p * (p - 1)
    return out


def _inv(p: int, Y):
    """1/p in the arithmetic family of Y (Fraction for exact modes, float else)."""
    return Fraction(1, p) if isinstance(Y, (Fraction, RatPoly)) else 1.0 / p


@lru_cache(maxsize=None)
def f_series() -> SeriesFactorization:
    """F(s) = sum psi_1(l) l^-s = zeta(s) zeta(s+1) * prod (1 + (psi_1-1)Y)(1 - Y/p)."""

    def remainder(ctx, Y):
        return (1 + ctx.psi1m1 * Y) * (1 - Y * _inv(ctx.p, Y))

    return SeriesFactorization(
        "F", (ZetaShift(0, 1), ZetaShift(1, 1)), remainder, -1.0, defining=lambda n: Fraction(psi1(n))
    )


@lru_cache(maxsize=None)
def u_series() -> SeriesFactorization:
    """U(s) = sum mu^2(n)/(phi(n) n^s)
    = zeta(s+1) zeta(s+2) / zeta(2s+2) * prod (1+Y/(p-1))(1-Y/p)(1-Y/p^2)/(1-Y^2/p^2).

    The zeta(s+2)/zeta(2s+2) pair is pure acceleration: it buys remainder
    terms O(p^(-sigma-2)) so the sigma = -0.49 line converges at desk scale.
    """

    def remainder(ctx, Y):
        ip = _inv(ctx.p, Y)
        ipm1 = _inv(ctx.p - 1, Y)
        return (1 + Y * ipm1) * (1 - Y * ip) * (1 - Y * ip * ip) / (1 - Y * Y * ip * ip)

    def defining(n: int) -> Fraction:
        return Fraction(mobius(n) ** 2, euler_phi(n))

    return SeriesFactorization(
        "U", (ZetaShift(1, 1), ZetaShift(2, 1), ZetaShift(2, -1, mult=2)), remainder, -0.99, defining=defining
    )


@lru_cache(maxsize=None)
def f1_series() -> SeriesFactorization:
    """F1(s) = sum (n/phi(n)) n^-s = zeta(s) * U(s) (adopted reading)."""
    u = u_series()

    return SeriesFactorization(
        "F1",
        (ZetaShift(0, 1),) + u.zeta_shifts,
        u.remainder,
        -0.99,
        defining=lambda n: Fraction(n, euler_phi(n)),
    )


@lru_cache(maxsize=None)
def q_series(modulus: int = 1) -> SeriesFactorization:
    """Q_m(s) = prod_{p coprime to m} (1 + r Y) = sum g_m(n) n^-s
    = zeta(s+1) zeta(s+2)^2 / zeta(2s+2) * remainder with terms O(Y/p^3)."""

    def remainder(ctx, Y, modulus=modulus):
        ip = _inv(ctx.p, Y)
        acc = (1 - Y * ip) * (1 - Y * ip * ip) ** 2 / (1 - Y * Y * ip * ip)
        if modulus % ctx.p:
            acc = (1 + ctx.r * Y) * acc
        return acc

    return SeriesFactorization(
        f"Q[{modulus}]",
        (ZetaShift(1, 1), ZetaShift(2, 2), ZetaShift(2, -1, mult=2)),
        remainder,
        -0.99,
        defining=lambda n, modulus=modulus: g_weight(n, modulus),
        exceptional=_exceptional(modulus),
    )


@lru_cache(maxsize=None)
def k_series(d: int = 1, delta: int = 1) -> SeriesFactorization:
    """K_{d,Delta}(s) = sum_{d | l} K_Delta(l) l^-s
    = zeta(s) * prod_{p|d} K(p) Y * prod_{p coprime to d Delta} (1 + (K(p)-1) Y)."""
    if math.gcd(d, delta) != 1 or not is_squarefree(d):
        raise ValueError("k_series requires squarefree d coprime to delta")

    def remainder(ctx, Y, d=d, delta=delta):
        p = ctx.p
        if d % p == 0:
            return (ctx.km1 + 1) * Y
        if delta % p == 0:
            return 1 + 0 * Y
        return 1 + ctx.km1 * Y

    def defining(n: int, d=d, delta=delta) -> Fraction:
        if n % d:
            return Fraction(0)
        out = Fraction(1)
        for p, _ in factorize(n):
            if delta % p:
                out *= K_local(p)
        return out

    return SeriesFactorization(
        f"K[{d},{delta}]", (ZetaShift(0, 1),), remainder, -1.99, defining=defining, exceptional=_exceptional(d, delta)
    )


@lru_cache(maxsize=None)
def v_series(delta: int = 1) -> SeriesFactorization:
    """V_Delta(s) = prod_{p coprime to Delta} V_s(p),  V_s(p) = (1 + 2r/p)(1 + lam Y).

    Registered in normalized form: prefactor = prod_{p coprime to Delta}(1+2r/p)
    (= C8 less the excluded primes, from the accelerated constants engine), and
    the Dirichlet part sum mu^2(n) [gcd(n,Delta)=1] prod_{p|n} lam(p) n^-s
    = zeta(s+1) zeta(s+2)^2/zeta(2s+2) * remainder with terms O(Y/p^3)."""

    def remainder(ctx, Y, delta=delta):
        ip = _inv(ctx.p, Y)
        acc = (1 - Y * ip) * (1 - Y * ip * ip) ** 2 / (1 - Y * Y * ip * ip)
        if delta % ctx.p:
            acc = (1 + ctx.lam * Y) * acc
        return acc

    def defining(n: int, delta=delta) -> Fraction:
        if not is_squarefree(n) or math.gcd(n, delta) != 1:
            return Fraction(0)
        out = Fraction(1)
        for p, _ in factorize(n):
            out *= local_ctx(p, exact=True).lam
        return out

    pref = c8()
    for p, _ in factorize(delta):
        pref /= float(1 + 2 * r_local(p) / p)

    return SeriesFactorization(
        f"V[{delta}]",
        (ZetaShift(1, 1), ZetaShift(2, 2), ZetaShift(2, -1, mult=2)),
        remainder,
        -0.5,
        defining=defining,
        prefactor=pref,
        exceptional=_exceptional(delta),
    )


@lru_cache(maxsize=None)
def g_series(d: int = 1, delta: int = 1) -> SeriesFactorization:
    """G^{chi0(d)}_Delta(s) = sum_{gcd(l,d)=1} Gamma_Delta(l) l^-s
    = zeta(s) zeta(s+1) * [p|d: (1-Y)(1-Y/p); p|Delta: (1-Y/p); else (1+rY)(1-Y/p)]."""
    if math.gcd(d, delta) != 1:
        raise ValueError("g_series requires gcd(d, delta) = 1")

    def remainder(ctx, Y, d=d, delta=delta):
        ip = _inv(ctx.p, Y)
        if d % ctx.p == 0:
            return (1 - Y) * (1 - Y * ip)
        if delta % ctx.p == 0:
            return 1 - Y * ip
        return (1 + ctx.r * Y) * (1 - Y * ip)

    def defining(n: int, d=d, delta=delta) -> Fraction:
        if math.gcd(n, d) != 1:
            return Fraction(0)
        return gamma_weight(n, delta)

    return SeriesFactorization(
        f"G[{d},{delta}]",
        (ZetaShift(0, 1), ZetaShift(1, 1)),
        remainder,
        -0.5,
        defining=defining,
        exceptional=_exceptional(d, delta),
    )


@lru_cache(maxsize=None)
def r_series(d: int = 1, delta: int = 1) -> SeriesFactorization:
    """R_{d,Delta}(s) = prod_{p coprime to d Delta}(1+rY)(1-Y/p) prod_{p|Delta}(1-Y/p);
    the entire remainder of the principal-character G factorization (no zeta part)."""

    def remainder(ctx, Y, d=d, delta=delta):
        ip = _inv(ctx.p, Y)
        if d % ctx.p == 0:
            return 1 + 0 * Y
        if delta % ctx.p == 0:
            return 1 - Y * ip
        return (1 + ctx.r * Y) * (1 - Y * ip)

    return SeriesFactorization(
        f"R[{d},{delta}]", (), remainder, -0.99, exceptional=_exceptional(d, delta)
    )


# ---------------------------------------------------------------------------
# numeric evaluation
# ---------------------------------------------------------------------------


@lru_cache(maxsize=8)
def _primes_upto(cutoff: int) -> np.ndarray:
    return sieve_primes(cutoff)


def eval_series(fact: SeriesFactorization, s, prime_cutoff: int | None = None, zeta_fn=None):
    """Numeric value: zeta factors via the package evaluator, remainder as a
    finite prime product.  `s` may be a complex scalar or ndarray."""
    if zeta_fn is None:
        zeta_fn = zetamod.zeta
    cutoff = prime_cutoff or fact.prime_cutoff
    scalar = np.isscalar(s) or (isinstance(s, np.ndarray) and s.ndim == 0)
    s_arr = np.asarray(s, dtype=np.complex128)
    val = np.full(s_arr.shape, fact.prefactor, dtype=np.complex128)
    for zf in fact.zeta_shifts:
        val = val * zeta_fn(zf.argument(s_arr)) ** zf.exponent
    for p in _primes_upto(cutoff):
        p = int(p)
        Y = np.exp(-math.log(p) * s_arr)
        val = val * fact.remainder(local_ctx(p), Y)
    return complex(val[()]) if scalar else val


def eval_series_reg(fact: SeriesFactorization, s0: float, prime_cutoff: int | None = None, zeta_fn=None):
    """Regularized value at a real point where exactly one zeta factor is
    polar: that factor is dropped (its residue, 1, is the bookkeeping)."""
    polar = [zf for zf in fact.zeta_shifts if zf.argument(s0) == 1]
    if len(polar) != 1:
        raise ValueError(f"{fact.factor_id}: expected exactly one polar zeta factor at s={s0}, got {len(polar)}")
    if polar[0].exponent != 1:
        raise ValueError("regularization assumes a simple pole")
    if zeta_fn is None:
        zeta_fn = zetamod.zeta
    cutoff = prime_cutoff or fact.prime_cutoff
    val = complex(fact.prefactor)
    for zf in fact.zeta_shifts:
        if zf is polar[0]:
            continue
        val *= complex(zeta_fn(np.complex128(zf.argument(s0)))) ** zf.exponent
    for p in _primes_upto(cutoff):
        p = int(p)
        val *= complex(fact.remainder(local_ctx(p), p ** (-float(s0))))
    return val.real if abs(val.imag) < 1e-13 * max(1.0, abs(val.real)) else val


def remainder_tail(fact: SeriesFactorization, sigma: float, prime_cutoff: int | None = None) -> float:
    """Crude relative bound on the dropped prime tail: fit |remainder - 1| to
    a power of p at the last two cutoff primes and integrate the fit."""
    cutoff = prime_cutoff or fact.prime_cutoff
    primes = _primes_upto(cutoff)
    p1, p2 = int(primes[-2]), int(primes[-1])
    t1 = abs(complex(fact.remainder(local_ctx(p1), p1 ** (-sigma))) - 1.0)
    t2 = abs(complex(fact.remainder(local_ctx(p2), p2 ** (-sigma))) - 1.0)
    if t2 == 0.0:
        return 0.0
    e = math.log(t1 / t2) / math.log(p2 / p1) if t1 > t2 else 2.0
    if e <= 1.1:
        return math.inf
    return t2 * p2 / ((e - 1.0) * math.log(p2))


# ---------------------------------------------------------------------------
# exact Dirichlet coefficients
# ---------------------------------------------------------------------------


def local_coefficients(fact: SeriesFactorization, p: int, order: int) -> list[Fraction]:
    """Exact Y-series of the full local factor (zeta locals times remainder)."""
    expr = fact.remainder(local_ctx(p, exact=True), RatPoly.y())
    if not isinstance(expr, RatPoly):
        expr = RatPoly.const(expr)
    for zf in fact.zeta_shifts:
        expr = expr * zf.local(p, RatPoly.y())
    return expr.series(order)


def dirichlet_coefficients(fact: SeriesFactorization, n_max: int) -> list[Fraction]:
    """Coefficients c(1..n_max) of the factorization side, assembled
    multiplicatively from exact per-prime series (prefactor not included).

    Exceptional primes (the p | d, p | Delta special cases) may have a local
    series that does not start 1 + ...; they are folded in afterwards by a
    finite Dirichlet convolution so the seed c(1) = 1 stays valid for the
    multiplicative pass."""
    exceptional = set(fact.exceptional)
    spf = np.zeros(n_max + 1, dtype=np.int64)
    for p in _primes_upto(n_max):
        p = int(p)
        sl = spf[p::p]
        sl[sl == 0] = p

    def order_at(p: int) -> int:
        return int(math.log(n_max) / math.log(p)) + 1

    coeffs: list[Fraction] = [Fraction(0)] * (n_max + 1)
    coeffs[1] = Fraction(1)
    local_cache: dict[int, list[Fraction]] = {}
    for n in range(2, n_max + 1):
        p = int(spf[n])
        m, k = n, 0
        while m % p == 0:
            m //= p
            k += 1
        if p in exceptional:
            coeffs[n] = Fraction(0)  # handled by the convolution pass
            continue
        if p not in local_cache:
            local_cache[p] = local_coefficients(fact, p, order_at(p))
        coeffs[n] = coeffs[m] * local_cache[p][k]
    for p in sorted(exceptional):
        if p > n_max:
            continue
        loc = local_coefficients(fact, p, order_at(p))
        folded = [Fraction(0)] * (n_max + 1)
        for n in range(1, n_max + 1):
            if coeffs[n] == 0:
                continue
            q = 1
            k = 0
            while n * q <= n_max:
                if loc[k]:
                    folded[n * q] += coeffs[n] * loc[k]
                q *= p
                k += 1
        coeffs = folded
    return coeffs


def defining_coefficients(fact: SeriesFactorization, n_max: int) -> list[Fraction]:
    if fact.defining is None:
        raise ValueError(f"{fact.factor_id} has no independent defining series")
    return [Fraction(0)] + [Fraction(fact.defining(n)) for n in range(1, n_max + 1)]


def coefficient_check(fact: SeriesFactorization, n_max: int) -> tuple[bool, int]:
    """Exact comparison; returns (ok, first mismatching n or 0)."""
    lhs = dirichlet_coefficients(fact, n_max)
    rhs = defining_coefficients(fact, n_max)
    for n in range(1, n_max + 1):
        if lhs[n] != rhs[n]:
            return False, n
    return True, 0


# ---------------------------------------------------------------------------
# principal-character helpers
# ---------------------------------------------------------------------------


def delta_s(q: int, s) -> complex:
    """Delta_s(q) = prod_{p | q} (1 - p^-s); the finite Euler factor with
    L_{chi0(q)}(s) = zeta(s) Delta_s(q)."""
    out = 1.0 + 0.0j if not isinstance(s, np.ndarray) else np.ones_like(s, dtype=np.complex128)
    for p, _ in factorize(q):
        out = out * (1 - np.exp(-math.log(p) * np.asarray(s, dtype=np.complex128)))
    return out


def L_chi0(q: int, s, zeta_fn=None):
    if zeta_fn is None:
        zeta_fn = zetamod.zeta
    return zeta_fn(np.asarray(s, dtype=np.complex128)) * delta_s(q, s)


def L_chi0_reg1(q: int) -> float:
    """Regularized value at s = 1 (drop the zeta pole): phi(q)/q."""
    return euler_phi(q) / q


def tau_of(d: int, s) -> complex:
    """tau(d) = sum_{e|d} Delta_s(d/e) Gamma_Delta(e)^2 / e^s for squarefree d
    coprime to Delta: multiplicative with tau(p) = 1 + r(2+r) p^-s."""
    out = 1.0 + 0.0j
    for p, _ in factorize(d):
        r = float(r_local(p))
        out = out * (1 + r * (2 + r) * np.exp(-math.log(p) * complex(s)))
    return out


def r_log_deriv_0(modulus: int) -> float:
    """R'_{1,m}(0)/R_{1,m}(0) = S + sum_{p | m} (r/(1+r)) log p."""
    out = s_script()
    for p, _ in factorize(modulus):
        r = r_local(p)
        out += float(r / (1 + r)) * math.log(p)
    return out
