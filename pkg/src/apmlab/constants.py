"""High-precision Euler products, prime sums, and the derived constants.

Strategy for a product prod_p F(1/p) whose local factor is a rational function
F(y) = 1 + O(y^2) with Fraction coefficients:

1. primes p <= p0 (default 53) contribute exactly (Fraction arithmetic);
2. the tail over p > p0 is exp(sum_{k>=2} a_k * P_{>p0}(k)) where the a_k are
   the exact Taylor coefficients of log F and P_{>p0}(k) is the prime zeta
   function with the first primes removed (mpmath supplies primezeta);
3. the series is cut at order K (default 30) with a geometric tail bound: the
   a_k grow at most like g^k with g read off the computed coefficients, and
   sum_{p > p0} p^-k <= p1^(1-k) for the next prime p1, so the dropped part
   is below p1 * (g/p1)^(K+1) / (1 - g/p1) -- around 1e-50 at the defaults.

p = 2 never goes through the rational formula (the local weight r(p) is 0 at
p = 2, not the odd-p closed form), so every product spec carries an explicit
exact p = 2 factor.

Prime sums sum_p log(p) * R(1/p) use the same split with the log-prime zeta
LP(k) = sum_p log(p) p^-k = sum_m mu(m) * (-zeta'/zeta)(m k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath as mp

from .localfactors import K_local, U_local, V_local, factorize, mobius, q0_local, r_local

_MP_DPS = 30

__all__ = [
    "EulerProductValue",
    "euler_product",
    "direct_product",
    "FACTOR_IDS",
    "gamma0",
    "log_2pi",
    "zeta_at",
    "s_pp",
    "s_script",
    "c2",
    "c3",
    "c5",
    "c6",
    "c8",
    "z_prod",
    "u_at_1",
    "z_res",
    "z_bc",
    "h1",
    "h1_prime",
    "lemma_coefficients",
    "LemmaCoefficients",
]


# ---------------------------------------------------------------------------
# exact rational functions of y (Fraction coefficients)
# ---------------------------------------------------------------------------


def _trim(c: list[Fraction]) -> tuple[Fraction, ...]:
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class RatPoly:
    """num(y) / den(y) with Fraction coefficients, den(0) != 0."""

    num: tuple[Fraction, ...]
    den: tuple[Fraction, ...] = (Fraction(1),)

    @staticmethod
    def const(c) -> "RatPoly":
        return RatPoly((Fraction(c),))

    @staticmethod
    def y() -> "RatPoly":
        return RatPoly((Fraction(0), Fraction(1)))

    @staticmethod
    def _pmul(a, b):
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    out[i + j] += ai * bj
        return _trim(out)

    @staticmethod
    def _padd(a, b):
        out = [Fraction(0)] * max(len(a), len(b))
        for i, ai in enumerate(a):
            out[i] += ai
        for j, bj in enumerate(b):
            out[j] += bj
        return _trim(out)

    def __add__(self, other) -> "RatPoly":
        other = other if isinstance(other, RatPoly) else RatPoly.const(other)
        return RatPoly(
            self._padd(self._pmul(self.num, other.den), self._pmul(other.num, self.den)),
            self._pmul(self.den, other.den),
        )

    __radd__ = __add__

    def __neg__(self) -> "RatPoly":
        return RatPoly(tuple(-c for c in self.num), self.den)

    def __sub__(self, other):
        other = other if isinstance(other, RatPoly) else RatPoly.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other) -> "RatPoly":
        other = other if isinstance(other, RatPoly) else RatPoly.const(other)
        return RatPoly(self._pmul(self.num, other.num), self._pmul(self.den, other.den))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "RatPoly":
        if n < 0:
            return 1 / (self ** (-n))
        out = RatPoly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def __truediv__(self, other) -> "RatPoly":
        other = other if isinstance(other, RatPoly) else RatPoly.const(other)
        return RatPoly(self._pmul(self.num, other.den), self._pmul(self.den, other.num))

    def __rtruediv__(self, other):
        other = other if isinstance(other, RatPoly) else RatPoly.const(other)
        return other / self

    def __call__(self, y: Fraction) -> Fraction:
        num = Fraction(0)
        for c in reversed(self.num):
            num = num * y + c
        den = Fraction(0)
        for c in reversed(self.den):
            den = den * y + c
        return num / den

    def series(self, order: int) -> list[Fraction]:
        """Taylor coefficients of num/den up to y^order (den(0) != 0)."""
        if self.den[0] == 0:
            raise ZeroDivisionError("RatPoly.series: pole at y = 0")
        num = list(self.num) + [Fraction(0)] * (order + 1 - len(self.num))
        out: list[Fraction] = []
        d0 = self.den[0]
        for k in range(order + 1):
            acc = num[k] if k < len(num) else Fraction(0)
            for j in range(1, min(k, len(self.den) - 1) + 1):
                acc -= self.den[j] * out[k - j]
            out.append(acc / d0)
        return out


def _log_series(coeffs: list[Fraction], order: int) -> list[Fraction]:
    """Taylor coefficients of log(F) for F = 1 + a1 y + ... (a0 must be 1)."""
    if coeffs[0] != 1:
        raise ValueError("log series requires constant term 1")
    a = coeffs + [Fraction(0)] * (order + 1 - len(coeffs))
    l = [Fraction(0)] * (order + 1)
    for k in range(1, order + 1):
        acc = k * a[k]
        for j in range(1, k):
            acc -= j * l[j] * a[k - j]
        l[k] = acc / k
    return l


# ---------------------------------------------------------------------------
# product specs
# ---------------------------------------------------------------------------

_Y = RatPoly.y()
_R = _Y / (1 - 2 * _Y - _Y * _Y)  # r(p) = p/(p^2-2p-1) as a function of y = 1/p
_PSI1M1 = _Y / (1 - _Y - _Y * _Y)  # psi_1(p) - 1
_U = 1 / (1 + 2 * _R * _Y)  # U(p)
_V0 = 1 + 2 * _R * _Y + _R + 3 * _R * _R * _Y + _R * _R * _R * _Y  # V_0(p)


@dataclass(frozen=True)
class _ProductSpec:
    factor_id: str
    local: RatPoly  # odd-p local factor as a function of y = 1/p
    p2: Fraction  # exact factor at p = 2
    doc: str


_PRODUCT_SPECS = {
    s.factor_id: s
    for s in [
        _ProductSpec("C3", 1 - _Y * _Y / (1 - _Y), Fraction(1, 2), "prod (1 - 1/(p(p-1)))"),
        _ProductSpec("C5", 1 - (_Y / (1 - _Y)) ** 2, Fraction(1), "prod_{p>2} (1 - 1/(p-1)^2)"),
        _ProductSpec("C6", 1 - _Y * _Y / (1 - 2 * _Y), Fraction(1), "prod_{p>2} (1 - 1/(p(p-2)))"),
        _ProductSpec("C8", 1 + 2 * _R * _Y, Fraction(1), "prod (1 + 2r/p)"),
        _ProductSpec("UP", 1 + _Y * _Y / (1 - _Y), Fraction(3, 2), "prod (1 + 1/(p(p-1)))"),
        _ProductSpec("H1", 1 + _PSI1M1 * _Y, Fraction(2), "prod (1 + (psi_1(p)-1)/p)"),
        _ProductSpec("QP1", 1 + _R * _Y, Fraction(1), "prod (1 + r/p)"),
        _ProductSpec("QP0", (1 + _R) * (1 - _Y), Fraction(1, 2), "prod (1 + r)(1 - 1/p)"),
        _ProductSpec("VP0", _V0 * (1 - _Y), Fraction(1, 2), "prod V_0(p)(1 - 1/p)"),
        _ProductSpec("KP2", 1 + _R * _R * _U * _Y * _Y, Fraction(1), "prod (1 + r^2 U(p)/p^2)"),
    ]
}

FACTOR_IDS = tuple(sorted(_PRODUCT_SPECS))

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53)
_NEXT_PRIME = 59.0


@dataclass(frozen=True)
class EulerProductValue:
    factor_id: str
    value: float
    prime_cutoff: int
    tail_bound: float


@lru_cache(maxsize=None)
def _prime_zeta_tail(k: int, p0: int) -> float:
    """P_{>p0}(k) = primezeta(k) - sum_{p <= p0} p^-k, at working precision."""
    with mp.workdps(_MP_DPS):
        v = mp.primezeta(k)
        for p in _SMALL_PRIMES:
            if p <= p0:
                v -= mp.mpf(p) ** (-k)
        return float(v)


@lru_cache(maxsize=None)
def euler_product(factor_id: str, order: int = 30) -> EulerProductValue:
    """Accelerated evaluation of a registered Euler product (12+ digits)."""
    spec = _PRODUCT_SPECS[factor_id]
    p0 = _SMALL_PRIMES[-1]

    head = spec.p2
    for p in _SMALL_PRIMES[1:]:
        head *= spec.local(Fraction(1, p))

    coeffs = _log_series(spec.local.series(order), order)
    if coeffs[1] != 0:
        raise ValueError(f"{factor_id}: local factor is not 1 + O(y^2)")
    with mp.workdps(_MP_DPS):
        tail_log = mp.mpf(0)
        for k in range(2, order + 1):
            if coeffs[k]:
                tail_log += mp.mpf(coeffs[k].numerator) / coeffs[k].denominator * _prime_zeta_tail(k, p0)
        value = mp.mpf(head.numerator) / head.denominator * mp.e**tail_log
        val_f = float(value)

    growth = max(abs(float(coeffs[k])) ** (1.0 / k) for k in range(max(2, order - 5), order + 1))
    ratio = growth / _NEXT_PRIME
    series_tail = _NEXT_PRIME * ratio ** (order + 1) / (1.0 - ratio)
    tail = abs(val_f) * (series_tail + 5e-16)
    return EulerProductValue(factor_id, val_f, p0, tail)


def direct_product(factor_id: str, primes) -> float:
    """Plain truncated product over the given primes (float; test oracle)."""
    spec = _PRODUCT_SPECS[factor_id]
    fnum = [float(c) for c in spec.local.num]
    fden = [float(c) for c in spec.local.den]

    def horner(cs, y):
        acc = 0.0
        for c in reversed(cs):
            acc = acc * y + c
        return acc

    out = 1.0
    for p in primes:
        p = int(p)
        if p == 2:
            out *= float(spec.p2)
        else:
            y = 1.0 / p
            out *= horner(fnum, y) / horner(fden, y)
    return out


# ---------------------------------------------------------------------------
# prime sums with log p weights
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _log_prime_zeta(k: int) -> float:
    """LP(k) = sum_p log(p) p^-k via mu-inversion of -zeta'/zeta."""
    with mp.workdps(_MP_DPS):
        acc = mp.mpf(0)
        m = 1
        while m * k <= 260:
            mu = mobius(m)
            if mu:
                x = m * k
                acc += mu * (-mp.zeta(x, derivative=1) / mp.zeta(x))
            m += 1
        return float(acc)


@lru_cache(maxsize=None)
def s_pp() -> float:
    """sum_p log(p) / (p(p-1)) = sum_{k>=2} LP(k)  (tail < 1e-18 at K = 60)."""
    return math.fsum(_log_prime_zeta(k) for k in range(2, 61))


@lru_cache(maxsize=None)
def s_script() -> float:
    """sum_p (1/(p-1) - r/(1+r)) log p  =  log 2 - sum_{p>2} log(p) R(1/p)
    with R(y) = y^3 / ((1-y)(1-y-y^2));  split as exact head + LP-series tail."""
    R = _Y**3 / ((1 - _Y) * (1 - _Y - _Y * _Y))
    p0 = _SMALL_PRIMES[-1]
    head = 0.0
    for p in _SMALL_PRIMES[1:]:
        head += math.log(p) * float(R(Fraction(1, p)))
    order = 30
    bk = R.series(order)
    tail_terms = []
    with mp.workdps(_MP_DPS):
        for k in range(3, order + 1):
            if bk[k]:
                lp_gt = mp.mpf(_log_prime_zeta(k))
                for p in _SMALL_PRIMES:
                    lp_gt -= mp.log(p) * mp.mpf(p) ** (-k)
                tail_terms.append(float(bk[k]) * float(lp_gt))
    return math.log(2.0) - head - math.fsum(tail_terms)


# ---------------------------------------------------------------------------
# named constants
# ---------------------------------------------------------------------------

gamma0: float = 0.5772156649015329  # Euler-Mascheroni
log_2pi: float = math.log(2.0 * math.pi)


@lru_cache(maxsize=None)
def zeta_at(n: int) -> float:
    """zeta at a real integer point (mpmath, for fixed constants only)."""
    with mp.workdps(_MP_DPS):
        return float(mp.zeta(n))


def c2() -> float:
    """log(2 pi) + gamma0 + sum_p log p / (p(p-1))."""
    return log_2pi + gamma0 + s_pp()


def c3() -> float:
    return euler_product("C3").value


def c5() -> float:
    return euler_product("C5").value


def c6() -> float:
    return euler_product("C6").value


def c8() -> float:
    return euler_product("C8").value


def z_prod() -> float:
    """prod (1 + 1/(p(p-1))); equals zeta(2)zeta(3)/zeta(6)."""
    return euler_product("UP").value


def u_at_1() -> float:
    """The n/phi(n) density constant: value of the phi-weighted series' entire
    part at s = 1 (same Euler product as z_prod)."""
    return euler_product("UP").value


def z_res() -> float:
    """log(2 pi) + gamma0 - 13/12 (residue-bracket constant)."""
    return log_2pi + gamma0 - 13.0 / 12.0


def z_bc() -> float:
    """Same constant assembled from its defining pieces,
    zeta'(0)/zeta(0) - psi(5) + 1 (psi = digamma), as an independent route:
    zeta'(0)/zeta(0) = log(2 pi) and psi(5) = -gamma0 + 25/12."""
    with mp.workdps(_MP_DPS):
        return float(mp.zeta(0, derivative=1) / mp.zeta(0) - mp.digamma(5) + 1)


def h1() -> float:
    """h(1) = prod (1 + (psi_1(p) - 1)/p);  equals 1/C3."""
    return euler_product("H1").value


def h1_prime() -> float:
    """h'(1) = -h(1) * sum_p log p/(p(p-1)) (per-prime log derivative)."""
    return -h1() * s_pp()


@dataclass(frozen=True)
class LemmaCoefficients:
    """Closed-form coefficients of the lemma main term and its transforms.

    mainterm(X) = alpha X^5 + beta X^4 log X + gamma X^4 multiplies the
    squarefree-lattice sum after division by c8; the transformed coefficients
    A, B, C belong to A X^3 + B X^2 log^2 X + C X^2 log X after the averaging
    operator is applied.
    """

    a: float  # 1/30 = 2 Gamma(3)/Gamma(6)
    b: float  # -1/12 = 2 Gamma(3) zeta(0)/Gamma(5)
    c: float  # same as b (second residue weight)
    alpha: float
    beta: float
    gamma: float
    A: float
    B: float
    C: float
    Z_res: float
    Z_bc: float
    Z_prod: float
    C2: float
    alpha1: float
    beta1: float
    alpha2: float
    beta2: float


@lru_cache(maxsize=None)
def lemma_coefficients() -> LemmaCoefficients:
    u1 = u_at_1()
    spp = s_pp()
    zres = z_res()
    beta = -1.0 / 12.0
    gamma = beta * (zres + spp) + (-0.5) / 12.0
    hh = h1()
    return LemmaCoefficients(
        a=1.0 / 30.0,
        b=beta,
        c=beta,
        alpha=u1 / 30.0,
        beta=beta,
        gamma=gamma,
        A=u1 / 3.0,
        B=-0.5,
        C=1.0 - c2(),
        Z_res=zres,
        Z_bc=z_bc(),
        Z_prod=z_prod(),
        C2=c2(),
        alpha1=hh,
        beta1=hh * (gamma0 - 1.0 - spp),
        alpha2=hh / 2.0,
        beta2=hh * (gamma0 / 2.0 - 0.75 - spp / 2.0),
    )


# modulus-local helper products -------------------------------------------------


def q1_value(modulus: int) -> float:
    """prod_{p coprime to modulus} (1 + r/p)."""
    out = euler_product("QP1").value
    for p, _ in factorize(modulus):
        out /= float(1 + r_local(p) / p)
    return out


def q0_reg(modulus: int) -> float:
    """Regularized s = 0 value: the full (1+r)(1-1/p) product with the
    modulus primes' (1+r) factors removed."""
    out = euler_product("QP0").value
    for p, _ in factorize(modulus):
        out /= float(q0_local(p))
    return out


def v0_reg(modulus: int) -> float:
    """Regularized s = 0 value of the V-product with the modulus factors removed."""
    out = euler_product("VP0").value
    for p, _ in factorize(modulus):
        out /= float(V_local(p, Fraction(1)))
    return out


def k_reg_1(d: int, delta: int) -> float:
    """Regularized s = 1 value K_Delta(d)/d * prod_{p coprime to d Delta}(1 + r^2 U/p^2)."""
    out = euler_product("KP2").value
    kd = 1.0
    for p, _ in factorize(d):
        if delta % p:
            kd *= float(K_local(p))
    for p, _ in factorize(d * delta):
        r = r_local(p)
        out /= float(1 + r * r * U_local(p) / (p * p))
    return kd / d * out


def z_of_modulus(modulus: int) -> float:
    """Z_m = S + sum_{p | m} (r/(1+r)) log p + Z_res (log-free X^4 weight)."""
    out = s_script() + z_res()
    for p, _ in factorize(modulus):
        r = r_local(p)
        out += float(r / (1 + r)) * math.log(p)
    return out
