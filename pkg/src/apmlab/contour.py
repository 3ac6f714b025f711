"""Vertical-line integrals: trapezoid quadrature with conjugate folding,
adaptive refinement, analytic tail bounds, residue formulas, and the
averaging operator applied to tabulated or closed-form data.

Quadrature layout
-----------------
All integrals are (1/2 pi i) int over the line Re s = c + 1/100 of
numerator(s) / prod(s - root) * X^(s + shift) ds, folded onto t >= 0 by
conjugate symmetry (the Dirichlet data is real, so the values at t and -t
are conjugate and the line value is (1/pi) Re int_0^T ... dt).

The expensive factor -- zeta values and prime products -- is smooth on the
lines used here *after* known poles are moved into the denominator list
(the weighted lattice-sum lines pass 1/100 from the zeta(s+1) pole, which
would otherwise put a width-0.01 spike in the cached factor), so it is
evaluated on a coarse grid once per line, cached, and cubic-spline
interpolated; the singular denominators and the X^(it log X) oscillation
are evaluated in closed form on the fine grid.  Refinement halves the fine
step (Richardson estimate from the half-density subgrid) and doubles T
(tail estimated from a power-law fit to the last stretch of integrand
magnitudes) until the requested error target is met.

Integrand decay is modelled before quadrature from the growth bound
|zeta(sigma+it)| << (1+|t|)^(max(0,(1-sigma)/2)+0.1) per zeta factor plus
the denominator degree; specs whose modelled decay exponent is <= 1 are
rejected.

Panel sums run over fixed index blocks recombined with math.fsum in block
order, so results are identical for any worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.integrate import quad, trapezoid

from . import series as S
from . import zeta as zetamod
from .constants import c8, k_reg_1, q0_reg, q1_value, z_of_modulus, z_res
from .localfactors import U_of, factorize, gamma_weight
from .series import euler_phi
from .util import chunk_bounds, run_chunked

__all__ = [
    "LineIntegralSpec",
    "line_integral",
    "clear_line_cache",
    "zeta_growth_exponent",
    "e_spec",
    "estar_spec",
    "cstar_boundary_specs",
    "ivar_spec",
    "id_spec",
    "jd_spec",
    "perron_spec",
    "PERRON_TARGETS",
    "perron_direct_sum",
    "perron_main_term",
    "residue_terms",
    "mainterm_coefficients",
    "m_main",
    "method2_x5_coefficient",
    "c_operator",
    "c_operator_tabulated",
    "c_operator_monomial",
    "c_operator_monomial_value",
]

H_COARSE = 0.05
LINE_CUTOFF = 20000  # remainder prime cutoff on contour lines (tails ~1e-5)
T_MAX = 16000.0  # keeps doubled-argument zeta factors inside the evaluator domain


def zeta_growth_exponent(sigma: float) -> float:
    """Modelled t-growth exponent of one zeta factor at Re s = sigma
    (inverse factors are modelled with the same 0.1 floor)."""
    return max(0.0, (1.0 - sigma) / 2.0) + 0.1


def _decay_model(n_roots: int, c_eff: float, zeta_sigmas: tuple[float, ...], poly_degree: int = 0) -> float:
    growth = poly_degree + sum(zeta_growth_exponent(c_eff + sh) for sh in zeta_sigmas)
    return n_roots - growth


@dataclass(frozen=True)
class LineIntegralSpec:
    """One vertical-line integral; `c` is the nominal abscissa, the effective
    line is c + 1/100 (so "the (-1/2) line" means sigma = -0.49)."""

    c: float
    numerator: Callable[[np.ndarray], np.ndarray]
    numerator_key: str
    denominator_roots: tuple[float, ...]
    x_power_shift: int
    X: float
    T: float = 2000.0
    h: float = 0.05
    factor: float = 1.0
    decay_model: float | None = None


# one entry per (numerator_key, effective abscissa): grid step H_COARSE
_LINE_CACHE: dict[tuple[str, float], tuple[np.ndarray, np.ndarray]] = {}


def clear_line_cache() -> None:
    _LINE_CACHE.clear()


def _coarse_values(spec: LineIntegralSpec, T: float, workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Numerator on the coarse grid [0, T], extending any cached segment."""
    c_eff = spec.c + 0.01
    key = (spec.numerator_key, round(c_eff, 6))
    n_needed = int(round(T / H_COARSE)) + 1
    t_old, a_old = _LINE_CACHE.get(key, (np.empty(0), np.empty(0, dtype=np.complex128)))
    if len(t_old) >= n_needed:
        return t_old[:n_needed], a_old[:n_needed]
    t_new = np.arange(len(t_old), n_needed, dtype=np.float64) * H_COARSE
    s_new = c_eff + 1j * t_new

    def work(lo: int, hi: int) -> np.ndarray:
        return np.asarray(spec.numerator(s_new[lo:hi]), dtype=np.complex128)

    parts = run_chunked(work, chunk_bounds(len(s_new), 32), workers=workers)
    a_new = np.concatenate([p for p in parts if len(p)]) if parts else np.empty(0, dtype=np.complex128)
    t_all = np.concatenate([t_old, t_new])
    a_all = np.concatenate([a_old, a_new])
    _LINE_CACHE[key] = (t_all, a_all)
    return t_all, a_all


def _integrand_real(spec: LineIntegralSpec, t: np.ndarray, coarse_t: np.ndarray, coarse_a: np.ndarray) -> np.ndarray:
    c_eff = spec.c + 0.01
    if len(t) == len(coarse_t) and t[-1] == coarse_t[-1]:
        num = coarse_a
    else:
        num = CubicSpline(coarse_t, coarse_a)(t)
    s = c_eff + 1j * t
    den = np.ones_like(s)
    for root in spec.denominator_roots:
        den = den * (s - root)
    lnx = math.log(spec.X)
    xpow = math.exp((c_eff + spec.x_power_shift) * lnx) * np.exp(1j * (lnx * t))
    return (num / den * xpow).real


def _panel_sum(g: np.ndarray) -> float:
    sums = [float(np.sum(g[lo:hi])) for lo, hi in chunk_bounds(len(g), 64)]
    return math.fsum(sums)


def _trapezoid(g: np.ndarray, h: float) -> float:
    return h * (_panel_sum(g) - 0.5 * g[0] - 0.5 * g[-1])


def _tail_estimate(t: np.ndarray, g: np.ndarray) -> float:
    """Fit |g| ~ t^-e over the last stretch and integrate the fit past T."""
    mask = t >= 0.7 * t[-1]
    tt, gg = t[mask], np.abs(g[mask])
    good = gg > 0
    if good.sum() < 8:
        return abs(g[-1]) * t[-1]
    e, logc = np.polyfit(np.log(tt[good]), np.log(gg[good]), 1)
    if e >= -1.05:
        return math.inf
    T = t[-1]
    return math.exp(logc) * T ** (e + 1.0) / (-e - 1.0)


def line_integral(
    spec: LineIntegralSpec,
    rel_target: float | None = None,
    abs_floor: float = 0.0,
    max_refine: int = 7,
    workers: int = 1,
) -> tuple[float, float]:
    """Returns (value, error_estimate); error = Richardson discretization
    estimate + integrated tail bound.  Refines h (halving) and T (doubling)
    until the target is met or the budget runs out."""
    if spec.X < 1.0:
        raise ValueError("line_integral requires X >= 1")
    if spec.decay_model is not None and spec.decay_model <= 1.0:
        raise ValueError(
            f"insufficient modelled decay for {spec.numerator_key}: t^-{spec.decay_model:.2f}"
        )
    T, h = spec.T, spec.h
    for _ in range(max_refine + 1):
        coarse_t, coarse_a = _coarse_values(spec, T, workers=workers)
        n = int(round(T / h)) + 1
        t = np.arange(n, dtype=np.float64) * h
        g = _integrand_real(spec, t, coarse_t, coarse_a)
        value = _trapezoid(g, h)
        value_2h = _trapezoid(g[::2], 2 * h) if (n - 1) % 2 == 0 else value
        disc = abs(value - value_2h) / 3.0
        tail = _tail_estimate(t, g)
        err = (disc + tail) / math.pi * abs(spec.factor)
        out = spec.factor / math.pi * value
        if math.isfinite(err) and (rel_target is None or err <= rel_target * max(abs(out), abs_floor)):
            return out, err
        if rel_target is None:
            raise ValueError(f"insufficient decay on the line for {spec.numerator_key}")
        if (not math.isfinite(tail) or tail > disc) and T < T_MAX:
            T *= 2.0
        else:
            h /= 2.0
    raise RuntimeError(
        f"line_integral budget exceeded for {spec.numerator_key}: T={T}, h={h}, err={err:.3e}"
    )


# ---------------------------------------------------------------------------
# named integrals
# ---------------------------------------------------------------------------


def _zeta_u_numerator(s: np.ndarray) -> np.ndarray:
    return S.eval_series(S.f1_series(), s, prime_cutoff=LINE_CUTOFF)


def e_spec(X: float, T: float = 2000.0, h: float = 0.05) -> LineIntegralSpec:
    """E(X) = 2 int_(-1/2) zeta(s) U(s) X^(s+4) / (s(s+3)(s+4)) ds."""
    return LineIntegralSpec(
        c=-0.5,
        numerator=_zeta_u_numerator,
        numerator_key=f"zetaU@{LINE_CUTOFF}",
        denominator_roots=(0.0, -3.0, -4.0),
        x_power_shift=4,
        X=X,
        T=T,
        h=h,
        factor=2.0,
        decay_model=_decay_model(3, -0.49, (0.0, 1.0, 2.0, 2.0)),
    )


def estar_spec(X: float, T: float = 2000.0, h: float = 0.05) -> LineIntegralSpec:
    """E*(X) = int_(-1/2) zeta(s) U(s) X^(s+2) / (s^2 (s+1)) ds."""
    return LineIntegralSpec(
        c=-0.5,
        numerator=_zeta_u_numerator,
        numerator_key=f"zetaU@{LINE_CUTOFF}",
        denominator_roots=(0.0, 0.0, -1.0),
        x_power_shift=2,
        X=X,
        T=T,
        h=h,
        decay_model=_decay_model(3, -0.49, (0.0, 1.0, 2.0, 2.0)),
    )


def cstar_boundary_specs(T: float = 2000.0, h: float = 0.05) -> tuple[LineIntegralSpec, LineIntegralSpec]:
    """The two X-independent boundary integrals left over when the averaging
    operator is applied to the E kernel with cut t0 = 1: the full operator on
    t^(s+4) 1_{t>=1} is X^(s+2)(s+3)(s+4)/(s(s+1)) + 6X/(s+1) - 12X^2/s, so

        C_E(X) = E*(X)-part + e1 * X + e2 * X^2

    with e1 = 12 int zeta U / (s(s+1)(s+3)(s+4)) and
    e2 = -24 int zeta U / (s^2 (s+3)(s+4)) on the (-1/2) line (the 2 from the
    E-integral prefactor is folded into the factors).  Returned as (e1, e2)
    specs with X = 1."""
    common = dict(
        c=-0.5,
        numerator=_zeta_u_numerator,
        numerator_key=f"zetaU@{LINE_CUTOFF}",
        x_power_shift=0,
        X=1.0,
        T=T,
        h=h,
        decay_model=_decay_model(4, -0.49, (0.0, 1.0, 2.0, 2.0)),
    )
    e1 = LineIntegralSpec(denominator_roots=(0.0, -1.0, -3.0, -4.0), factor=12.0, **common)
    e2 = LineIntegralSpec(denominator_roots=(0.0, 0.0, -3.0, -4.0), factor=-24.0, **common)
    return e1, e2


def ivar_spec(X: float, T: float = 2000.0, h: float = 0.05) -> LineIntegralSpec:
    """I(X) = int_(-1/4) F1(s) X^(s+1) / ((s-1) s (s+1)) ds."""
    return LineIntegralSpec(
        c=-0.25,
        numerator=_zeta_u_numerator,
        numerator_key=f"zetaU@{LINE_CUTOFF}",
        denominator_roots=(1.0, 0.0, -1.0),
        x_power_shift=1,
        X=X,
        T=T,
        h=h,
        decay_model=_decay_model(3, -0.24, (0.0, 1.0, 2.0, 2.0)),
    )


def id_spec(d: int, delta: int, X: float, T: float = 2000.0, h: float = 0.05) -> LineIntegralSpec:
    """I_{d,Delta}(X): with the principal L(1) values regularized to phi/m
    the inner e-sum collapses, leaving Q_{d Delta}(1) Q_{d Delta}(s) zeta(s)
    sum_{e|d} Gamma_Delta(e)^2 Delta_s(d/e) / ((d/e) e^(s+1))."""
    q = S.q_series(d * delta)
    q_at_1 = S.eval_series(q, 1.0, prime_cutoff=LINE_CUTOFF).real
    divisors = [e for e in range(1, d + 1) if d % e == 0]
    gammas = {e: float(gamma_weight(e, delta)) ** 2 for e in divisors}

    def numerator(s: np.ndarray, q=q, divisors=divisors, gammas=gammas, q1=q_at_1) -> np.ndarray:
        acc = np.zeros_like(s, dtype=np.complex128)
        for e in divisors:
            m = d // e
            acc = acc + gammas[e] * S.delta_s(m, s) / m * np.exp(-math.log(e) * (s + 1))
        return q1 * S.eval_series(q, s, prime_cutoff=LINE_CUTOFF) * zetamod.zeta(s) * acc

    return LineIntegralSpec(
        c=-0.5,
        numerator=numerator,
        numerator_key=f"Id[{d},{delta}]@{LINE_CUTOFF}",
        denominator_roots=(0.0, -2.0, -3.0, -4.0),
        x_power_shift=4,
        X=X,
        T=T,
        h=h,
        decay_model=_decay_model(4, -0.49, (0.0, 1.0, 2.0, 2.0, 2.0)),
    )


def jd_spec(d: int, delta: int, X: float, T: float = 2000.0, h: float = 0.05) -> LineIntegralSpec:
    """J_{d,Delta}(X) = C8 U(Delta) int_(-1/2) K_{d,Delta}(s) X^(s+4)
    / ((s+2)(s+3)(s+4)) ds."""
    k = S.k_series(d, delta)

    def numerator(s: np.ndarray, k=k) -> np.ndarray:
        return S.eval_series(k, s, prime_cutoff=LINE_CUTOFF)

    return LineIntegralSpec(
        c=-0.5,
        numerator=numerator,
        numerator_key=f"K[{d},{delta}]@{LINE_CUTOFF}",
        denominator_roots=(-2.0, -3.0, -4.0),
        x_power_shift=4,
        X=X,
        T=T,
        h=h,
        factor=c8() * float(U_of(delta)),
        decay_model=_decay_model(3, -0.49, (0.0,)),
    )


# -- the four psi_1 Perron formulas -----------------------------------------


def _sF_shift_numerator(s: np.ndarray) -> np.ndarray:
    """s * F(s+1): the zeta(s+1)-pole of F at s = 0 is factored into the
    denominator roots so the cached factor stays smooth near the line."""
    return s * S.eval_series(S.f_series(), s + 1.0, prime_cutoff=LINE_CUTOFF)


_PERRON_FORMS = {
    # which: (roots incl. the factored numerator pole, shift, factor)
    "weighted1": ((0.0, 0.0, -1.0), 1, 1.0),  # sum_{l<X} (X-l) psi_1(l)/l
    "weighted2": ((0.0, 0.0, -1.0, -2.0), 2, 2.0),  # sum (X-l)^2 psi_1(l)/l
    "plain1": ((0.0, -1.0, -2.0), 2, 1.0),  # sum (X-l) psi_1(l)
    "logweight": ((0.0, -2.0, -2.0), 2, 1.0),  # sum log(X/l) l psi_1(l)
}

PERRON_TARGETS = ("weighted1", "weighted2", "plain1", "logweight")


def perron_spec(which: str, X: float, T: float = 2000.0, h: float = 0.05) -> LineIntegralSpec:
    roots, shift, factor = _PERRON_FORMS[which]
    return LineIntegralSpec(
        c=0.0,
        numerator=_sF_shift_numerator,
        numerator_key=f"sF(s+1)@{LINE_CUTOFF}",
        denominator_roots=roots,
        x_power_shift=shift,
        X=X,
        T=T,
        h=h,
        factor=factor,
        decay_model=_decay_model(len(roots), 0.01, (1.0, 2.0), poly_degree=1),
    )


_PERRON_SUM_IDS = {
    "weighted1": "linear",
    "weighted2": "quadratic",
    "plain1": "plain",
    "logweight": "log",
}


def perron_direct_sum(which: str, X: float) -> float:
    """The lattice sums the Perron formulas represent (oracle route)."""
    from .lattice import psi1_sums

    if which not in _PERRON_SUM_IDS:
        raise ValueError(which)
    return psi1_sums(_PERRON_SUM_IDS[which], X).value


def perron_main_term(which: str, X: float) -> float:
    """Residue at s = 0 of each Perron integrand (the X^1/X^2 main terms):
    weighted1 -> X (a1 log X + b1); weighted2 -> 2 X^2 (a2 log X + b2);
    plain1 -> h(1) X^2 / 2; logweight -> h(1) X^2 / 4."""
    from .constants import h1, lemma_coefficients

    k = lemma_coefficients()
    if which == "weighted1":
        return X * (k.alpha1 * math.log(X) + k.beta1)
    if which == "weighted2":
        return 2.0 * X * X * (k.alpha2 * math.log(X) + k.beta2)
    if which == "plain1":
        return h1() * X * X / 2.0
    if which == "logweight":
        return h1() * X * X / 4.0
    raise ValueError(which)


# ---------------------------------------------------------------------------
# residues and main terms
# ---------------------------------------------------------------------------


def residue_terms(d: int, delta: int, X: float) -> float:
    """The s = 0 residue of the X^4-weight kernel integrand.

    d = 1: C*(X) = (zeta(0) Q_Delta(0)_reg / Gamma(5)) * (zeta'(0)/zeta(0)
           + R'_{1,Delta}(0)/R_{1,Delta}(0) - Gamma'(5)/Gamma(5) + log X + 1),
           the constant part collapsing to Z + R'/R(0) with
           Z = log(2 pi) + gamma0 - 13/12;
    d = p: C** = zeta(0) log d Q_{d Delta}(0)_reg / Gamma(5), X-free.
    """
    if math.gcd(d, delta) != 1:
        raise ValueError("residue_terms requires gcd(d, delta) = 1")
    if X <= 1.0:
        raise ValueError("residue_terms requires X > 1")
    gamma5 = 24.0
    if d == 1:
        q0 = S.eval_series_reg(S.q_series(delta), 0.0, prime_cutoff=LINE_CUTOFF)
        return -0.5 * q0 / gamma5 * (S.r_log_deriv_0(delta) + z_res() + math.log(X))
    fac = factorize(d)
    if len(fac) != 1 or fac[0][1] != 1:
        raise ValueError("residue_terms: d must be 1 or prime")
    q0 = S.eval_series_reg(S.q_series(d * delta), 0.0, prime_cutoff=LINE_CUTOFF)
    return -0.5 * math.log(d) * q0 / gamma5


def mainterm_coefficients(d: int, delta: int) -> tuple[float, float, float, float]:
    """(A, B, B*, Z) with, for squarefree d coprime to Delta,

    A  = Q_{dD}(1)^2 / (30 d^2) * sum_{e|d} Gamma_D(e)^2 phi(d/e)
    B  = -(1/12) Q_{dD}(1) Q_{dD}(0)_reg Gamma_D(d)^2 / d
    B* = B * sum_{p|d} log p / Gamma_D(p)^2
    Z  = Z_{dD}  (the log-free X^4 weight)

    (principal L(1) values regularized to phi/m throughout)."""
    if math.gcd(d, delta) != 1:
        raise ValueError("mainterm_coefficients requires gcd(d, delta) = 1")
    m = d * delta
    q1 = q1_value(m)
    q0 = q0_reg(m)
    gd2 = float(gamma_weight(d, delta)) ** 2
    esum = math.fsum(
        float(gamma_weight(e, delta)) ** 2 * euler_phi(d // e)
        for e in range(1, d + 1)
        if d % e == 0
    )
    a_coef = q1 * q1 * esum / (30.0 * d * d)
    b_coef = -q1 * q0 * gd2 / (12.0 * d)
    psum = math.fsum(
        math.log(p) / float(gamma_weight(p, delta)) ** 2 for p, _ in factorize(d)
    )
    return a_coef, b_coef, b_coef * psum, z_of_modulus(m)


def m_main(d: int, delta: int, X: float) -> float:
    """M_{d,Delta}(X) = A X^5 + B (log(X/d) + Z_{dD}) X^4 + B* X^4."""
    a_coef, b_coef, bstar, z = mainterm_coefficients(d, delta)
    return a_coef * X**5 + b_coef * (math.log(X / d) + z) * X**4 + bstar * X**4


def method2_x5_coefficient(d: int, delta: int) -> float:
    """C8 U(Delta) K_d(1)_reg / 30, the X^5 weight of the second route."""
    return c8() * float(U_of(delta)) * k_reg_1(d, delta) / 30.0


# ---------------------------------------------------------------------------
# the averaging operator
# ---------------------------------------------------------------------------


def c_operator(f: Callable[[float], float], X: float, t0: float) -> float:
    """C_f(X) = f(X)/X^2 - 6X int_0^X f/t^4 + 12X^2 int_0^X f/t^5 for f
    vanishing on (0, t0); adaptive quadrature on [t0, X]."""
    if not 0.0 < t0 <= X:
        raise ValueError("c_operator needs 0 < t0 <= X")
    i4, _ = quad(lambda t: f(t) / t**4, t0, X, limit=400)
    i5, _ = quad(lambda t: f(t) / t**5, t0, X, limit=400)
    return f(X) / X**2 - 6.0 * X * i4 + 12.0 * X * X * i5


def c_operator_tabulated(t: np.ndarray, f: np.ndarray, X: float) -> float:
    """Same, for a tabulated f given on an ascending grid (f = 0 below t[0]);
    trapezoid in t on the grid as given, f(X) from linear interpolation."""
    t = np.asarray(t, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    mask = t <= X
    tt, ff = t[mask], f[mask]
    if len(tt) < 2:
        raise ValueError("tabulated c_operator needs at least two nodes below X")
    if tt[-1] < X:
        tt = np.append(tt, X)
        ff = np.append(ff, float(np.interp(X, t, f)))
    i4 = float(trapezoid(ff / tt**4, tt))
    i5 = float(trapezoid(ff / tt**5, tt))
    return ff[-1] / X**2 - 6.0 * X * i4 + 12.0 * X * X * i5


def c_operator_monomial(s) -> complex:
    """C applied to t^(s+4) gives X^(s+2) times this factor."""
    s = complex(s)
    return (s + 3.0) * (s + 4.0) / (s * (s + 1.0))


def c_operator_monomial_value(s, X: float, t0: float) -> complex:
    """Exact C of t^(s+4) 1_{t >= t0}: the clean X^(s+2) factor plus the
    explicit t0 boundary corrections."""
    s = complex(s)
    main = X ** (s + 2) * c_operator_monomial(s)
    boundary = 6.0 * X * t0 ** (s + 1) / (s + 1.0) - 12.0 * X * X * t0**s / s
    return main + boundary
