"""Cross-checks tying the layers together: slope fits, series reductions,
and the prime-side diagnostics.

Everything here is a *check*: each function compares two independently
computed routes to the same quantity and reports a residual.  The checks
fall into four groups.

* Slope fits.  The cubic-weight lattice sum J*(X) minus its main term
  C8 (M(X) + E(X)) should grow no faster than X^3.5; the per-divisor
  variants (method1/method2) have their own exponents.  ``exponent_fit``
  is the shared least-squares utility; a wrong X^4 or X^4 log X
  coefficient shows up instantly as a slope of 4.
* Series reductions.  The divisor-opened main terms collapse through a
  chain of Euler-product identities (per-prime exact, coefficientwise
  exact, and convergent-sum numeric); each link is checked at the level
  where it is exactly checkable.
* The averaging-operator transfer.  Applying the C operator to the
  tabulated J* and differencing two scales must reproduce the closed
  forms plus the E* quadrature within the X^{7/5}-scale bound.  The
  closed forms carry explicit t0 = 1 boundary constants (c1, c2, e1, e2
  below) so the comparison is an identity, not a fit.
* Prime-side diagnostics.  Empirical moment sums against the variance
  main terms.  These are trend output only: the genuine error terms are
  powers of 1/log x and are not resolvable at desk scale, so the rows
  are emitted but (apart from exact rearrangements) not gated.

All pass/fail thresholds live in THRESHOLDS; nothing is scattered.
Tolerances marked "measured" were set by running the check, looking at
the actual residual, and pinning roughly a decade of headroom.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from . import contour, lattice, series
from .constants import (
    c2,
    c3,
    c8,
    h1,
    lemma_coefficients,
    q0_reg,
    q1_value,
    s_pp,
    s_script,
    u_at_1,
    v0_reg,
    z_bc,
    z_prod,
    z_res,
)
from .localfactors import (
    K_local,
    _theta_chain_parts,
    ell_local,
    factorize,
    q0_local,
    q1_local,
    r_local,
    run_identity_suite,
    V_local,
)
from .moments import MomentConfig, moment_summary, sigma_q
from .sieve import PrimeLogTable, chebyshev_theta, sieve_primes
from .util import format_sig, fsum, loglog_slope

__all__ = [
    "THRESHOLDS",
    "LEMMA_GRID",
    "METHOD_GRID",
    "PERRON_SLOPE_GRID",
    "FitReport",
    "CheckResult",
    "SuiteResult",
    "LemmaMainTerm",
    "TheoremAssembly",
    "TheoremReport",
    "exponent_fit",
    "lemma_main_term",
    "lemma_table",
    "lemma_check",
    "method1_check",
    "method2_check",
    "k1_consistency",
    "series_reduction_checks",
    "theta_chain_total",
    "theorem_assembly",
    "cm_collapse_residual",
    "transfer_rows",
    "theorem_pipeline",
    "run_suite",
    "run_all",
    "SUITE_NAMES",
]

log = logging.getLogger(__name__)

# One config block for every pass/fail bound (see module docstring).
THRESHOLDS: dict[str, float] = {
    # exact-identity sweeps
    "local_prime_limit": 100_000,  # seven identities, s in {0,1,2}
    "kred_n_max": 10_000,  # coefficientwise K-reduction range
    # constant cross-identities
    "constants_tight": 1e-10,
    "constants_u1": 1e-8,
    # Perron formulas
    "perron_quad_rel": 1e-3,
    "perron_slope_max": 0.2,
    # Lemma 1
    "lemma_slope_target": 3.5,
    "lemma_dominance": 1e-2,  # |residual| <= J*(X) * this, per grid point
    # per-divisor methods
    "method1_slack": 0.2,
    "method2_slope_target": 4.1,
    "k1_rel": 1e-6,
    # series reductions (tolerances measured; see module docstring)
    "sul_rel": 1e-5,
    "double_sum_floor": 1e-5,  # guard under the 2x-movement Cauchy bound
    "iki2_tol": 1e-5,
    "iki_euler_tol": 1e-6,
    "a1_euler_tol": 1e-6,
    "theta_chain_tol": 1e-6,
    # theorem assembly
    "collapse_rel": 1e-10,
    "parts_rel": 1e-11,
    # Measured transfer ratio is ~4.4 and decreasing in x: that is the
    # Lemma-1 residual (~0.1-0.3 X^3.4) pushed through the C operator,
    # so the constant pins the X^{7/5} power, not a small error.
    "transfer_ratio_max": 8.0,  # |lhs - rhs| <= this * Q^2 (x/Q)^{7/5}
    "v_ratio_lo": 0.75,
    "v_ratio_hi": 1.25,
}

LEMMA_GRID: tuple[float, ...] = (500.0, 1000.0, 2000.0, 4000.0, 8000.0, 16000.0)
# The method grids sit an octave higher: the method2 remainder is X^4
# with a log factor whose fitted-slope drift (~ 1/log X) only drops
# under the 4.1 bound once the window starts around 3000.
METHOD_GRID: tuple[float, ...] = (3000.0, 6000.0, 12000.0, 24000.0)
PERRON_SLOPE_GRID: tuple[float, ...] = (1e2, 3.16e2, 1e3, 3.16e3, 1e4, 3.16e4, 1e5)
METHOD_PAIRS: tuple[tuple[int, int], ...] = ((1, 1), (2, 1), (1, 2), (3, 1))

_GAMMA3_TWICE = 4.0  # 2 Gamma(3)


# ---------------------------------------------------------------------------
# fit reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FitReport:
    """Least-squares exponent estimate of |residual| ~ X^slope.

    ``passed`` is slope <= target_exponent; a degenerate fit (fewer than
    two nonzero residuals) passes vacuously and is flagged.
    """

    points: tuple[tuple[float, float], ...]
    slope: float
    intercept: float
    target_exponent: float
    passed: bool
    degenerate: bool = False

    def line(self) -> str:
        tag = "degenerate" if self.degenerate else f"slope {self.slope:+.3f}"
        verdict = "pass" if self.passed else "FAIL"
        return f"{tag} vs target {self.target_exponent:.2f}: {verdict}"


def exponent_fit(
    points: Sequence[tuple[float, float]], target_exponent: float = math.inf
) -> FitReport:
    """Fit log|residual| vs log X by least squares, excluding zero residuals."""
    pts = tuple((float(x), float(r)) for x, r in points)
    if len(pts) < 3:
        raise ValueError("exponent_fit needs at least 3 points")
    if any(x <= 0 for x, _ in pts):
        raise ValueError("exponent_fit needs positive X")
    nonzero = [(x, abs(r)) for x, r in pts if r != 0.0]
    if len(nonzero) < 2:
        return FitReport(pts, math.nan, math.nan, target_exponent, True, True)
    slope, intercept = loglog_slope(nonzero)
    return FitReport(pts, slope, intercept, target_exponent, slope <= target_exponent)


@dataclass(frozen=True)
class CheckResult:
    """One named pass/fail line: |value| is compared against bound.

    Non-gating lines are diagnostics (trend output): they are reported
    and written to CSV but do not affect suite exit status.
    """

    name: str
    ok: bool
    value: float
    bound: float
    detail: str = ""
    gating: bool = True

    def line(self) -> str:
        verdict = "pass" if self.ok else ("FAIL" if self.gating else "info")
        tail = f"  [{self.detail}]" if self.detail else ""
        return f"{self.name}: {verdict} (value {self.value:.3e}, bound {self.bound:.3e}){tail}"


# ---------------------------------------------------------------------------
# Lemma 1: J*(X) = C8 (M(X) + E(X)) + O(X^{7/2 - 1/10})
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LemmaMainTerm:
    """M(X) = alpha X^5 + beta X^4 log X + gamma X^4, plus the E handle."""

    alpha: float
    beta: float
    gamma: float
    C8: float

    def m_of(self, X: float) -> float:
        return self.alpha * X**5 + self.beta * X**4 * math.log(X) + self.gamma * X**4

    def e_spec(self, X: float) -> contour.LineIntegralSpec:
        return contour.e_spec(X)


def lemma_main_term() -> LemmaMainTerm:
    k = lemma_coefficients()
    return LemmaMainTerm(alpha=k.alpha, beta=k.beta, gamma=k.gamma, C8=c8())


def lemma_table(
    X_grid: Sequence[float] = LEMMA_GRID, workers: int = 1
) -> list[dict[str, float]]:
    """Per-X rows (jstar, main term, E value and error, residual)."""
    mt = lemma_main_term()
    rows = []
    for X in X_grid:
        X = float(X)
        jv = lattice.jstar(X, workers=workers).value
        # The envelope error is oscillation-blind and ~100x the observed
        # value movement, so the target is pinned to the residual scale
        # X^3.4 rather than to E itself.
        e_val, e_err = contour.line_integral(
            mt.e_spec(X), rel_target=0.05, abs_floor=X**3.4 / 10.0, workers=workers
        )
        main = mt.C8 * (mt.m_of(X) + e_val)
        rows.append(
            {
                "X": X,
                "jstar": jv,
                "main": main,
                "e_value": e_val,
                "e_err": e_err,
                "residual": jv - main,
            }
        )
    return rows


def lemma_check(X_grid: Sequence[float] = LEMMA_GRID, workers: int = 1) -> FitReport:
    """Slope of |J*(X) - C8 (M(X)+E(X))| over the grid, target 3.5."""
    grid = [float(X) for X in X_grid]
    if len(grid) < 4:
        raise ValueError("lemma_check needs at least 4 grid points")
    if max(grid) < 10.0 * min(grid):
        raise ValueError("lemma_check grid should span at least one decade")
    for X in grid:
        lattice._check_budget(X)
    rows = lemma_table(grid, workers=workers)
    points = [(row["X"], row["residual"]) for row in rows]
    return exponent_fit(points, THRESHOLDS["lemma_slope_target"])


def _lemma_checks(workers: int = 1) -> tuple[list[CheckResult], list[dict[str, float]]]:
    rows = lemma_table(LEMMA_GRID, workers=workers)
    fit = exponent_fit(
        [(r["X"], r["residual"]) for r in rows], THRESHOLDS["lemma_slope_target"]
    )
    checks = [
        CheckResult(
            "lemma_slope",
            fit.passed,
            fit.slope,
            fit.target_exponent,
            detail=f"intercept {fit.intercept:+.3f}",
        )
    ]
    worst = max(abs(r["residual"]) / r["jstar"] for r in rows)
    checks.append(
        CheckResult("lemma_dominance", worst <= THRESHOLDS["lemma_dominance"], worst,
                    THRESHOLDS["lemma_dominance"], detail="max |residual| / J*(X)")
    )
    lead = c8() * u_at_1() / 30.0
    gaps = [abs(r["jstar"] / r["X"] ** 5 - lead) for r in rows]
    monotone = all(b < a for a, b in zip(gaps, gaps[1:]))
    checks.append(
        CheckResult("lemma_leading_term", monotone, gaps[-1], gaps[0],
                    detail="|J*/X^5 - C8 U(1)/30| decreasing over grid")
    )
    return checks, rows


# ---------------------------------------------------------------------------
# the two per-divisor routes (method1 / method2)
# ---------------------------------------------------------------------------


def _method_pair_guard(d: int, delta: int) -> None:
    ok = {1, 2, 3, 5, 6}
    if d not in ok or delta not in ok:
        raise ValueError("method checks cover small squarefree d, Delta in {1,2,3,5,6}")
    if math.gcd(d, delta) != 1:
        raise ValueError("method checks need gcd(d, Delta) = 1")


def method1_target(d: int, X_min: float) -> float:
    """3 + eps, stretched for d > 1 where the dropped non-principal
    character terms (bounded by d^{3/2} X^{5/2}) join the residual."""
    return max(3.0, 2.5 + 1.5 * math.log(d) / math.log(X_min)) + THRESHOLDS["method1_slack"]


def method1_check(
    d: int, delta: int, X_grid: Sequence[float] = METHOD_GRID, workers: int = 1
) -> FitReport:
    """Slope of |L_{d,D}(X) - M_{d,D}(X) - 2 Gamma(3) I_{d,D}(X)|."""
    _method_pair_guard(d, delta)
    grid = [float(X) for X in X_grid]
    points = []
    for X in grid:
        lv = lattice.l_sum(d, delta, X).value
        iv, _ = contour.line_integral(
            contour.id_spec(d, delta, X),
            rel_target=0.02,
            abs_floor=X**3,
            workers=workers,
        )
        points.append((X, lv - contour.m_main(d, delta, X) - _GAMMA3_TWICE * iv))
    return exponent_fit(points, method1_target(d, min(grid)))


def method2_check(
    d: int, delta: int, X_grid: Sequence[float] = METHOD_GRID, workers: int = 1
) -> FitReport:
    """Slope of |L_{d,D}(X) - C8 U(D) K_d(1) X^5 / 30 - 2 J_{d,D}(X)|,
    target 4.1 (the dropped term is O(X^4 / d))."""
    _method_pair_guard(d, delta)
    grid = [float(X) for X in X_grid]
    coef = contour.method2_x5_coefficient(d, delta)
    points = []
    for X in grid:
        lv = lattice.l_sum(d, delta, X).value
        jv, _ = contour.line_integral(
            contour.jd_spec(d, delta, X),
            rel_target=0.02,
            abs_floor=X**4 / d,
            workers=workers,
        )
        points.append((X, lv - coef * X**5 - 2.0 * jv))
    return exponent_fit(points, THRESHOLDS["method2_slope_target"])


def k1_consistency(d: int, delta: int = 1) -> tuple[float, float]:
    """K_d(1) two ways: the closed regularized product, and the series
    factorization evaluated at s = 1 with the polar zeta dropped."""
    _method_pair_guard(d, delta)
    closed = contour.method2_x5_coefficient(d, delta) * 30.0 / (c8() * _u_of_float(delta))
    via_series = series.eval_series_reg(
        series.k_series(d, delta), 1.0, prime_cutoff=contour.LINE_CUTOFF
    )
    return closed, abs(closed - via_series) / abs(via_series)


def _u_of_float(delta: int) -> float:
    from .localfactors import U_of

    return float(U_of(delta))


def _methods_checks(workers: int = 1) -> list[CheckResult]:
    checks = []
    fit11 = method1_check(1, 1, workers=workers)
    checks.append(
        CheckResult("method1_slope_1_1", fit11.passed, fit11.slope, fit11.target_exponent,
                    detail=fit11.line())
    )
    fits = {}
    for d, delta in METHOD_PAIRS:
        fit = method2_check(d, delta, workers=workers)
        fits[(d, delta)] = fit
        checks.append(
            CheckResult(f"method2_slope_{d}_{delta}", fit.passed, fit.slope,
                        fit.target_exponent, detail=fit.line())
        )
    fit51 = method2_check(5, 1, workers=workers)
    ok = fit51.intercept < fits[(1, 1)].intercept
    checks.append(
        CheckResult(
            "method2_intercept_1_over_d",
            ok,
            fit51.intercept,
            fits[(1, 1)].intercept,
            detail="d=5 intercept below d=1 (the X^4/d factor)",
        )
    )
    for d in (1, 2, 3, 5):
        _, rel = k1_consistency(d)
        checks.append(
            CheckResult(f"k1_consistency_d{d}", rel <= THRESHOLDS["k1_rel"], rel,
                        THRESHOLDS["k1_rel"])
        )
    return checks


# ---------------------------------------------------------------------------
# series reductions
# ---------------------------------------------------------------------------


def _squarefree_ints(n: int) -> list[int]:
    return [int(v) for v in lattice._squarefree_upto(n) if v >= 1]


def _prime_float_parts(p: int) -> tuple[float, float, float, float, float]:
    """(theta1, theta2, m1, m2, v0) as floats; see the theta-chain block."""
    r, R, th1, th2, m1, m2, _, _, v0 = _theta_chain_parts(p)
    return float(th1), float(th2), float(m1), float(m2), float(v0)


def _mainterm_double_sums(t_delta: int, t_d: int) -> tuple[float, float, float]:
    """Truncated (s5, s4log, s4): the X^5, X^4 log X and X^4 coefficients of
    sum_D I(D) D^3 sum_d g_D(d) M_{d,D}(X/D), via mainterm_coefficients."""
    s5_parts: list[float] = []
    s4log_parts: list[float] = []
    s4_parts: list[float] = []
    for delta in _squarefree_ints(t_delta):
        i_d = lattice._i_float(delta)
        if i_d == 0.0:
            continue
        sig = set(lattice._signature(delta))
        for d in _squarefree_ints(t_d):
            if any(p in sig for p in lattice._signature(d)):
                continue
            g = 1.0
            for p in lattice._signature(d):
                g *= lattice._r_float(p)
            a_coef, b_coef, bstar, z = contour.mainterm_coefficients(d, delta)
            s5_parts.append(i_d / delta**2 * g * a_coef)
            s4log_parts.append(i_d / delta * g * b_coef)
            s4_parts.append(
                i_d / delta * g * (b_coef * (z - math.log(d * delta)) + bstar)
            )
    return fsum(s5_parts), fsum(s4log_parts), fsum(s4_parts)


def theta_chain_total(limit: int = 300_000) -> tuple[float, float]:
    """(total, target) for the X^4 log-weight chain.

    total = sum_n M1*(n) (Z + S + A1(n)) - sum_D c (I(D)/D) V_D(0) A2(D)
    over squarefree n, D <= limit, via multiplicative sieve arrays; the
    target is c C8 (Z + sum_p log p / (p(p-1))).  The tail of the n-sum
    dies like log n / n^2 and the D-sum like log D / D, so a limit of
    3e5 leaves less than 1e-6.
    """
    n = int(limit)
    c = -1.0 / 12.0
    m1_arr = np.ones(n + 1)
    m2_arr = np.ones(n + 1)
    a1_arr = np.zeros(n + 1)
    a2_arr = np.zeros(n + 1)
    m1_arr[0] = m2_arr[0] = 0.0
    for p in sieve_primes(n):
        p = int(p)
        th1, th2, m1, m2, _ = _prime_float_parts(p)
        lp = math.log(p)
        m1_arr[p::p] *= m1
        m2_arr[p::p] *= m2
        a1_arr[p::p] += th1 * lp
        a2_arr[p::p] += th2 * lp
        if p * p <= n:
            m1_arr[p * p :: p * p] = 0.0
            m2_arr[p * p :: p * p] = 0.0
    zs = z_res() + s_script()
    head1 = c * q1_value(1) * q0_reg(1)
    head2 = c * v0_reg(1)
    total = (
        head1 * (zs * fsum(m1_arr) + fsum(m1_arr * a1_arr))
        - head2 * fsum(m2_arr * a2_arr)
    )
    target = c * c8() * (z_res() + s_pp())
    return total, target


def _euler_sum_checks(limit: int = 300_000) -> list[CheckResult]:
    """The two sieved Euler-sum forms of C8 (the M1- and M2-weighted rows)."""
    n = int(limit)
    m1_arr = np.ones(n + 1)
    m2_arr = np.ones(n + 1)
    m1_arr[0] = m2_arr[0] = 0.0
    for p in sieve_primes(n):
        p = int(p)
        _, _, m1, m2, _ = _prime_float_parts(p)
        m1_arr[p::p] *= m1
        m2_arr[p::p] *= m2
        if p * p <= n:
            m1_arr[p * p :: p * p] = 0.0
            m2_arr[p * p :: p * p] = 0.0
    a1_form = q1_value(1) * q0_reg(1) * fsum(m1_arr)
    a2_form = v0_reg(1) * fsum(m2_arr)
    target = c8()
    return [
        CheckResult("a1_euler_sum", abs(a1_form - target) <= THRESHOLDS["a1_euler_tol"],
                    abs(a1_form - target), THRESHOLDS["a1_euler_tol"],
                    detail="Q(1) Q(0) sum_n prod M1(p) vs C8"),
        CheckResult("iki_euler_sum", abs(a2_form - target) <= THRESHOLDS["iki_euler_tol"],
                    abs(a2_form - target), THRESHOLDS["iki_euler_tol"],
                    detail="sum_D I(D) V_D(0) / D vs C8"),
    ]


def _iki2_sum(delta: int, limit: int = 1_000_000) -> tuple[float, float]:
    """(truncated sum, target) for sum_d g_D(d) Q(1) Q(0) Gamma^2 / d = V_D(0)."""
    n = int(limit)
    arr = np.zeros(n + 1)
    arr[1:] = 1.0 / np.arange(1, n + 1)
    sig = set(lattice._signature(delta))
    for p in sieve_primes(n):
        p = int(p)
        if p in sig:
            arr[p::p] = 0.0
            continue
        r = float(r_local(p))
        w = r * (1.0 + r) / (1.0 + r / p)
        arr[p::p] *= w
        if p * p <= n:
            arr[p * p :: p * p] = 0.0
    value = q1_value(delta) * q0_reg(delta) * fsum(arr)
    return value, v0_reg(delta)


def _iki2_local_exact(p_limit: int = 2000) -> int:
    """(1 - 1/p)(q1 q0 + r (1+r)^2 / p) == (1 - 1/p) V_0(p), exact rationals.

    Returns the number of failures (expected 0); this is the per-prime
    factor of the d-sum behind the V_D(0) reduction.
    """
    bad = 0
    for p in sieve_primes(p_limit):
        p = int(p)
        r = r_local(p)
        one = Fraction(1)
        lhs = (one - Fraction(1, p)) * (
            q1_local(p) * q0_local(p) + r * (1 + r) ** 2 / p
        )
        rhs = (one - Fraction(1, p)) * V_local(p, one)
        if lhs != rhs:
            bad += 1
    return bad


def _k_reduction_failures(n_max: int, deltas: Iterable[int] = (1, 2, 3)) -> int:
    """Coefficientwise: K_D(n) prod_{p|n, p∤D} (1+r) == prod (1 + ell(p)),
    exact rationals for all n <= n_max (the divisor-opened K-sum against
    the (1 * ell) factorization)."""
    n_max = int(n_max)
    primes = [int(p) for p in sieve_primes(n_max)]
    kfac = {p: K_local(p) for p in primes}
    rfac = {p: 1 + r_local(p) for p in primes}
    lfac = {p: 1 + ell_local(p) for p in primes}
    bad = 0
    for delta in deltas:
        dsig = set(p for p, _ in factorize(delta))
        for n in range(2, n_max + 1):
            lhs = Fraction(1)
            rhs = Fraction(1)
            for p, _ in factorize(n):
                if p in dsig:
                    continue
                lhs *= kfac[p] * rfac[p]
                rhs *= lfac[p]
            if lhs != rhs:
                bad += 1
    return bad


def _sul_points(
    deltas: Iterable[int] = (1, 2),
    s_points: Iterable[complex] = (2.5 + 2.0j, 3.0 - 1.5j),
    t_d: int = 600,
) -> list[tuple[int, complex, float]]:
    """Relative residual of C8 U(D) sum_d g_D(d) K_{d,D}(s) = zeta(s) V_D(s)
    at complex points of absolute convergence.  The d-sum is truncated
    (terms fall like d^{-1-sigma}) and the K remainders converge like
    p^{-sigma-3}, so a modest prime cutoff already leaves ~1e-7 tails."""
    from .zeta import zeta as zeta_fn

    out = []
    for delta in deltas:
        sig = set(lattice._signature(delta))
        ds = [
            d
            for d in _squarefree_ints(t_d)
            if not any(p in sig for p in lattice._signature(d))
        ]
        for s in s_points:
            parts = []
            for d in ds:
                g = 1.0
                for p in lattice._signature(d):
                    g *= lattice._r_float(p)
                parts.append(
                    g * series.eval_series(series.k_series(d, delta), s, prime_cutoff=2000)
                )
            lhs = c8() * _u_of_float(delta) * sum(parts)
            rhs = zeta_fn(s) * series.eval_series(
                series.v_series(delta), s, prime_cutoff=contour.LINE_CUTOFF
            )
            out.append((delta, s, abs(lhs - rhs) / abs(rhs)))
    return out


def series_reduction_checks() -> list[CheckResult]:
    """Each reduction checked at the level where it is exactly checkable."""
    checks: list[CheckResult] = []

    suite = run_identity_suite(int(p) for p in sieve_primes(2000))
    checks.append(
        CheckResult("local_identities", not suite["failures"],
                    float(len(suite["failures"])), 0.0,
                    detail=f"{suite['checked']} prime checks, s in {{0,1,2}}")
    )
    bad = _iki2_local_exact()
    checks.append(
        CheckResult("iki2_per_prime", bad == 0, float(bad), 0.0,
                    detail="(1-1/p)(q1 q0 + r(1+r)^2/p) = (1-1/p) V0(p), exact")
    )
    bad = _k_reduction_failures(THRESHOLDS["kred_n_max"])
    checks.append(
        CheckResult("k_reduction_coefficients", bad == 0, float(bad), 0.0,
                    detail=f"exact for n <= {int(THRESHOLDS['kred_n_max'])}, Delta in {{1,2,3}}")
    )
    for delta, s, rel in _sul_points():
        checks.append(
            CheckResult(f"sul_point_D{delta}_s{s.real:g}{s.imag:+g}j",
                        rel <= THRESHOLDS["sul_rel"], rel, THRESHOLDS["sul_rel"])
        )

    # truncated double sums: the tail scale is read off the movement
    # between two truncation levels (terms fall like 1/d^2, so the
    # remaining tail is about one movement; twice that is the bound)
    s5a, s4la, s4a = _mainterm_double_sums(60, 300)
    s5b, s4lb, s4b = _mainterm_double_sums(120, 600)
    k = lemma_coefficients()
    targets = (
        ("bir_double_sum", s5a, s5b, c8() * u_at_1() / 30.0),
        ("iki_double_sum", s4la, s4lb, -c8() / 12.0),
        ("theta_log_double_sum", s4a, s4b, c8() * (k.gamma + 1.0 / 24.0)),
    )
    for name, half, full, target in targets:
        err = abs(full - target)
        moved = abs(full - half)
        bound = max(2.0 * moved, THRESHOLDS["double_sum_floor"])
        checks.append(
            CheckResult(name, err <= bound, err, bound,
                        detail=f"truncation moved {moved:.2e}")
        )

    for delta in (1, 2, 3):
        value, target = _iki2_sum(delta)
        err = abs(value - target)
        checks.append(
            CheckResult(f"iki2_sum_D{delta}", err <= THRESHOLDS["iki2_tol"], err,
                        THRESHOLDS["iki2_tol"], detail="d-sum vs V_D(0)")
        )

    checks.extend(_euler_sum_checks())

    total, target = theta_chain_total()
    err = abs(total - target)
    checks.append(
        CheckResult("theta_chain_total", err <= THRESHOLDS["theta_chain_tol"], err,
                    THRESHOLDS["theta_chain_tol"],
                    detail="log-weight chain vs c C8 (Z + sum log p / p(p-1))")
    )
    return checks


# ---------------------------------------------------------------------------
# theorem assembly: the C operator, M*, M**, and the scale transfer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TheoremAssembly:
    """Closed forms produced by the averaging operator.

    C_M(X) with cut t0 = 1 is the collapse pattern 10a X^3
    + 6b X^2 log^2 X + (12g - 5b) X^2 log X + (6b - 5g) X^2 plus the
    boundary terms c1 X + c2 X^2 (X^2 pieces cancel in any two-scale
    difference, which is how the paper drops them).  A_coef/B_coef/C_coef
    are the theorem-scale coefficients A = U(1)/3, B = -U(0)/2,
    C = U(0)(1 - C2).
    """

    alpha: float
    beta: float
    gamma: float
    C8: float
    A_coef: float
    B_coef: float
    C_coef: float
    c1: float
    c2: float

    def m_star(self, X: float) -> float:
        lx = math.log(X)
        return self.A_coef * X**3 + self.B_coef * X**2 * lx * lx + self.C_coef * X**2 * lx

    def m_double_star(self, x: float, P: float, Q: float) -> float:
        return (
            self.A_coef * x * (1.0 / P - 1.0 / Q)
            + c2() * math.log(P / Q)
            + self.B_coef * (math.log(P) ** 2 - math.log(Q) ** 2)
        )

    def cm_closed(self, X: float) -> float:
        lx = math.log(X)
        return (
            10.0 * self.alpha * X**3
            + 6.0 * self.beta * X**2 * lx * lx
            + (12.0 * self.gamma - 5.0 * self.beta) * X**2 * lx
            + (6.0 * self.beta - 5.0 * self.gamma) * X**2
            + self.c1 * X
            + self.c2 * X**2
        )

    def a_of(self, x: float, P: float, Q: float) -> float:
        return P**2 * self.m_star(x / P) - Q**2 * self.m_star(x / Q)


def theorem_assembly() -> TheoremAssembly:
    k = lemma_coefficients()
    return TheoremAssembly(
        alpha=k.alpha,
        beta=k.beta,
        gamma=k.gamma,
        C8=c8(),
        A_coef=u_at_1() / 3.0,
        B_coef=-0.5,
        C_coef=1.0 - c2(),
        c1=3.0 * k.alpha - 6.0 * k.beta + 6.0 * k.gamma,
        c2=-12.0 * k.alpha,
    )


def cm_collapse_residual(X_values: Sequence[float] = (50.0, 200.0)) -> float:
    """Worst relative gap between the numeric C operator applied to the
    M(X) formula (cut at t0 = 1) and the closed collapse pattern."""
    mt = lemma_main_term()
    ta = theorem_assembly()
    worst = 0.0
    for X in X_values:
        numeric = contour.c_operator(mt.m_of, float(X), 1.0)
        closed = ta.cm_closed(float(X))
        worst = max(worst, abs(numeric - closed) / abs(closed))
    return worst


def _e_boundary_terms(workers: int = 1) -> tuple[float, float]:
    """(e1, e2): the X-independent boundary integrals of the E kernel at
    t0 = 1 (see contour.cstar_boundary_specs)."""
    s1, s2 = contour.cstar_boundary_specs()
    e1, _ = contour.line_integral(s1, rel_target=1e-3, abs_floor=1.0, workers=workers)
    e2, _ = contour.line_integral(s2, rel_target=1e-3, abs_floor=1.0, workers=workers)
    return e1, e2


def transfer_rows(
    x_values: Sequence[float] = (3e4, 1e5), workers: int = 1
) -> list[dict[str, float]]:
    """The scale-transfer identity on tabulated J*.

    lhs = P^2 C_{J*}(x/P) - Q^2 C_{J*}(x/Q) with the numeric operator on a
    tabulated J* (step 1/4); rhs = C8 (P^2 G(x/P) - Q^2 G(x/Q)) where G
    collects C_M (closed), 2 E* (quadrature), the t0 = 1 boundary terms
    and the exact (0,1) continuation of M + E (which is -U(1) t^5 / 15).
    The comparison scale is Q^2 (x/Q)^{7/5}.
    """
    ta = theorem_assembly()
    e1, e2 = _e_boundary_terms(workers=workers)
    u1 = u_at_1()
    rows = []
    for x in x_values:
        x = float(x)
        Q = x / math.log(x) ** 2
        P = Q / 2.0
        x_over_p = x / P
        grid = np.arange(2.0, x_over_p + 0.25, 0.25)
        jtab = np.array([lattice.jstar(float(t), workers=workers).value for t in grid])

        def g_of(X: float) -> float:
            estar, _ = contour.line_integral(
                contour.estar_spec(X), rel_target=0.02, abs_floor=X**1.5, workers=workers
            )
            return (
                ta.cm_closed(X)
                + 2.0 * estar
                + (e1 + u1 / 5.0) * X
                + (e2 - 0.8 * u1) * X**2
            )

        lhs = P**2 * contour.c_operator_tabulated(grid, jtab, x / P) - Q**2 * (
            contour.c_operator_tabulated(grid, jtab, x / Q)
        )
        rhs = ta.C8 * (P**2 * g_of(x / P) - Q**2 * g_of(x / Q))
        scale = Q**2 * (x / Q) ** 1.4
        rows.append(
            {
                "x": x,
                "P": P,
                "Q": Q,
                "lhs": lhs,
                "rhs": rhs,
                "residual": lhs - rhs,
                "scale": scale,
                "ratio": abs(lhs - rhs) / scale,
            }
        )
    return rows


# ---------------------------------------------------------------------------
# prime-side pipeline
# ---------------------------------------------------------------------------


def _variance_main(x: float, t: float, workers: int = 1) -> float:
    """t x log t - (C2+1) t x + 2 t^2 I(x/t), the additive-in-range variance
    main term (differencing two of these kills every range-independent
    piece, including the Z log terms)."""
    iv, _ = contour.line_integral(
        contour.ivar_spec(x / t), rel_target=1e-4, abs_floor=x / t, workers=workers
    )
    return t * x * math.log(t) - (c2() + 1.0) * t * x + 2.0 * t * t * iv


def _parts_rearrangement_residual(
    table: PrimeLogTable, cfg: MomentConfig, workers: int = 1
) -> float:
    """Exact Abel rearrangement of S1 over (P, Q]:

    S1 = Q sum_q w_q - sum_q w_q (Q - q),  w_q = phi(q) sum' theta^3 / q,

    with the theta-cubes reconstructed from the per-q E-moment rows (an
    exact binomial expansion, using theta(x) and sigma_q).  Returns the
    relative residual; anything above ~1e-12 means an accumulation bug.
    """
    report = moment_summary(table, cfg, workers=workers, keep_per_q=True)
    assert report.per_q is not None
    x = cfg.x
    theta_x = chebyshev_theta(table, x)
    w = []
    for q, phi, e2, e3, in report.per_q:
        e1 = theta_x - sigma_q(q) - x
        s3 = phi * e3 + 3.0 * x * e2 + 3.0 * x * x / phi * e1 + x**3 / phi
        w.append((q, s3 / q))
    lhs = report.S1
    rhs = cfg.Q * fsum(wq for _, wq in w) - fsum(wq * (cfg.Q - q) for q, wq in w)
    scale = max(abs(lhs), abs(rhs), 1.0)
    return abs(lhs - rhs) / scale


@dataclass(frozen=True)
class TheoremReport:
    """Diagnostic output of the prime-side pipeline (mostly non-gating)."""

    x: float
    P: float
    Q: float
    v_row: dict[str, float]
    m_row: dict[str, float]
    ratio_rows: tuple[dict[str, float], ...]
    parts_residual: float
    collapse_residual: float
    transfer: tuple[dict[str, float], ...]

    def checks(self) -> list[CheckResult]:
        out = [
            CheckResult("parts_rearrangement",
                        self.parts_residual <= THRESHOLDS["parts_rel"],
                        self.parts_residual, THRESHOLDS["parts_rel"]),
            CheckResult("cm_collapse",
                        self.collapse_residual <= THRESHOLDS["collapse_rel"],
                        self.collapse_residual, THRESHOLDS["collapse_rel"],
                        detail="numeric C operator vs closed pattern"),
        ]
        for row in self.transfer:
            out.append(
                CheckResult(f"c_transfer_x{row['x']:.0e}",
                            row["ratio"] <= THRESHOLDS["transfer_ratio_max"],
                            row["ratio"], THRESHOLDS["transfer_ratio_max"],
                            detail="|lhs - rhs| / Q^2 (x/Q)^{7/5}")
            )
        ratio = self.v_row["ratio"]
        out.append(
            CheckResult("v_ratio", THRESHOLDS["v_ratio_lo"] <= ratio <= THRESHOLDS["v_ratio_hi"],
                        ratio, THRESHOLDS["v_ratio_hi"],
                        detail="empirical V / variance mains", gating=False)
        )
        out.append(
            CheckResult("m_vs_variance22", True, self.m_row["difference_corrected"],
                        math.nan,
                        detail="trend only; errors are 1/log-x scale "
                        f"(literal-form gap {self.m_row['difference']:.2e})",
                        gating=False)
        )
        r32 = [row["r32"] for row in self.ratio_rows]
        decreasing = all(b < a for a, b in zip(r32, r32[1:]))
        out.append(
            CheckResult("m_ratio_decreasing", decreasing,
                        r32[-1] if r32 else math.nan, r32[0] if r32 else math.nan,
                        detail="|M| / (Q^3 (x/Q)^{3/2}) across x", gating=False)
        )
        return out


def theorem_pipeline(
    table: PrimeLogTable,
    cfg: MomentConfig,
    workers: int = 1,
    ratio_x: Sequence[float] = (1e4, 1e5, 1e6),
    transfer_x: Sequence[float] = (3e4, 1e5),
) -> TheoremReport:
    """Compare the empirical moment sums with the variance-route main terms
    and emit the normalized-ratio trend table; exact sub-identities (the
    Abel rearrangement, the operator collapse, the scale transfer) are
    gated, the prime-side rows are trend output."""
    if cfg.x > 1e7:
        raise ValueError("theorem_pipeline budget is x <= 1e7")
    report = moment_summary(table, cfg, workers=workers)

    v_main = _variance_main(cfg.x, cfg.Q, workers) - _variance_main(cfg.x, cfg.P, workers)
    v_row = {
        "x": cfg.x,
        "P": cfg.P,
        "Q": cfg.Q,
        "v_empirical": report.V,
        "v_main": v_main,
        "ratio": report.V / v_main,
    }

    X = cfg.x / cfg.Q
    iv, _ = contour.line_integral(
        contour.ivar_spec(X), rel_target=1e-4, abs_floor=X, workers=workers
    )
    rhs22 = (
        report.S1
        - 3.0 * cfg.Q**3 * (X * X * math.log(cfg.Q) - X * X * (c2() + 1.0) + 2.0 * X * iv)
        - 3.0 * z_prod() * cfg.x**3 * math.log(cfg.Q / cfg.P)
    )
    # The literal asymptotic form drops 3x^2 (theta(x)-x) U and replaces U
    # by its Z log(Q/P) main term; at desk scale theta(x)-x is nowhere
    # near zero, so also report the form with those two pieces kept
    # empirical (the remaining gap is then 3x times the variance error).
    theta_err = chebyshev_theta(table, cfg.x) - cfg.x
    corrected = (
        report.S1
        - 3.0 * cfg.x * v_main
        - 3.0 * cfg.x**2 * theta_err * report.U
        - cfg.x**3 * report.U
    )
    m_row = {
        "x": cfg.x,
        "m_empirical": report.M,
        "m_variance22": rhs22,
        "m_corrected": corrected,
        "difference": report.M - rhs22,
        "difference_corrected": report.M - corrected,
        "log_scale": cfg.x**3 / math.log(cfg.x) ** cfg.A,
    }

    ratio_rows = []
    for xv in ratio_x:
        xv = float(xv)
        if xv > table.x_max:
            continue
        Qv = xv / math.log(xv) ** 2
        sub = MomentConfig(x=xv, P=Qv / 2.0, Q=Qv, A=cfg.A)
        rep = moment_summary(table, sub, workers=workers)
        Xv = xv / Qv
        ratio_rows.append(
            {
                "x": xv,
                "Q": Qv,
                "M": rep.M,
                "r32": abs(rep.M) / (Qv**3 * Xv**1.5),
                "r75": abs(rep.M) / (Qv**3 * Xv**1.4),
            }
        )

    parts = _parts_rearrangement_residual(table, cfg, workers=workers)
    collapse = cm_collapse_residual()
    transfer = transfer_rows(transfer_x, workers=workers)
    return TheoremReport(
        x=cfg.x,
        P=cfg.P,
        Q=cfg.Q,
        v_row=v_row,
        m_row=m_row,
        ratio_rows=tuple(ratio_rows),
        parts_residual=parts,
        collapse_residual=collapse,
        transfer=tuple(transfer),
    )


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

SUITE_NAMES = ("local", "constants", "perron", "lemma", "methods", "series", "theorem")


@dataclass
class SuiteResult:
    name: str
    checks: list[CheckResult]
    elapsed: float
    tables: dict[str, list[dict[str, float]]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks if c.gating)

    def lines(self) -> list[str]:
        out = [f"[{self.name}] {'PASS' if self.passed else 'FAIL'} ({self.elapsed:.1f}s)"]
        out.extend("  " + c.line() for c in self.checks)
        return out


def _local_suite(workers: int = 1) -> tuple[list[CheckResult], dict]:
    primes = sieve_primes(int(THRESHOLDS["local_prime_limit"]))
    result = run_identity_suite(int(p) for p in primes)
    ok = not result["failures"]
    detail = f"7 identities x {result['checked']} primes, s in {{0,1,2}}"
    if result["failures"]:
        detail += f"; first failures {result['failures'][:3]}"
    return [CheckResult("local_identity_suite", ok, float(len(result["failures"])), 0.0,
                        detail=detail)], {}


def _constants_suite(workers: int = 1) -> tuple[list[CheckResult], dict]:
    from .constants import c5, c6
    from .series import eval_series_reg, u_series

    tight = THRESHOLDS["constants_tight"]
    k = lemma_coefficients()
    u0 = eval_series_reg(u_series(), 0.0, prime_cutoff=contour.LINE_CUTOFF)
    rows = [
        ("c5_c6_c8_inverse", abs(c5() * c6() * c8() - 1.0), tight),
        ("c3_h1_inverse", abs(c3() * h1() - 1.0), tight),
        ("u1_vs_zeta_product", abs(u_at_1() - z_prod()), THRESHOLDS["constants_u1"]),
        ("u0_regularized", abs(u0 - 1.0), tight),
        ("z_bc_vs_z_res", abs(z_bc() - z_res()), tight),
        ("gamma_identity", abs(12.0 * k.gamma - 5.0 * k.beta - (1.0 - c2())), tight),
        ("gamma_theta_form", abs(k.gamma + 1.0 / 24.0 - k.beta * (z_res() + s_pp())), tight),
    ]
    return [CheckResult(name, err <= tol, err, tol) for name, err, tol in rows], {}


def _perron_suite(workers: int = 1) -> tuple[list[CheckResult], dict]:
    checks = []
    rows = []
    for which in contour.PERRON_TARGETS:
        for X in (50.0, 200.0, 1000.0):
            direct = contour.perron_direct_sum(which, X)
            quad, err = contour.line_integral(
                contour.perron_spec(which, X),
                rel_target=1e-4,
                abs_floor=abs(direct),
                workers=workers,
            )
            rel = abs(quad - direct) / abs(direct)
            rows.append({"which": which, "X": X, "direct": direct, "quad": quad, "rel": rel})
            checks.append(
                CheckResult(f"perron_{which}_X{X:.0f}",
                            rel <= THRESHOLDS["perron_quad_rel"], rel,
                            THRESHOLDS["perron_quad_rel"])
            )
    points = [
        (X, contour.perron_direct_sum("weighted1", X) - contour.perron_main_term("weighted1", X))
        for X in PERRON_SLOPE_GRID
    ]
    fit = exponent_fit(points, THRESHOLDS["perron_slope_max"])
    checks.append(
        CheckResult("perron_residual_slope", fit.passed, fit.slope, fit.target_exponent,
                    detail="X (a1 log X + b1) residual over [1e2, 1e5]")
    )
    return checks, {"perron_points": rows}


def _lemma_suite(workers: int = 1) -> tuple[list[CheckResult], dict]:
    checks, rows = _lemma_checks(workers=workers)
    return checks, {"lemma_grid": rows}


def _methods_suite(workers: int = 1) -> tuple[list[CheckResult], dict]:
    return _methods_checks(workers=workers), {}


def _series_suite(workers: int = 1) -> tuple[list[CheckResult], dict]:
    return series_reduction_checks(), {}


def _theorem_suite(workers: int = 1) -> tuple[list[CheckResult], dict]:
    x = 1e6
    Q = x / math.log(x) ** 2
    cfg = MomentConfig(x=x, P=Q / 2.0, Q=Q)
    table = PrimeLogTable.load(int(x))
    report = theorem_pipeline(table, cfg, workers=workers)
    tables = {
        "v_row": [report.v_row],
        "m_row": [report.m_row],
        "ratio_rows": list(report.ratio_rows),
        "transfer": list(report.transfer),
    }
    return report.checks(), tables


_SUITES: dict[str, Callable[[int], tuple[list[CheckResult], dict]]] = {
    "local": _local_suite,
    "constants": _constants_suite,
    "perron": _perron_suite,
    "lemma": _lemma_suite,
    "methods": _methods_suite,
    "series": _series_suite,
    "theorem": _theorem_suite,
}


def run_suite(name: str, workers: int = 1) -> SuiteResult:
    if name not in _SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {SUITE_NAMES}")
    start = time.perf_counter()
    checks, tables = _SUITES[name](workers)
    elapsed = time.perf_counter() - start
    log.info("suite %s: %d checks in %.1fs", name, len(checks), elapsed)
    return SuiteResult(name=name, checks=checks, elapsed=elapsed, tables=tables)


def run_all(workers: int = 1) -> list[SuiteResult]:
    return [run_suite(name, workers=workers) for name in SUITE_NAMES]


# ---------------------------------------------------------------------------
# CSV emission (deterministic: 17-significant-digit rendering, fixed order)
# ---------------------------------------------------------------------------


def write_checks_csv(path, checks: Sequence[CheckResult]) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("name,ok,value,bound,gating,detail\n")
        for c in checks:
            fh.write(
                f"{c.name},{int(c.ok)},{format_sig(c.value)},{format_sig(c.bound)},"
                f"{int(c.gating)},{c.detail}\n"
            )


def write_table_csv(path, rows: Sequence[dict[str, float]]) -> None:
    if not rows:
        return
    keys = list(rows[0].keys())
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(keys) + "\n")
        for row in rows:
            fh.write(
                ",".join(
                    format_sig(v) if isinstance(v, float) else str(v) for v in (row[k] for k in keys)
                )
                + "\n"
            )


def write_suite_csvs(result: SuiteResult, csv_dir) -> list[str]:
    import os

    written = []
    path = os.path.join(csv_dir, f"{result.name}.csv")
    write_checks_csv(path, result.checks)
    written.append(path)
    for key, rows in result.tables.items():
        tpath = os.path.join(csv_dir, f"{result.name}_{key}.csv")
        write_table_csv(tpath, rows)
        written.append(tpath)
    return written
