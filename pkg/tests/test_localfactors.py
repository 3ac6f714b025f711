"""Exact local-factor tests: factorization, weights, and the identity suite."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from apmlab import localfactors as lf
from apmlab.sieve import sieve_primes


# -- factorization helpers ---------------------------------------------------


@given(st.integers(1, 10_000))
@settings(max_examples=300, deadline=None)
def test_factorize_reconstructs_and_is_canonical(n):
    fac = lf.factorize(n)
    assert math.prod(p**e for p, e in fac) == n
    assert [p for p, _ in fac] == sorted(p for p, _ in fac)
    for p, e in fac:
        assert e >= 1
        assert all(p % q for q in range(2, int(p**0.5) + 1))


def test_factorize_rejects_nonpositive():
    with pytest.raises(ValueError):
        lf.factorize(0)


@given(st.integers(1, 3000))
@settings(max_examples=200, deadline=None)
def test_is_squarefree_against_direct_definition(n):
    direct = all(n % (k * k) for k in range(2, int(n**0.5) + 1))
    assert lf.is_squarefree(n) == direct


def test_mobius_values_and_divisor_sum():
    assert [lf.mobius(n) for n in (1, 2, 4, 6, 30)] == [1, -1, 0, 1, -1]
    for n in range(1, 200):
        total = sum(lf.mobius(d) for d in range(1, n + 1) if n % d == 0)
        assert total == (1 if n == 1 else 0)


# -- local weights -----------------------------------------------------------


def test_special_values_at_two():
    assert lf.r_local(2) == 0
    assert lf.I_local(2) == 2
    assert lf.U_local(2) == 1
    assert lf.gamma_weight(2) == 1


def test_r_local_closed_form():
    assert lf.r_local(3) == Fraction(3, 2)
    assert lf.r_local(5) == Fraction(5, 14)
    assert lf.r_local(97) == Fraction(97, 97 * 97 - 2 * 97 - 1)


def test_multiplicative_extensions():
    assert lf.I_of(6) == lf.I_local(2) * lf.I_local(3)
    assert lf.I_of(12) == 0
    assert lf.I_of(1) == 1
    assert lf.U_of(4) == lf.U_of(2)  # depends on the radical only
    assert lf.psi1(1) == 1
    assert lf.psi1(12) == lf.psi1_local(2) * lf.psi1_local(3)
    assert lf.psi1(36) == lf.psi1(6)


def test_g_weight_support():
    assert lf.g_weight(4) == 0
    assert lf.g_weight(6, delta=3) == 0
    assert lf.g_weight(35, delta=6) == lf.r_local(5) * lf.r_local(7)


@pytest.mark.parametrize("delta", [1, 2, 3, 6, 10])
def test_g_inverts_gamma_under_divisor_convolution(delta):
    for l in range(1, 150):
        conv = sum(lf.g_weight(d, delta) for d in range(1, l + 1) if l % d == 0)
        assert conv == lf.gamma_weight(l, delta)


def test_ell_local_matches_k_gamma_minus_one():
    for p in (2, 3, 5, 7, 11, 101):
        assert lf.ell_local(p) == lf.K_local(p) * lf.gamma_weight(p) - 1


def test_q_local_specializations():
    for p in (3, 5, 7):
        assert lf.q_local(p, Fraction(1)) == lf.q0_local(p)
        assert lf.q_local(p, Fraction(1, p)) == lf.q1_local(p)


# -- identity suite ----------------------------------------------------------


def test_identity_suite_clean_up_to_2000():
    primes = [int(p) for p in sieve_primes(2000)]
    result = lf.run_identity_suite(primes)
    assert result["checked"] == 303
    assert result["failures"] == []


def test_identity_suite_returns_all_names():
    names = [name for name, _ in lf.local_identity_suite(7)]
    assert names == ["c5c6c8", "c3h", "ayran", "balwn", "sul", "theta_chain", "dsum"]


def test_theta_chain_float_projection_tracks_exact_values():
    from apmlab.verify import _prime_float_parts

    for p in [int(q) for q in sieve_primes(100)]:
        th1, th2, m1, m2, v0 = _prime_float_parts(p)
        r, R, eth1, eth2, em1, em2, _, _, ev0 = lf._theta_chain_parts(p)
        for got, exact in ((th1, eth1), (th2, eth2), (m1, em1), (m2, em2), (v0, ev0)):
            assert got == pytest.approx(float(exact), rel=1e-15, abs=1e-300)
