"""Euler-product constants: frozen values, identities, assembled coefficients.

The frozen literals below were produced by an independent route (direct prime
sums to 2e6 plus literature anchors for the Artin and twin-prime constants)
and pin the accelerated prime-zeta evaluation at 1e-12 or better.
"""

import math
from fractions import Fraction

import pytest

from apmlab import constants as cst
from apmlab.localfactors import V_local, q0_local, r_local
from apmlab.sieve import sieve_primes

FROZEN = {
    "C3": 0.37395581361920227,  # Artin's constant
    "C5": 0.6601618158468696,  # twin-prime constant
    "C6": 0.5836174737845313,
    "C8": 2.5955016704944316,
    "UP": 1.9435964368207592,  # zeta(2)zeta(3)/zeta(6)
    "H1": 2.6741127255700214,  # 1/C3
    "QP0": 0.9706029389397438,
    "QP1": 1.7134510958271871,
    "VP0": 3.5703561203579968,
    "KP2": 1.1311549867860844,
}


def test_factor_id_registry_is_complete():
    assert set(FROZEN) <= set(cst.FACTOR_IDS)
    assert "QP1" in cst.FACTOR_IDS


@pytest.mark.parametrize("factor_id", sorted(FROZEN))
def test_accelerated_products_match_frozen_values(factor_id):
    got = cst.euler_product(factor_id)
    assert got.value == pytest.approx(FROZEN[factor_id], rel=1e-12)
    assert got.tail_bound < 1e-14
    assert got.factor_id == factor_id


@pytest.mark.parametrize("factor_id", ["C3", "C8", "UP", "KP2"])
def test_direct_prime_products_converge_to_accelerated(factor_id):
    primes = sieve_primes(1_000_000)
    accel = cst.euler_product(factor_id).value
    direct_big = cst.direct_product(factor_id, primes)
    direct_small = cst.direct_product(factor_id, primes[primes <= 10_000])
    assert direct_big == pytest.approx(accel, rel=2e-6)
    assert abs(direct_big - accel) < abs(direct_small - accel)


def test_product_cancellation_identities():
    assert cst.c5() * cst.c6() * cst.c8() == pytest.approx(1.0, abs=1e-14)
    assert cst.c3() * cst.h1() == pytest.approx(1.0, abs=1e-14)
    assert cst.euler_product("QP1").value ** 2 == pytest.approx(
        cst.c8() * cst.euler_product("KP2").value, rel=1e-14
    )


def test_up_equals_zeta_ratio():
    zeta_ratio = cst.zeta_at(2) * cst.zeta_at(3) / cst.zeta_at(6)
    assert cst.z_prod() == pytest.approx(zeta_ratio, rel=1e-12)
    assert cst.u_at_1() == cst.z_prod()


def test_mertens_style_assemblies():
    assert cst.s_pp() == pytest.approx(0.755366610831688, abs=1e-13)
    assert cst.c2() == pytest.approx(3.170459342142566, abs=1e-12)
    assert cst.c2() == pytest.approx(math.log(2 * math.pi) + cst.gamma0 + cst.s_pp(), abs=1e-15)
    assert cst.z_res() == pytest.approx(1.3317593979775448, abs=1e-13)
    assert cst.s_script() == pytest.approx(0.5485275031953778, abs=1e-12)


def test_z_two_routes_agree():
    # closed form vs zeta'(0)/zeta(0) - digamma(5) + 1
    assert abs(cst.z_res() - cst.z_bc()) < 1e-12


def test_h1_prime_sign_and_scale():
    assert cst.h1_prime() == pytest.approx(-cst.h1() * cst.s_pp(), rel=1e-15)


def test_lemma_coefficients_closed_forms():
    co = cst.lemma_coefficients()
    u1 = cst.u_at_1()
    assert co.a == 1.0 / 30.0
    assert co.b == co.c == -1.0 / 12.0
    assert co.beta == -1.0 / 12.0
    assert co.alpha == u1 / 30.0
    assert co.A == u1 / 3.0
    assert co.B == -0.5
    assert co.C == 1.0 - cst.c2()
    assert co.C2 == cst.c2()
    assert co.Z_res == cst.z_res()
    assert co.alpha1 == cst.h1()
    assert co.alpha2 == cst.h1() / 2.0
    # gamma = beta (Z_res + S_pp) - 1/24 ties the X^4 weight to C2 - log(2 pi):
    assert 12.0 * co.gamma - 5.0 * co.beta == pytest.approx(1.0 - co.C2 + co.b, abs=1e-14)
    assert co.gamma == pytest.approx(co.beta * (co.Z_res + cst.s_pp()) - 1.0 / 24.0, abs=1e-15)


def test_modulus_local_divisions():
    q6 = cst.q1_value(6)
    expected = cst.q1_value(1) / float((1 + r_local(2) / 2) * (1 + r_local(3) / 3))
    assert q6 == pytest.approx(expected, rel=1e-15)
    assert cst.q0_reg(2) == pytest.approx(cst.q0_reg(1) / float(q0_local(2)), rel=1e-15)
    # r(2) = 0 makes the p = 2 factors of the 0-regularized products trivial
    assert cst.v0_reg(2) == pytest.approx(
        cst.v0_reg(1) / float(V_local(2, Fraction(1))), rel=1e-15
    )
    assert float(V_local(2, Fraction(1))) == 1.0
    assert cst.v0_reg(2) == cst.v0_reg(1)


def test_k_reg_multiplicative_structure():
    # gcd(d, delta) overlap removes the K_local factor but keeps the division
    assert cst.k_reg_1(2, 2) == pytest.approx(cst.k_reg_1(1, 2) / 2.0, rel=1e-14)
    assert cst.k_reg_1(1, 1) == pytest.approx(cst.euler_product("KP2").value, rel=1e-15)


def test_z_of_modulus_shifts_by_log_p():
    base = cst.z_of_modulus(1)
    r3 = r_local(3)
    assert cst.z_of_modulus(3) - base == pytest.approx(
        float(r3 / (1 + r3)) * math.log(3), abs=1e-15
    )
    assert cst.z_of_modulus(2) == base  # r(2) = 0
