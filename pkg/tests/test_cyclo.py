"""Exact cyclotomic arithmetic."""

from math import gcd

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rubinstark.cyclo import CycloField, cyclotomic_poly
from rubinstark.rationals import Q


def coeffs(p):
    return [int(c) if c.denominator == 1 else c for c in p]


def test_cyclotomic_polynomials_known():
    assert coeffs(cyclotomic_poly(1)) == [-1, 1]
    assert coeffs(cyclotomic_poly(2)) == [1, 1]
    assert coeffs(cyclotomic_poly(3)) == [1, 1, 1]
    assert coeffs(cyclotomic_poly(4)) == [1, 0, 1]
    assert coeffs(cyclotomic_poly(6)) == [1, -1, 1]
    assert coeffs(cyclotomic_poly(12)) == [1, 0, -1, 0, 1]
    # degree = phi(m)
    for m in range(1, 30):
        phi = sum(1 for k in range(1, m + 1) if gcd(k, m) == 1)
        assert len(cyclotomic_poly(m)) - 1 == phi


def test_zeta_order():
    for m in (1, 2, 3, 4, 6, 8, 12):
        F = CycloField(m)
        z = F.zeta()
        acc = F.one()
        for k in range(1, m + 1):
            acc = acc * z
            if k < m:
                assert acc != F.one(), (m, k)
        assert acc == F.one()


def test_geometric_sum_vanishes():
    # 1 + zeta + ... + zeta^{m-1} = 0 for m > 1
    for m in (2, 3, 4, 5, 6, 12):
        F = CycloField(m)
        total = F.zero()
        for j in range(m):
            total = total + F.zeta(j)
        assert total.is_zero()


def test_rational_detection():
    F = CycloField(5)
    assert F.rational(Q(3, 2)).is_rational()
    assert not F.zeta().is_rational()
    # zeta5 + zeta5^2 + zeta5^3 + zeta5^4 = -1
    s = F.zeta(1) + F.zeta(2) + F.zeta(3) + F.zeta(4)
    assert s.rational_value() == Q(-1)


def test_inverse():
    F = CycloField(12)
    x = F.zeta(5) + F.rational(3) - F.zeta(2) * Q(7, 2)
    inv = x.inverse()
    assert (x * inv) == F.one()
    with pytest.raises(ZeroDivisionError):
        F.zero().inverse()


def test_galois_and_conj():
    F = CycloField(7)
    z = F.zeta()
    assert z.galois(2) == F.zeta(2)
    assert z.conj() == F.zeta(6)
    x = F.zeta(3) + F.rational(2)
    # conj is an involution and a ring map
    assert x.conj().conj() == x
    y = F.zeta(5) * Q(2) - F.one()
    assert (x * y).conj() == x.conj() * y.conj()
    with pytest.raises(ValueError):
        F.zeta().galois(7)


def test_numeric_agrees_with_exp():
    F = CycloField(5)
    z = F.zeta(2).numeric(dps=60)
    with mp.workdps(60):
        ref = mp.expjpi(mp.mpf(4) / 5)
        assert abs(z - ref) < mp.mpf(10) ** -55


@settings(max_examples=50)
@given(
    st.sampled_from([3, 4, 5, 6, 8, 12]),
    st.lists(st.integers(-5, 5), min_size=2, max_size=4),
    st.lists(st.integers(-5, 5), min_size=2, max_size=4),
)
def test_ring_axioms_and_numeric_homomorphism(m, ac, bc):
    F = CycloField(m)
    a = F.from_coeffs([Q(x) for x in ac[: F.degree]])
    b = F.from_coeffs([Q(x) for x in bc[: F.degree]])
    assert a * b == b * a
    assert (a + b) * (a - b) == a * a - b * b
    with mp.workdps(40):
        lhs = (a * b).numeric(40)
        rhs = a.numeric(40) * b.numeric(40)
        assert abs(lhs - rhs) < mp.mpf(10) ** -30
