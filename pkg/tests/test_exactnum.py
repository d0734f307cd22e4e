import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from approxlat.errors import SchemeError
from approxlat.exactnum import (PadicRat, QuadInt, as_fraction, check_D, check_p, floor_mul_sqrt, is_squarefree,
                                quad_abs_leq, quad_abs_lt, quad_sign, round_up, sqrt_bounds, vp)

DS = st.sampled_from([2, 3, 5, 6, 7, 10, 13])
ints = st.integers(-10**12, 10**12)
small = st.integers(-10**4, 10**4)


def sign_oracle(a, b, D):
    """Sign of a + b sqrt(D) from a 40-digit isqrt bracket of b sqrt(D)."""
    S = 10**40
    r = math.isqrt(D * b * b * S * S)  # floor(|b| sqrt(D) S)
    lo, hi = (r, r + 1) if b >= 0 else (-r - 1, -r)
    lo, hi = a * S + lo, a * S + hi
    if lo > 0:
        return 1
    if hi < 0:
        return -1
    assert a == 0 and b == 0
    return 0


@given(ints, ints, DS)
def test_quad_sign_matches_isqrt_bracket(a, b, D):
    assert quad_sign(a, b, D) == sign_oracle(a, b, D)


def test_quad_sign_near_pell_units():
    # 577 - 408 sqrt 2 ~ 8.7e-4 and its negative: tiny but nonzero
    assert quad_sign(577, -408, 2) == 1
    assert quad_sign(-577, 408, 2) == -1
    assert quad_sign(665857, -470832, 2) == 1
    assert quad_sign(0, 0, 2) == 0


@given(small, small, small, small, small, small, DS)
def test_ring_laws(a, b, c, d, e, f, D):
    x, y, z = QuadInt(a, b, D), QuadInt(c, d, D), QuadInt(e, f, D)
    assert x + y == y + x
    assert x * y == y * x
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert (x * y).star() == x.star() * y.star()
    assert (x + y).star() == x.star() + y.star()
    assert (x * y).norm() == x.norm() * y.norm()
    assert x - x == QuadInt(0, 0, D)


@given(small, small, DS)
def test_order_is_consistent_with_sign(a, b, D):
    x = QuadInt(a, b, D)
    assert (x > 0) == (x.sign() > 0)
    assert abs(x) >= 0
    assert abs(x) == abs(-x)
    assert x.cmp_rational(x.abs_upper()) <= 0


@given(small, small, DS)
def test_abs_upper_is_an_upper_bound(a, b, D):
    x = QuadInt(a, b, D)
    u = x.abs_upper()
    assert abs(x).cmp_rational(u) <= 0
    assert u - abs(Fraction(float(x))) < Fraction(1, 10**6)


@given(st.integers(-10**9, 10**9), DS)
def test_floor_mul_sqrt(n, D):
    f = floor_mul_sqrt(n, D)
    assert quad_sign(-f, n, D) >= 0  # n sqrt D >= f
    assert quad_sign(-(f + 1), n, D) < 0


def test_sqrt_bounds():
    lo, hi = sqrt_bounds(2)
    assert lo * lo < 2 < hi * hi


@given(small, small, DS, st.fractions(min_value=0, max_value=50, max_denominator=50))
def test_abs_tests_agree_with_order(a, b, D, r):
    x = QuadInt(a, b, D)
    assert quad_abs_leq(x, r) == (abs(x).cmp_rational(r) <= 0)
    assert quad_abs_lt(x, r) == (abs(x).cmp_rational(r) < 0)


def test_validation():
    assert is_squarefree(2) and is_squarefree(30)
    assert not is_squarefree(12) and not is_squarefree(4)
    for bad in (1, 4, 12, 2.0, "2"):
        with pytest.raises(SchemeError):
            check_D(bad)
    assert check_p(7) == 7
    with pytest.raises(SchemeError):
        check_p(9)
    with pytest.raises(TypeError):
        as_fraction(0.5)
    with pytest.raises(SchemeError):
        QuadInt(1, 1, 2) + QuadInt(1, 1, 3)


@given(st.fractions(min_value=-10**6, max_value=10**6))
def test_round_up(r):
    u = round_up(r)
    assert r <= u < r + Fraction(1, 10**9)


# ------------------------------------------------------------------ p-adic

@given(st.integers(-10**6, 10**6), st.integers(0, 12), st.sampled_from([2, 3, 5, 7]))
def test_padic_canonical_and_fraction(a, k, p):
    x = PadicRat(a, k, p)
    assert x.to_fraction() == Fraction(a, p**k)
    assert x.k == 0 or x.a % p != 0
    if a == 0:
        assert x.k == 0 and x.level() is None
    assert PadicRat.from_fraction(x.to_fraction(), p) == x


@given(st.integers(-10**6, 10**6), st.integers(0, 8), st.integers(-10**6, 10**6), st.integers(0, 8),
       st.sampled_from([2, 3, 5]))
def test_padic_arithmetic(a, k, b, l, p):
    x, y = PadicRat(a, k, p), PadicRat(b, l, p)
    assert (x + y).to_fraction() == x.to_fraction() + y.to_fraction()
    assert (x * y).to_fraction() == x.to_fraction() * y.to_fraction()
    assert (x - y).to_fraction() == x.to_fraction() - y.to_fraction()
    if x.a and y.a:
        assert (x * y).val() == x.val() + y.val()
        # ultrametric inequality
        if (x + y).a:
            assert (x + y).val() >= min(x.val(), y.val())


def test_padic_examples():
    assert PadicRat(8, 0, 2).coords() == (8, 0)
    assert PadicRat(8, 3, 2).coords() == (1, 0)
    assert PadicRat(12, 3, 2).coords() == (3, 1)
    assert PadicRat(1, 3, 2).level() == 3
    assert PadicRat(4, 0, 2).level() == -2
    assert PadicRat(0, 5, 2).val() == math.inf
    assert vp(48, 2) == 4
    with pytest.raises(SchemeError):
        PadicRat.from_fraction(Fraction(1, 3), 2)
