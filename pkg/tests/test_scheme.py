from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

import naive
from approxlat.errors import CapacityError, SchemeError, UsageError
from approxlat.exactnum import PadicRat, QuadInt, quad_abs_leq
from approxlat.scheme import (Ball, Interval, PadicPointSet, PadicScheme, QuadPointSet, QuadScheme,
                              enumerate_points, in_lambda, in_lambda_q, in_lambda_q_mask, padic_covering_level,
                              padic_min_gap_level, quad_covering_gap, quad_min_gap, set_cap, verify_axioms)

WINDOWS = [Fraction(1), Fraction(1, 2), Fraction(3, 2), Fraction(5, 3)]


@pytest.mark.parametrize("D", [2, 3, 5])
@pytest.mark.parametrize("w", WINDOWS)
@pytest.mark.parametrize("closed", [True, False])
def test_enumeration_matches_brute_force(D, w, closed):
    s = QuadScheme(D, w, closed)
    P = enumerate_points(s, Interval(40))
    assert P.points() == naive.lam_quad(D, w, 40, closed)


def test_small_counts():
    s = QuadScheme(2)
    assert len(enumerate_points(s, Interval(10))) == 15
    assert enumerate_points(s, Interval(0)).rows() == [(0, 0)]
    assert len(enumerate_points(PadicScheme(2, 1), Ball(3))) == 17


def test_open_window_excludes_boundary():
    # with w = 1 the only boundary points are the integers +-1 (|star| = 1 exactly)
    closed = enumerate_points(QuadScheme(2, 1, True), Interval(30))
    opened = enumerate_points(QuadScheme(2, 1, False), Interval(30))
    diff = set(closed.points()) - set(opened.points())
    assert diff == {QuadInt(1, 0, 2), QuadInt(-1, 0, 2)}


@pytest.mark.parametrize("p", [2, 3, 5])
@pytest.mark.parametrize("w", [Fraction(1), Fraction(1, 2), Fraction(7, 3)])
@pytest.mark.parametrize("level", [-2, 0, 1, 4])
def test_padic_enumeration_matches_brute_force(p, w, level):
    P = enumerate_points(PadicScheme(p, w), Ball(level))
    assert P.points() == naive.lam_padic(p, w, level)


def test_padic_count_law():
    for n in range(1, 13):
        assert len(enumerate_points(PadicScheme(2, 1), Ball(n))) == 2 * 2**n + 1


@given(st.integers(-2000, 2000), st.integers(-2000, 2000))
def test_index_membership_matches_set(m, n):
    s = QuadScheme(2)
    P = enumerate_points(s, Interval(500))
    S = set(P.points())
    x = QuadInt(m, n, 2)
    assert P.contains(x) == (x in S)
    assert P.contains(x) == (quad_abs_leq(x, 500) and in_lambda(s, x))


def test_sorted_and_symmetric():
    s = QuadScheme(3, Fraction(2))
    P = enumerate_points(s, Interval(300))
    pts = P.points()
    assert all(a < b for a, b in zip(pts, pts[1:]))
    assert P.negate() == P
    assert QuadInt(0, 0, 3) in P


def test_large_centre_uses_exact_fallback():
    s = QuadScheme(2)
    c = QuadInt(10**13, 7 * 10**12, 2)
    P = enumerate_points(s, Interval(50, c))
    assert 60 <= len(P) <= 82
    for x in P.points():
        assert in_lambda(s, x) and quad_abs_leq(x - c, 50)


def test_in_lambda_q():
    s = QuadScheme(2)
    x = QuadInt(1, 1, 2)  # star = 1 - sqrt 2
    assert in_lambda(s, x)
    y = QuadInt(3, 2, 2)  # star = 3 - 2 sqrt 2
    assert in_lambda_q(s, y, 1)
    z = QuadInt(1, 2, 2)  # |star| = 2 sqrt 2 - 1 ~ 1.83
    assert not in_lambda(s, z) and in_lambda_q(s, z, 2)
    P = enumerate_points(s.with_window(3), Interval(100))
    mask = in_lambda_q_mask(s, P, 2)
    assert list(mask) == [in_lambda_q(s, x, 2) for x in P.points()]
    ps = PadicScheme(2, 1)
    assert in_lambda_q(ps, PadicRat(3, 1, 2), 2) and not in_lambda(ps, PadicRat(3, 1, 2))


def test_regions():
    iv = Interval(10, QuadInt(1, 1, 2))
    assert iv.measure() == 20
    assert iv.contains(QuadInt(5, 1, 2)) and not iv.contains(QuadInt(12, 1, 2))
    with pytest.raises(UsageError):
        Interval(1).shrink(2)
    b = Ball(2)
    assert b.measure(3) == 9
    assert b.contains(PadicRat(1, 2, 2)) and not b.contains(PadicRat(1, 3, 2))
    assert b.shrink(1) == Ball(1)


def test_scheme_validation():
    with pytest.raises(SchemeError):
        QuadScheme(4)
    with pytest.raises(SchemeError):
        PadicScheme(6, 1)
    with pytest.raises((SchemeError, UsageError)):
        QuadScheme(2, Fraction(-1))


def test_capacity_guard():
    set_cap(1000)
    try:
        with pytest.raises(CapacityError):
            enumerate_points(QuadScheme(2), Interval(10**5))
    finally:
        set_cap(None)


def test_gaps():
    P = enumerate_points(QuadScheme(2), Interval(200))
    assert quad_min_gap(P) == QuadInt(1, 0, 2)
    assert quad_covering_gap(P) == QuadInt(1, 1, 2)
    L = enumerate_points(PadicScheme(2, 1), Ball(8))
    assert padic_min_gap_level(L) == -1
    assert padic_covering_level(L, Ball(8)) == -1


def test_axioms_quadratic_small():
    rep = verify_axioms(QuadScheme(2), Interval(200), 10)
    assert rep.symmetric and rep.contains_zero
    assert set(rep.approx_correction_set) <= {QuadInt(k, 0, 2) for k in (-1, 0, 1)}
    assert rep.uncovered_sums == 0 and rep.mult_closed_violations == 0
    assert rep.mult_products_checked > 0


def test_axioms_padic():
    rep = verify_axioms(PadicScheme(2, 1), Ball(8), 0)
    assert rep.symmetric and rep.contains_zero
    assert {x.to_fraction() for x in rep.approx_correction_set} <= {-1, 0, 1}
    assert rep.mult_closed_violations == 0 and rep.uncovered_sums == 0


def test_translate_and_subset():
    P = enumerate_points(QuadScheme(2), Interval(50))
    g = QuadInt(3, 1, 2)
    Q = P.translate(g)
    assert Q.points() == [x + g for x in P.points()]
    sub = P.subset(np.arange(len(P)) % 2 == 0)
    assert sub.issubset(P)
    Pp = enumerate_points(PadicScheme(3, 1), Ball(2))
    h = PadicRat(1, 3, 3)
    assert Pp.translate(h).points() == [x + h for x in Pp.points()]
