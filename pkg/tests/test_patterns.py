from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

import naive
from approxlat import _kernels as K
from approxlat.density import SubsetSpec, subset_generate
from approxlat.errors import UsageError
from approxlat.exactnum import PadicRat, QuadInt, quad_abs_leq
from approxlat.patterns import (Endo, PatternQuery, ap_scan, endo_check, find_base_points, gap_set,
                                multi_recurrence_scan, recheck, sumset, syndeticity, syndeticity_trend)
from approxlat.scheme import (Ball, Interval, PadicPointSet, PadicScheme, QuadPointSet, QuadScheme,
                              enumerate_points, in_lambda_q)

Q2 = QuadScheme(2)
P2 = PadicScheme(2, 1)


def q(m, n=0):
    return QuadInt(m, n, 2)


def naive_rows(P, lams, inner_half, disp_fn):
    inner = (lambda x: quad_abs_leq(x, inner_half)) if not isinstance(inner_half, Ball) else inner_half.contains
    return [(lam.coords(), c) for lam, c in naive.gap_rows(P.points(), inner, lams.points(), disp_fn)]


def bern(P, seed, theta=Fraction(1, 2)):
    return subset_generate(P, SubsetSpec(kind="bernoulli", theta=theta, seed=seed))


def test_frozen_base_count_one_plus_sqrt2():
    # oracle value from the naive double-membership loop, inner |x| <= 990
    P = enumerate_points(Q2, Interval(1000))
    bases = find_base_points(P, q(1, 1), PatternQuery(F=(q(1),)), inner=Interval(990))
    assert len(bases) == 1113


def test_frozen_padic_progression_count():
    # naive four-membership loop: x, x + l, x + 2l, x + 3l in Λ_2 ∩ F_10, l = 1/4
    P = enumerate_points(P2, Ball(10))
    lam = PadicPointSet.from_points(2, [PadicRat(1, 2, 2)])
    rep = ap_scan(P, lam, 3)
    assert int(rep.base_counts[0]) == 1281


def test_zero_pattern_returns_inner_points():
    P = enumerate_points(Q2, Interval(200))
    bases = find_base_points(P, q(3, 2), PatternQuery(F=(q(0),)), inner=Interval(150))
    assert bases == [x for x in P.points() if quad_abs_leq(x, 150)]
    bases0 = find_base_points(P, q(0), PatternQuery(F=(q(1), q(1, 1))), inner=Interval(150))
    assert bases0 == [x for x in P.points() if quad_abs_leq(x, 150)]


def test_empty_P_gives_empty_reports():
    P = enumerate_points(Q2, Interval(200))
    E = bern(P, 0).subset(np.zeros(len(bern(P, 0)), bool))
    lams = enumerate_points(Q2, Interval(20))
    assert gap_set(E, lams, PatternQuery(F=(q(1),))).empty
    assert ap_scan(E, lams, 2).empty


@pytest.mark.parametrize("seed", range(4))
def test_gap_set_matches_naive(seed):
    rng = np.random.default_rng(seed)
    P = bern(enumerate_points(Q2, Interval(300)), seed)
    lams = enumerate_points(Q2, Interval(15))
    F = (q(int(rng.integers(1, 3))), q(int(rng.integers(-2, 3)), 1))
    rep = gap_set(P, lams, PatternQuery(F=F), inner=Interval(200))
    assert rep.rows() == naive_rows(P, lams, 200, lambda lam: [lam * f for f in F])


@pytest.mark.parametrize("r", [1, 2, 3])
def test_ap_scan_matches_naive(r):
    P = bern(enumerate_points(Q2, Interval(300)), 11)
    lams = enumerate_points(Q2, Interval(20))
    rep = ap_scan(P, lams, r, inner=Interval(200))
    assert rep.rows() == naive_rows(P, lams, 200, lambda lam: [lam * k for k in range(1, r + 1)])


def test_ap_scan_padic_matches_naive():
    P = bern(enumerate_points(P2, Ball(8)), 2)
    lams = enumerate_points(P2, Ball(3))
    rep = ap_scan(P, lams, 3)
    assert rep.rows() == naive_rows(P, lams, Ball(8), lambda lam: [lam * k for k in (1, 2, 3)])


def test_ap_scan_r1_full_lambda_saturates():
    P = enumerate_points(Q2, Interval(500))
    lams = enumerate_points(Q2, Interval(20))
    rep = ap_scan(P, lams, 1)
    assert all(c > 0 for c in rep.base_counts)


def test_multirec_matches_naive_and_dilation():
    P = bern(enumerate_points(Q2, Interval(1000)), 7)
    lams = enumerate_points(Q2, Interval(50))
    endos = [Endo.mult_by(q(1)), Endo.mult_by(q(1, 1))]
    rep = multi_recurrence_scan(P, lams, endos, 1, scheme=Q2, inner=Interval(800))
    assert rep.rows() == naive_rows(P, lams, 800, lambda lam: [lam, lam * q(1, 1)])
    dil = gap_set(P, lams, PatternQuery(F=(q(1), q(1, 1))), inner=Interval(800))
    assert dil.rows() == rep.rows()


def test_multirec_int_scale_equals_ap_scan():
    for seed in range(10):
        P = bern(enumerate_points(Q2, Interval(300)), seed)
        lams = enumerate_points(Q2, Interval(25))
        a = multi_recurrence_scan(P, lams, [Endo.int_scale(1)], 1, scheme=Q2)
        b = ap_scan(P, lams, 1, scheme=Q2)
        assert a.rows() == b.rows()


def test_multirec_zero_lambda():
    P = bern(enumerate_points(Q2, Interval(300)), 1)
    lams = QuadPointSet.from_points(2, [q(0)])
    rep = multi_recurrence_scan(P, lams, [Endo.mult_by(q(1, 1)), Endo.mult_by(q(3, 2))], 1, scheme=Q2,
                                inner=Interval(250))
    assert rep.base_counts[0] == sum(1 for x in P.points() if quad_abs_leq(x, 250))


def test_endo_check():
    lams = enumerate_points(Q2, Interval(100))
    for k in (1, 2, 3):
        assert endo_check(Endo.int_scale(k), lams, k, Q2).ok
    assert not endo_check(Endo.int_scale(3), lams, 2, Q2).ok
    assert endo_check(Endo.mult_by(q(1, 1)), lams, 1, Q2).ok
    bad = endo_check(Endo.mult_by(q(1, 2)), lams, 1, Q2)
    assert not bad.ok
    assert not in_lambda_q(Q2, bad.violator * q(1, 2), 1)
    with pytest.raises(UsageError):
        multi_recurrence_scan(enumerate_points(Q2, Interval(300)), lams, [Endo.mult_by(q(1, 2))], 1, scheme=Q2)


def test_margin_violation():
    P = enumerate_points(Q2, Interval(100))
    lams = enumerate_points(Q2, Interval(30))
    with pytest.raises(UsageError):
        ap_scan(P, lams, 3, inner=Interval(50))
    with pytest.raises(UsageError):
        ap_scan(P, enumerate_points(Q2, Interval(60)), 3)


def test_margin_safety_enlarging_region():
    lams = enumerate_points(Q2, Interval(20))
    small = bern(enumerate_points(Q2, Interval(300)), 3)
    big = bern(enumerate_points(Q2, Interval(900)), 3)
    a = ap_scan(small, lams, 2, inner=Interval(200))
    b = ap_scan(big, lams, 2, inner=Interval(200))
    assert a.rows() == b.rows()


def test_recheck_and_full_recount():
    P = bern(enumerate_points(Q2, Interval(300)), 5)
    lams = enumerate_points(Q2, Interval(20))
    rep = ap_scan(P, lams, 2)
    checked, failures = recheck(rep, P, full=True)
    assert failures == 0 and checked == len(rep.gap_points)
    rep.witnesses[0] = q(10**6)
    rep.base_counts[0] = max(1, rep.base_counts[0])
    assert recheck(rep, P)[1] >= 1


@pytest.mark.skipif(not K.HAVE_NUMBA, reason="needs numba")
def test_backends_agree_on_scans():
    P = bern(enumerate_points(Q2, Interval(2000)), 9)
    lams = enumerate_points(Q2, Interval(60))
    rows = {}
    for b in ("numba", "numpy"):
        K.set_backend(b)
        try:
            rows[b] = ap_scan(P, lams, 3).rows()
        finally:
            K.set_backend("numba")
    assert rows["numba"] == rows["numpy"]


def test_worker_count_does_not_change_rows():
    P = bern(enumerate_points(Q2, Interval(1000)), 9)
    lams = enumerate_points(Q2, Interval(40))
    out = []
    for b in ("numpy", "numba") if K.HAVE_NUMBA else ("numpy",):
        for w in (1, 3):
            K.set_backend(b)
            K.set_workers(w)
            out.append(ap_scan(P, lams, 2).rows())
    K.set_workers(1)
    K.set_backend("numba" if K.HAVE_NUMBA else "numpy")
    assert all(o == out[0] for o in out)


# --------------------------------------------------------------- sumsets

def test_sumset_basics():
    two = QuadPointSet.from_points(2, [q(0), q(1)])
    assert sumset(two, 1) == two
    assert [x.coords() for x in sumset(two, 2).points()] == [(0, 0), (1, 0), (2, 0)]


@pytest.mark.parametrize("k", [2, 3])
def test_sumset_matches_naive_and_is_symmetric(k):
    P = enumerate_points(Q2, Interval(30))
    S = sumset(P, k)
    assert set(S.points()) == naive.sumset(P.points(), k)
    assert S.negate() == S
    assert set(P.points()) <= set(sumset(P, 2).points())


def test_padic_sumset():
    P = enumerate_points(P2, Ball(2))
    S = sumset(P, 2)
    assert set(S.points()) == naive.sumset(P.points(), 2)


# ------------------------------------------------------------ syndeticity

def test_syndeticity_full_and_empty():
    lams = enumerate_points(Q2, Interval(50))
    rep = syndeticity(lams, lams, 5)
    assert rep.rows[0].covering_radius == q(0) and rep.K_candidate == [q(0)]
    empty = lams.subset(np.zeros(len(lams), bool))
    assert syndeticity(empty, lams, 5).rows[0].infinite


def test_syndeticity_even_congruence():
    # oracle: nearest-even scan over the inner region gives radius 1
    lams = enumerate_points(Q2, Interval(50))
    S = subset_generate(lams, SubsetSpec(kind="congruence", modulus=2, residues=(0,)))
    rep = syndeticity(S, lams, 5)
    assert rep.rows[0].covering_radius == naive.nearest_cover_radius(
        S.points(), lams.points(), lambda x: quad_abs_leq(x, 45)) == q(1)
    assert set(rep.K_candidate) <= {q(0), q(1), q(-1)}


@given(st.integers(0, 10**6))
def test_syndeticity_matches_naive(seed):
    lams = enumerate_points(Q2, Interval(30))
    S = bern(lams, seed, Fraction(1, 3))
    if len(S) == 0:
        return
    rep = syndeticity(S, lams, 3)
    want = naive.nearest_cover_radius(S.points(), lams.points(), lambda x: quad_abs_leq(x, 27))
    assert rep.rows[0].covering_radius == want
    # K_candidate covers the inner region
    Sset = set(S.points())
    for lam in lams.points():
        if quad_abs_leq(lam, 27):
            assert any((lam - k) in Sset for k in rep.K_candidate)


def test_syndeticity_trend_for_full_gap_set():
    lams = enumerate_points(Q2, Interval(30))
    items = []
    for T in (250, 500, 1000):
        P = enumerate_points(Q2, Interval(T))
        rep = gap_set(P, lams, PatternQuery(F=(q(1),)))
        items.append((T, lams.subset(rep.base_counts > 0), lams, 3))
    radii = [r.covering_radius for r in syndeticity_trend(items).rows]
    assert all(b <= a for a, b in zip(radii, radii[1:]))


def test_padic_syndeticity():
    lams = enumerate_points(P2, Ball(4))
    rep = syndeticity(lams, lams, 0)
    assert rep.rows[0].covering_radius is None
    ints = PadicPointSet.from_points(2, [x for x in lams.points() if x.k == 0])
    r2 = syndeticity(ints, lams, 0)
    # non-integers a/2^k are at distance 2^k from Z, worst k = 4
    assert r2.rows[0].covering_radius == 4
