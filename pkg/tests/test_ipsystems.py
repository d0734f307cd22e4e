import itertools
from fractions import Fraction

import numpy as np
import pytest

from approxlat.errors import UsageError
from approxlat.exactnum import QuadInt, quad_abs_lt
from approxlat.ipsystems import IPSystem, ip_eval, ip_pattern_search, shrunk_scheme, verify_power_containment
from approxlat.patterns import sumset
from approxlat.scheme import Interval, QuadScheme, enumerate_points, in_lambda

Q2 = QuadScheme(2)


def q(m, n=0):
    return QuadInt(m, n, 2)


def test_ip_eval_basics():
    h = q(1, 1)
    sys = IPSystem((h,) * 5)
    assert ip_eval(sys, []) == q(0)
    for alpha in ([1], [2, 4], [1, 2, 3, 4, 5]):
        assert ip_eval(sys, alpha) == h * len(alpha)
    with pytest.raises(UsageError):
        ip_eval(sys, [6])
    with pytest.raises(UsageError):
        IPSystem((q(-1),))


def test_disjoint_additivity_exhaustive():
    gens = tuple(q(k, k % 3) for k in range(1, 7))
    sys = IPSystem(gens)
    # every element of {0, 1, 2}^6 labels a pair of disjoint subsets
    for lab in itertools.product(range(3), repeat=6):
        a = [i + 1 for i, v in enumerate(lab) if v == 1]
        b = [i + 1 for i, v in enumerate(lab) if v == 2]
        assert ip_eval(sys, a + b) == ip_eval(sys, a) + ip_eval(sys, b)


def test_shrunk_sets_nest_and_are_open():
    prev = None
    for n in range(1, 6):
        sh = shrunk_scheme(Q2, n)
        pts = set(enumerate_points(sh.scheme, Interval(200)).points())
        assert all(quad_abs_lt(x.star(), Fraction(1, n)) for x in pts)
        assert q(0) in pts and all(-x in pts for x in pts)
        if prev is not None:
            assert pts <= prev
        prev = pts
    assert q(1) not in set(enumerate_points(shrunk_scheme(Q2, 1).scheme, Interval(10)).points())


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("T", [50, 200])
def test_power_containment(n, T):
    res = verify_power_containment(shrunk_scheme(Q2, n), n, Interval(T))
    assert res.violations == 0 and res.star_violations == 0 and res.n_sums > 0


def test_power_containment_matches_direct_sumset():
    sh = shrunk_scheme(Q2, 3)
    S = sumset(enumerate_points(sh.scheme, Interval(100)), 3)
    assert all(in_lambda(Q2, x) for x in S.points())


def test_ip_search_trivial_pattern():
    P = enumerate_points(Q2, Interval(1000))
    res = ip_pattern_search(P, q(3, 2), [q(0)], 3, scheme=Q2)
    assert res.found and res.j == 1 and res.verified
    inner_first = [x for x in P.points() if x >= res.p0]
    assert inner_first[0] == res.p0


def test_ip_search_hit_is_verified():
    P = enumerate_points(Q2, Interval(1000))
    res = ip_pattern_search(P, q(3, 2), [q(1)], 3, scheme=Q2)
    S = set(P.points())
    assert res.found and res.verified
    assert res.p0 in S and res.p0 + q(3, 2) * res.j in S
    assert res.to_json()["verified"] is True
    neg = ip_pattern_search(P, q(-3, -2), [q(1)], 3, scheme=Q2)
    assert (neg.j, neg.p0) == (res.j, res.p0)


def test_ip_search_absent_and_bad_delta():
    P = enumerate_points(Q2, Interval(1000))
    empty = P.subset(np.zeros(len(P), bool))
    res = ip_pattern_search(empty, q(3, 2), [q(1)], 3, scheme=Q2)
    assert not res.found and "finite-scale" in res.to_json()["scale_note"]
    with pytest.raises(UsageError):
        ip_pattern_search(P, q(1, 1), [q(1)], 3, scheme=Q2)  # |star| = sqrt 2 - 1 > 1/3
