"""Finitely additive IP systems, shrunk-window sets and the search for a
pattern p0 + j*delta*F inside a positive-density subset.

The shrunk-window set of order n uses the open window of half-width w/n, so
any n-fold sum of its points has |star| < w and lies in the original set.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import UsageError
from .exactnum import QuadInt, quad_abs_lt
from .patterns import PatternQuery, _scan, _query_maps, _singleton, _bases_for, max_displacement, _quad_disp
from .scheme import (Interval, QuadPointSet, QuadScheme, enumerate_points, in_lambda, lambda_covering_bound)


@dataclass(frozen=True)
class IPSystem:
    """phi(alpha) = sum of h_k over k in alpha, alpha a subset of {1..n}."""

    generators: tuple

    def __post_init__(self):
        if not self.generators:
            raise UsageError("an IP system needs n >= 1 generators")
        for h in self.generators:
            if not h > 0:
                raise UsageError(f"generator {h} must be positive")

    @property
    def n(self) -> int:
        return len(self.generators)


def ip_eval(system: IPSystem, alpha) -> object:
    total = system.generators[0] * 0
    for k in alpha:
        if not 1 <= k <= system.n:
            raise UsageError(f"index {k} outside 1..{system.n}")
        total = total + system.generators[k - 1]
    return total


@dataclass(frozen=True)
class ShrunkScheme:
    base: QuadScheme
    n: int

    @property
    def scheme(self) -> QuadScheme:
        return self.base.with_window(self.base.w / self.n, closed=False)

    def contains(self, x: QuadInt) -> bool:
        return quad_abs_lt(x.star(), self.base.w / self.n)


def shrunk_scheme(base: QuadScheme, n: int) -> ShrunkScheme:
    if n < 1:
        raise UsageError("n must be >= 1")
    return ShrunkScheme(base, int(n))


@dataclass
class PowerContainment:
    n_sums: int
    violations: int
    star_violations: int


def verify_power_containment(shrunk: ShrunkScheme, n: int, region: Interval) -> PowerContainment:
    """Enumerate the n-fold sumset of the shrunk set in the region and test each
    sum against the base set (and against the strict star bound |star| < w)."""
    from .patterns import sumset
    pts = enumerate_points(shrunk.scheme, region)
    S = sumset(pts, n)
    base = shrunk.base
    viol = star_viol = 0
    for x in S.points():
        if not in_lambda(base, x):
            viol += 1
        if not quad_abs_lt(x.star(), base.w):
            star_viol += 1
    return PowerContainment(len(S), viol, star_viol)


@dataclass
class IPResult:
    found: bool
    delta: QuadInt
    j: int | None = None
    p0: QuadInt | None = None
    verified: bool = False
    scale_note: str = ""

    def to_json(self) -> dict:
        if not self.found:
            return {"found": False, "scale_note": self.scale_note}
        return {"delta": list(self.delta.coords()), "j": self.j, "p0": list(self.p0.coords()),
                "verified": self.verified}


def ip_pattern_search(P_o: QuadPointSet, delta: QuadInt, F, n: int, *, scheme: QuadScheme | None = None) -> IPResult:
    """Smallest j in 1..n, then smallest p0 in P_o, with p0 + j*delta*f in P_o for all f in F."""
    if n < 1:
        raise UsageError("n must be >= 1")
    if scheme is not None and not quad_abs_lt(delta.star(), scheme.w / n):
        raise UsageError(f"delta={delta} is not in the shrunk-window set of order {n}")
    if delta.sign() == 0:
        raise UsageError("delta must be nonzero")
    if delta.sign() < 0:
        delta = -delta  # the shrunk set is symmetric
    query = PatternQuery(F=tuple(F))
    # one inner region for every j, sized by the largest displacement n*delta*F
    lams = QuadPointSet(P_o.D, [[(k * delta).m, (k * delta).n] for k in range(1, n + 1)])
    dm, dn = _quad_disp(lams, _query_maps(query, None, None))
    M = max_displacement(dm, dn, P_o.D)
    cov = lambda_covering_bound(scheme) if scheme is not None else Fraction(0)
    inner = P_o.region.shrink(M + cov)
    members = set(P_o.points())
    for j in range(1, n + 1):
        lam = j * delta
        rep = _scan(P_o, _singleton(P_o, lam), _query_maps(query, None, None), scheme, inner,
                    query.describe(), "ip")
        if rep.base_counts[0] > 0:
            bases = _bases_for(P_o, inner, rep.displacements[0])
            p0 = bases[0]
            ok = p0 in members and all((p0 + lam * f) in members for f in query.F)
            return IPResult(True, delta, j, p0, ok)
    return IPResult(False, delta, scale_note=(f"no j in 1..{n} works inside |x| <= {inner.half}; "
                                              "a finite-scale verdict only"))
