"""Finite-scale diagnostics of the hull: difference sets, separation of
difference sets from the iterated sumset near 0, patch statistics and the
mass of disjoint thickenings.

P - P stands in for the set of return times of the canonical cross-section:
it contains that set, so separation shown for P - P also holds for it.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels as K
from .errors import CapacityError, UsageError
from .exactnum import PadicRat, QuadInt, as_fraction, quad_sign, vp
from .scheme import (Ball, Interval, PadicPointSet, PadicScheme, PointSet, QuadPointSet, QuadScheme,
                     _int_array, _unique_rows, enumerate_points, exact_extreme, get_cap, quad_min_gap)


# ------------------------------------------------------------ difference sets

@dataclass
class DiffSet:
    base: PointSet
    differences: PointSet
    order: int
    radius: object

    label = "difference-set upper bound for return times"

    def __len__(self) -> int:
        return len(self.differences)


def _quad_near_pairs(P: QuadPointSet, radius: Fraction) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs i < j with x_j - x_i <= radius."""
    hi = K.window_hi(P.m, P.n, P.D, radius.numerator, radius.denominator)
    counts = hi - np.arange(len(P))
    total = int(counts.sum())
    if total > get_cap():
        raise CapacityError(f"{total} near pairs exceed the capacity cap")
    i = np.repeat(np.arange(len(P)), counts)
    starts = np.repeat(np.cumsum(counts) - counts, counts)
    j = i + 1 + (np.arange(total) - starts)
    return i, j


def _quad_diffs(P: QuadPointSet, radius: Fraction) -> QuadPointSet:
    if len(P) == 0:
        return QuadPointSet(P.D, np.zeros((0, 2), np.int64), Interval(radius))
    i, j = _quad_near_pairs(P, radius)
    d = P.coords[j] - P.coords[i]
    z = np.zeros((1, 2), dtype=d.dtype)
    rows = _unique_rows(np.concatenate([d, -d, z]))
    return QuadPointSet(P.D, rows, Interval(radius), unique=True)


def _padic_diffs(P: PadicPointSet, radius: int) -> PadicPointSet:
    """All x - y with |x - y|_p <= p**radius."""
    E = max(P.exp, radius)
    a = P.lift(E).a.astype(object)
    mod = P.p ** (E - radius)
    classes: dict = {}
    for v in a.tolist():
        classes.setdefault(v % mod, []).append(v)
    total = sum(len(c) ** 2 for c in classes.values())
    if total > get_cap():
        raise CapacityError(f"{total} pairs exceed the capacity cap")
    parts = []
    for c in classes.values():
        arr = _int_array(np.array(c, dtype=object))
        parts.append((arr[:, None] - arr[None, :]).ravel())
    vals = np.concatenate(parts) if parts else np.zeros(0, np.int64)
    return PadicPointSet(P.p, vals, E, Ball(radius))


def difference_set(P: PointSet, radius, order: int = 1) -> DiffSet:
    """Pairwise differences of P of size at most ``radius``: archimedean
    magnitude for the quadratic scheme, p-adic ball level for the p-adic one.
    Order 2 takes differences of the full order-1 set."""
    if order not in (1, 2):
        raise UsageError("order must be 1 or 2")
    if isinstance(P, QuadPointSet):
        r = as_fraction(radius)
        if r < 0:
            raise UsageError("radius must be non-negative")
        base = P
        if order == 2:
            full = _full_radius(P)
            base = _quad_diffs(P, full)
        return DiffSet(P, _quad_diffs(base, r), order, r)
    r = int(radius)
    base = P
    if order == 2:
        lvl = P.region.level if P.region is not None else P.exp
        base = _padic_diffs(P, max(lvl, P.exp))
    return DiffSet(P, _padic_diffs(base, r), order, r)


def _full_radius(P: QuadPointSet) -> Fraction:
    if len(P) < 2:
        return Fraction(0)
    d = QuadInt(int(P.m[-1] - P.m[0]), int(P.n[-1] - P.n[0]), P.D)
    return Fraction(math.ceil(d.abs_upper()))


# ----------------------------------------------------------------- separation

@dataclass
class SeparationResult:
    ok: bool
    max_admissible_radius: object
    witness: object
    norm_bound: object = None

    def to_dict(self) -> dict:
        def enc(v):
            if isinstance(v, (QuadInt, PadicRat)):
                return list(v.coords())
            if isinstance(v, Fraction):
                return [v.numerator, v.denominator]
            return v
        return {"ok": self.ok, "max_admissible_radius": enc(self.max_admissible_radius),
                "witness": enc(self.witness), "norm_bound": enc(self.norm_bound)}


def _quad_min_near_zero(Xi: QuadPointSet, G: QuadPointSet, R: Fraction):
    """Smallest nonzero |xi - g| <= R over xi in Xi, g in G (both sorted)."""
    if len(Xi) == 0 or len(G) == 0:
        return None
    gx = G.values()
    slack = 1e-6 * (1 + float(np.abs(gx).max()))
    xv = Xi.values()
    lo = np.searchsorted(gx, xv - float(R) - slack, side="left")
    hi = np.searchsorted(gx, xv + float(R) + slack, side="right")
    counts = hi - lo
    total = int(counts.sum())
    if total > get_cap():
        raise CapacityError("separation scan exceeds the capacity cap")
    if total == 0:
        return None
    xi = np.repeat(np.arange(len(Xi)), counts)
    starts = np.repeat(np.cumsum(counts) - counts, counts)
    gi = np.repeat(lo, counts) + (np.arange(total) - starts)
    ym = Xi.m[xi] - G.m[gi]
    yn = Xi.n[xi] - G.n[gi]
    nz = (ym != 0) | (yn != 0)
    ym, yn = ym[nz], yn[nz]
    if ym.size == 0:
        return None
    sg = K.sign_arr(ym, yn, Xi.D)
    am, an = np.where(sg < 0, -ym, ym), np.where(sg < 0, -yn, yn)
    q, p = R.denominator, R.numerator
    inside = K.sign_arr(K.lin(q, am, -p), K.lin(q, an), Xi.D) <= 0
    if not inside.any():
        return None
    am, an = am[inside], an[inside]
    i = exact_extreme(am, an, Xi.D, largest=False)
    return QuadInt(int(am[i]), int(an[i]), Xi.D)


def separation_check(Xi: DiffSet, q: int, V_radius, scheme, search_radius=1) -> SeparationResult:
    """Minimal nonzero size of Xi - Λ^q near 0 and whether V clears it.

    Λ^q is replaced by the window set with window q*w, which contains it,
    so the returned minimum is a lower bound for the true one."""
    if q < 1:
        raise UsageError("q must be >= 1")
    if isinstance(scheme, QuadScheme):
        V = as_fraction(V_radius)
        X = Xi.differences
        R = as_fraction(search_radius)
        norm_bound = 1 / ((2 + q) * scheme.w)
        while True:
            reach = Xi.radius + R
            G = enumerate_points(scheme, Interval(reach), w=q * scheme.w, closed=scheme.closed)
            mu = _quad_min_near_zero(X, G, R)
            if mu is not None or R > 2**20:
                break
            R *= 2
        if mu is None:
            return SeparationResult(True, None, None, norm_bound)
        return SeparationResult(mu.cmp_rational(V) > 0, mu, mu, norm_bound)
    # p-adic: y = xi - g is p-adically within Z_p only if it is an integer with
    # |y| <= |xi| + q w; minimise |y|_p, i.e. maximise v_p(y)
    X = Xi.differences
    p = scheme.p
    bound = q * scheme.w
    best, wit = None, None
    for xi in X.points():
        f = xi.to_fraction()
        # non-integers have |y|_p > 1, so the minimum is attained on integers y
        lo, hi = math.ceil(f - bound), math.floor(f + bound)
        for y in range(lo, hi + 1):
            if y == 0:
                continue
            g = f - y
            if abs(g) > bound or (not scheme.closed and abs(g) == bound):
                continue
            lv = -vp(y, p)
            if best is None or lv < best or (lv == best and abs(y) < abs(wit)):
                best, wit = lv, y
    V = int(V_radius) if V_radius is not None else None
    if best is None:
        return SeparationResult(True, None, None)
    ok = V is None or V < best
    return SeparationResult(ok, best, PadicRat(wit, 0, p))


def near_zero_oracle(scheme, q: int, search_radius=1):
    """Exhaustive scan of the window-(2+q)w set near 0: minimal nonzero size."""
    if isinstance(scheme, QuadScheme):
        W = (2 + q) * scheme.w
        pts = enumerate_points(scheme, Interval(as_fraction(search_radius)), w=W, closed=scheme.closed)
        nz = [abs(x) for x in pts.points() if x != QuadInt(0, 0, scheme.D)]
        return min(nz) if nz else None
    W = (2 + q) * scheme.w
    ys = [y for y in range(-math.floor(W), math.floor(W) + 1) if y != 0 and
          (abs(y) <= W if scheme.closed else abs(y) < W)]
    return min(-vp(y, scheme.p) for y in ys) if ys else None


# ---------------------------------------------------------------- patch census

@dataclass
class PatchStats:
    radius: object
    total_centers: int
    counts: dict

    @property
    def distinct_patch_count(self) -> int:
        return len(self.counts)

    def frequencies(self) -> dict:
        return {k: Fraction(c, self.total_centers) for k, c in self.counts.items()}

    def to_json(self) -> dict:
        r = self.radius
        rad = [r.numerator, r.denominator] if isinstance(r, Fraction) else r
        return {"radius": rad, "total_centers": self.total_centers,
                "patches": [{"key": [list(c) for c in k], "count": c} for k, c in self.counts.items()]}


def _reverse_window_lo(P: QuadPointSet, radius: Fraction) -> np.ndarray:
    """First index j <= i with x_i - x_j <= radius."""
    rm, rn = -P.m[::-1], -P.n[::-1]
    hi = K.window_hi(rm, rn, P.D, radius.numerator, radius.denominator)
    N = len(P)
    return (N - 1 - hi)[::-1]


def patch_census(P: PointSet, rho, margin=None) -> PatchStats:
    """Tally the centred local configurations (P - x) ∩ ball(rho) over inner points x."""
    if isinstance(P, QuadPointSet):
        r = as_fraction(rho)
        if len(P) == 0:
            return PatchStats(r, 0, {})
        hi = K.window_hi(P.m, P.n, P.D, r.numerator, r.denominator)
        lo = _reverse_window_lo(P, r)
        if P.region is not None:
            inner = P.abs_le_mask(P.region.half - (r if margin is None else as_fraction(margin)), P.region.center)
        else:
            inner = np.ones(len(P), dtype=bool)
        rows = P.coords.tolist()
        tally: Counter = Counter()
        for i in np.flatnonzero(inner).tolist():
            cm, cn = rows[i]
            key = tuple((rows[j][0] - cm, rows[j][1] - cn) for j in range(int(lo[i]), int(hi[i]) + 1))
            tally[key] += 1
        return PatchStats(r, int(inner.sum()), dict(sorted(tally.items())))
    r = int(rho)
    reg = P.region.level if P.region is not None else P.exp
    if r > reg:
        raise UsageError("patch radius exceeds the region level")
    E = max(P.exp, r)
    a = P.lift(E).a.astype(object).tolist()
    mod = P.p ** (E - r)
    classes: dict = {}
    for v in a:
        classes.setdefault(v % mod, []).append(v)
    tally = Counter()
    for v in a:
        key = tuple(PadicRat(u - v, E, P.p).coords() for u in classes[v % mod])
        tally[key] += 1
    return PatchStats(r, len(a), dict(sorted(tally.items())))


# ------------------------------------------------------------ transverse mass

def _qsign_rat(a: Fraction, b: Fraction, D: int) -> int:
    L = a.denominator * b.denominator
    return quad_sign(int(a * L), int(b * L), D)


@dataclass
class TransverseMass:
    thickened_measure: tuple
    predicted_measure: Fraction
    relative_discrepancy: float
    boundary_points: int
    bound: Fraction
    ok: bool


def transverse_mass_check(P: PointSet, region, V_radius) -> TransverseMass:
    """Compare the measure of the V-thickening of P inside the region with
    m(V) times the number of points in the region. Thickenings must be disjoint."""
    if isinstance(P, QuadPointSet):
        V = as_fraction(V_radius)
        if V <= 0:
            raise UsageError("V_radius must be positive")
        g = quad_min_gap(P)
        if g is not None and g.cmp_rational(2 * V) <= 0:
            raise UsageError(f"2*V_radius={2 * V} is not below the minimal gap {float(g):.6g}; thickenings overlap")
        T = region.half
        c = region.center if region.center is not None else QuadInt(0, 0, P.D)
        near = P.subset(P.abs_le_mask(T + V, c, strict=True))
        # exact measure in Q(sqrt D) as a pair (a, b) meaning a + b sqrt(D)
        tot_a, tot_b = Fraction(0), Fraction(0)
        n_in = boundary = 0
        for x in near.points():
            y = x - c
            in_region = y.cmp_rational(T) <= 0 and y.cmp_rational(-T) >= 0
            n_in += in_region
            lo_a, lo_b = Fraction(y.m) - V, Fraction(y.n)
            hi_a, hi_b = Fraction(y.m) + V, Fraction(y.n)
            clipped = False
            if _qsign_rat(lo_a + T, lo_b, P.D) < 0:
                lo_a, lo_b, clipped = -T, Fraction(0), True
            if _qsign_rat(hi_a - T, hi_b, P.D) > 0:
                hi_a, hi_b, clipped = T, Fraction(0), True
            boundary += clipped
            if _qsign_rat(hi_a - lo_a, hi_b - lo_b, P.D) > 0:
                tot_a += hi_a - lo_a
                tot_b += hi_b - lo_b
        meas = region.measure()
        pred = 2 * V * n_in
        diff_a, diff_b = tot_a - pred, tot_b
        diff = abs(float(diff_a) + float(diff_b) * math.sqrt(P.D))
        rel = diff / float(pred) if pred else (0.0 if diff == 0 else math.inf)
        bound = 2 * V * boundary
        # |diff| <= bound, decided exactly
        ok = (_qsign_rat(diff_a - bound, diff_b, P.D) <= 0 and _qsign_rat(diff_a + bound, diff_b, P.D) >= 0)
        return TransverseMass((tot_a / meas, tot_b / meas), pred / meas, rel, boundary, bound / meas, ok)
    # ultrametric balls are nested or disjoint: the thickening is exact
    v = int(V_radius)
    from .scheme import padic_min_gap_level
    g = padic_min_gap_level(P)
    if g is not None and v >= g:
        raise UsageError("V ball level is not below the minimal gap level; thickenings overlap")
    inside = P.subset(P.ball_mask(region))
    meas = region.measure(P.p)
    pred = Fraction(P.p) ** v * len(inside) / meas
    return TransverseMass((pred, Fraction(0)), pred, 0.0, 0, Fraction(0), True)
