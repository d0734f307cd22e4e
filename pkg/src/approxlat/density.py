"""Følner families, upper densities along them, an empirical upper Banach
density, and positive-density subsets of Λ."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels as K
from .errors import UsageError
from .exactnum import PadicRat, QuadInt, as_fraction
from .scheme import (Ball, Interval, PadicPointSet, PadicScheme, PointSet, QuadPointSet, QuadScheme,
                     empty_like, enumerate_points, padic_canonical, padic_min_gap_level, quad_min_gap)


# ------------------------------------------------------------------ Følner

@dataclass(frozen=True)
class FolnerSpec:
    """Intervals [g_j - T_j, g_j + T_j] or balls g_j + p^{-n_j} Z_p.

    ``thickening`` replaces F_j by F_j + V, V = (-v, v) for intervals or the
    ball of that level for p-adic families.
    """

    family: str
    scales: tuple
    translates: tuple | None = None
    thickening: object = None
    p: int | None = None

    def __post_init__(self):
        if self.family not in ("interval", "ball"):
            raise UsageError(f"unknown Følner family {self.family!r}")
        sc = tuple(as_fraction(s) if self.family == "interval" else int(s) for s in self.scales)
        if any(b <= a for a, b in zip(sc, sc[1:])):
            raise UsageError("Følner scales must be strictly increasing")
        object.__setattr__(self, "scales", sc)
        if self.translates is not None:
            tr = tuple(self.translates)
            if len(tr) != len(sc):
                raise UsageError("one translate per scale is required")
            object.__setattr__(self, "translates", tr)
        if self.family == "ball" and self.p is None:
            raise UsageError("ball families need p")

    def __len__(self) -> int:
        return len(self.scales)

    def region(self, j: int):
        g = self.translates[j] if self.translates is not None else None
        s = self.scales[j]
        if self.family == "interval":
            v = as_fraction(self.thickening) if self.thickening is not None else 0
            return Interval(s + v, g)
        lvl = s if self.thickening is None else max(s, int(self.thickening))
        return Ball(lvl, g)

    def label(self, j: int) -> str:
        s = self.scales[j]
        return f"T={s}" if self.family == "interval" else f"n={s}"


def folner_measure(spec: FolnerSpec, j: int) -> Fraction:
    if not 0 <= j < len(spec):
        raise UsageError(f"scale index {j} outside the family")
    reg = spec.region(j)
    if spec.family == "interval":
        return reg.measure()
    return reg.measure(spec.p)


# -------------------------------------------------------------- subsets

@dataclass(frozen=True)
class SubsetSpec:
    kind: str = "full"
    theta: Fraction | None = None
    seed: int | None = None
    w_sub: Fraction | None = None
    strict: bool = False
    modulus: int | None = None
    residues: tuple = ()

    def __post_init__(self):
        k = self.kind
        if k == "bernoulli":
            if self.seed is None:
                raise UsageError("bernoulli subsets need an explicit seed")
            th = as_fraction(self.theta)
            if not 0 < th <= 1:
                raise UsageError("theta must lie in (0, 1]")
            object.__setattr__(self, "theta", th)
        elif k == "subwindow":
            object.__setattr__(self, "w_sub", as_fraction(self.w_sub))
            if self.w_sub <= 0:
                raise UsageError("subwindow w' must be positive")
        elif k == "congruence":
            if not self.modulus or self.modulus < 1:
                raise UsageError("congruence subsets need a positive modulus")
        elif k not in ("full", "empty"):
            raise UsageError(f"unknown subset kind {k!r}")


def _u64(x: np.ndarray) -> np.ndarray:
    if x.dtype == object:
        return np.array([int(v) % 2**64 for v in x.tolist()], dtype=np.uint64)
    return x.astype(np.int64).astype(np.uint64)


def coordinate_hash(seed: int, c1: np.ndarray, c2: np.ndarray) -> np.ndarray:
    """Counter-based 64-bit hash of (seed, c1, c2); same point, same value."""
    s = np.uint64(int(seed) % 2**64)
    h = K.splitmix64(_u64(c1) ^ K.splitmix64(np.full(len(c1), s, dtype=np.uint64)))
    return K.splitmix64(h ^ K.splitmix64(_u64(c2) + np.uint64(0x632BE59BD9B4E019)))


def _canonical_coords(P: PointSet) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(P, QuadPointSet):
        return P.m, P.n
    return padic_canonical(P.a, P.exp, P.p)


def bernoulli_mask(P: PointSet, theta: Fraction, seed: int) -> np.ndarray:
    if theta == 1:
        return np.ones(len(P), dtype=bool)
    c1, c2 = _canonical_coords(P)
    h = coordinate_hash(seed, c1, c2)
    thresh = np.uint64((theta.numerator << 64) // theta.denominator)
    return h < thresh


def subset_generate(P: PointSet, spec: SubsetSpec) -> PointSet:
    """Deterministic subset; verdicts depend only on each point's coordinates."""
    if spec.kind == "full":
        return P
    if spec.kind == "empty":
        return empty_like(P)
    if spec.kind == "bernoulli":
        return P.subset(bernoulli_mask(P, spec.theta, spec.seed))
    if spec.kind == "subwindow":
        if isinstance(P, QuadPointSet):
            return P.subset(P.star_le_mask(spec.w_sub, strict=spec.strict))
        return P.subset(P.arch_le_mask(spec.w_sub, strict=spec.strict))
    if spec.kind == "congruence":
        if not isinstance(P, QuadPointSet):
            raise UsageError("congruence subsets are defined for the quadratic scheme only")
        r = P.m % spec.modulus
        return P.subset(np.isin(r, np.array(sorted(set(spec.residues)), dtype=np.int64)))
    raise UsageError(spec.kind)


class PointRule:
    """A point set defined on all of G, generated region by region."""

    def points(self, region) -> PointSet:
        raise NotImplementedError


@dataclass(frozen=True)
class SubsetRule(PointRule):
    scheme: object
    spec: SubsetSpec = SubsetSpec()

    def points(self, region) -> PointSet:
        return subset_generate(enumerate_points(self.scheme, region), self.spec)


@dataclass(frozen=True)
class TranslatedRule(PointRule):
    """P + g."""

    rule: PointRule
    g: object

    def points(self, region) -> PointSet:
        c = region.center
        if isinstance(region, Interval):
            back = Interval(region.half, (c - self.g) if c is not None else -self.g)
        else:
            back = Ball(region.level, (c - self.g) if c is not None else -self.g)
        out = self.rule.points(back).translate(self.g)
        out.region = region
        return out


# -------------------------------------------------------------- densities

def _ratio_decimal(r: Fraction, digits: int = 12) -> str:
    scaled = r * 10**digits
    q = math.floor(scaled + Fraction(1, 2))
    sign = "-" if q < 0 else ""
    q = abs(q)
    return f"{sign}{q // 10**digits}.{q % 10**digits:0{digits}d}"


@dataclass
class DensityRow:
    scale_label: str
    count: int
    measure: Fraction
    ratio: Fraction

    def csv_row(self) -> list:
        return [self.scale_label, self.count, self.measure.numerator, self.measure.denominator,
                _ratio_decimal(self.ratio)]


@dataclass
class DensityTrace:
    rows: list = field(default_factory=list)
    limsup_estimate: Fraction = Fraction(0)

    header = ["scale_label", "count", "measure_num", "measure_den", "ratio_decimal"]

    def ratios(self) -> list[Fraction]:
        return [r.ratio for r in self.rows]


def upper_density(rule: PointRule, spec: FolnerSpec, j_max: int | None = None) -> DensityTrace:
    """Exact ratios |P ∩ F_j| / m(F_j); limsup estimated by the max over the
    last ceil(j_max/2) scales."""
    j_max = len(spec) if j_max is None else j_max
    if not 1 <= j_max <= len(spec):
        raise UsageError("j_max outside the family")
    rows = []
    for j in range(j_max):
        reg = spec.region(j)
        pts = rule.points(reg)
        meas = folner_measure(spec, j)
        rows.append(DensityRow(spec.label(j), len(pts), meas, Fraction(len(pts)) / meas))
    tail = rows[j_max - math.ceil(j_max / 2):]
    return DensityTrace(rows, max(r.ratio for r in tail))


def banach_density_emp(P: PointSet, region, t) -> Fraction:
    """Max of |P ∩ window| / m(window) over translates of a fixed window inside
    `region`. This is the empirical d*: a finite-scale lower estimate."""
    if isinstance(P, QuadPointSet):
        t = as_fraction(t)
        if not 0 < t <= region.measure():
            raise UsageError("window extent must lie in (0, 2T]")
        if len(P) == 0:
            return Fraction(0)
        inside = P.subset(P.abs_le_mask(region.half, region.center))
        if len(inside) == 0:
            return Fraction(0)
        c = region.center if region.center is not None else QuadInt(0, 0, P.D)
        # windows [x, x + t] anchored at points with x + t <= c + T
        lim = region.half - t
        q, p = lim.denominator, lim.numerator
        ok = K.sign_arr(K.lin(q, inside.m - c.m, -p), K.lin(q, inside.n - c.n), P.D) <= 0
        hi = K.window_hi(inside.m, inside.n, P.D, t.numerator, t.denominator)
        counts = hi - np.arange(len(inside)) + 1
        best = int(counts[ok].max()) if ok.any() else 0
        # the window flush with the right end of the region: T - t <= x - c <= T
        sm, sn = inside.m - c.m, inside.n - c.n
        qL, pL = lim.denominator, lim.numerator
        qT, pT = region.half.denominator, region.half.numerator
        ge = K.sign_arr(K.lin(qL, sm, -pL), K.lin(qL, sn), P.D) >= 0
        le = K.sign_arr(K.lin(qT, sm, -pT), K.lin(qT, sn), P.D) <= 0
        best = max(best, int((ge & le).sum()))
        return Fraction(best) / t
    if isinstance(P, PadicPointSet):
        t = int(t)
        if t > region.level:
            raise UsageError("window level must not exceed the ambient ball level")
        inside = P.subset(P.ball_mask(region))
        if len(inside) == 0:
            return Fraction(0)
        E = max(inside.exp, t)
        mod = P.p ** (E - t)
        counts = Counter(int(v) % mod for v in inside.lift(E).a.tolist())
        return Fraction(max(counts.values())) / Fraction(P.p) ** t
    raise UsageError("unsupported point set")


# ------------------------------------------------------- counting bounds

def random_windows(rng: np.random.Generator, region, count: int, max_len) -> list:
    """Seeded random sub-windows of `region` with exact endpoints.

    Intervals come back as (lo, hi) rational pairs. For a ball region of
    level L, max_len is the number of levels below L to draw from, and each
    window is a ball of level l centred on a random coset representative
    a / p^L, 0 <= a < p^(L - l).
    """
    out = []
    if isinstance(region, Interval):
        if region.center is not None:
            raise UsageError("random windows need a region centred at 0")
        max_len = as_fraction(max_len)
        den = 1000
        for _ in range(count):
            length = Fraction(int(rng.integers(1, int(max_len * den) + 1)), den)
            half = min(length / 2, region.half)
            room = int((region.half - half) * den)
            mid = Fraction(int(rng.integers(-room, room + 1)), den)
            out.append((mid - half, mid + half))
        return out
    p = int(max_len[1]) if isinstance(max_len, tuple) else None
    depth = int(max_len[0]) if isinstance(max_len, tuple) else int(max_len)
    if p is None:
        raise UsageError("ball windows need max_len given as (levels, p)")
    L = region.level
    for _ in range(count):
        lvl = int(rng.integers(L - depth, L + 1))
        a = int(rng.integers(0, p ** (L - lvl))) if L > lvl else 0
        c = PadicRat(a, max(L, 0), p) if L >= 0 else PadicRat(a * p ** (-L), 0, p)
        out.append(Ball(lvl, c))
    return out


def count_in_closed(P: QuadPointSet, lo: Fraction, hi: Fraction) -> int:
    q1, p1 = lo.denominator, lo.numerator
    q2, p2 = hi.denominator, hi.numerator
    ge = K.sign_arr(K.lin(q1, P.m, -p1), K.lin(q1, P.n), P.D) >= 0
    le = K.sign_arr(K.lin(q2, P.m, -p2), K.lin(q2, P.n), P.D) <= 0
    return int((ge & le).sum())


def counting_bound_check(P: PointSet, Q_samples, V_gap) -> int:
    """Violations of |P ∩ Q| <= m(Q + V) / m(V) over the sampled windows.

    Quadratic: Q = [lo, hi], V = (-V_gap, V_gap), bound (len Q + 2 V_gap) / (2 V_gap).
    p-adic: Q = ball of level l centred at 0 or at a point of P, V = ball of
    level V_gap, bound p**max(l, V_gap) / p**V_gap.
    """
    viol = 0
    if isinstance(P, QuadPointSet):
        v = as_fraction(V_gap)
        for lo, hi in Q_samples:
            bound = (hi - lo + 2 * v) / (2 * v)
            if count_in_closed(P, lo, hi) > bound:
                viol += 1
        return viol
    v = int(V_gap)
    for item in Q_samples:
        ball = item if isinstance(item, Ball) else Ball(int(item))
        cnt = int(P.ball_mask(ball).sum())
        if cnt > Fraction(P.p) ** max(ball.level, v) / Fraction(P.p) ** v:
            viol += 1
    return viol


def half_gap(P: PointSet):
    """V_gap for the counting bounds: half the minimal gap (quadratic, as a
    rational lower bound) or one level below the minimal distance (p-adic)."""
    if isinstance(P, QuadPointSet):
        g = quad_min_gap(P)
        if g is None:
            return Fraction(1)
        # largest dyadic-ish rational below |g|/2
        lo = g.abs_upper() / 2
        den = 10**6
        cand = Fraction(math.floor(lo * den) - 1, den)
        while not (g.cmp_rational(2 * cand) >= 0):
            cand -= Fraction(1, den)
        return cand
    lvl = padic_min_gap_level(P)
    return (lvl - 1) if lvl is not None else 0
