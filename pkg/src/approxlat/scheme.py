"""The two cut-and-project schemes, exact enumeration, and point sets.

Quadratic scheme: G = H = R, Gamma = {(x, star(x)) : x in Z[sqrt(D)]}, window
[-w, w] (or the open interval). p-adic scheme: G = Q_p, H = R,
Gamma = {(g, g) : g in Z[1/p]}, window [-w, w].

Points of a quadratic set are stored as an (N, 2) integer array of (m, n),
sorted by the real value m + n*sqrt(D). Points of a p-adic set share one
exponent K and are stored as a sorted 1-d array of numerators a (value
a / p**K).
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels as K
from .errors import CapacityError, UsageError
from .exactnum import (PadicRat, QuadInt, as_fraction, round_up, check_D, check_p, floor_mul_sqrt,
                       quad_abs_leq, quad_abs_lt, sqrt_bounds)

DEFAULT_CAP = 10**8
_cap = DEFAULT_CAP


def set_cap(cap: int | None) -> None:
    global _cap
    _cap = DEFAULT_CAP if cap is None else int(cap)


def get_cap() -> int:
    return _cap


def _check_cap(estimate) -> None:
    if estimate > _cap:
        raise CapacityError(f"estimated {int(estimate)} points exceeds the cap {_cap}; raise --cap to override")


# ------------------------------------------------------------------ schemes

@dataclass(frozen=True)
class QuadScheme:
    D: int
    w: Fraction = Fraction(1)
    closed: bool = True
    kind = "quadratic"

    def __post_init__(self):
        object.__setattr__(self, "D", check_D(self.D))
        object.__setattr__(self, "w", as_fraction(self.w))
        if self.w <= 0:
            raise UsageError("window half-width w must be positive")

    def elem(self, m: int, n: int = 0) -> QuadInt:
        return QuadInt(int(m), int(n), self.D)

    def zero(self) -> QuadInt:
        return QuadInt(0, 0, self.D)

    def with_window(self, w, closed: bool | None = None) -> QuadScheme:
        return QuadScheme(self.D, as_fraction(w), self.closed if closed is None else closed)


@dataclass(frozen=True)
class PadicScheme:
    p: int
    w: Fraction = Fraction(1)
    closed: bool = True
    kind = "padic"

    def __post_init__(self):
        object.__setattr__(self, "p", check_p(self.p))
        object.__setattr__(self, "w", as_fraction(self.w))
        if self.w <= 0:
            raise UsageError("window bound w must be positive")

    def elem(self, a: int, k: int = 0) -> PadicRat:
        return PadicRat(int(a), int(k), self.p)

    def zero(self) -> PadicRat:
        return PadicRat(0, 0, self.p)

    def with_window(self, w, closed: bool | None = None) -> PadicScheme:
        return PadicScheme(self.p, as_fraction(w), self.closed if closed is None else closed)


# ------------------------------------------------------------------ regions

@dataclass(frozen=True)
class Interval:
    """{x : |x - center| <= half} in R; center None means 0."""

    half: Fraction
    center: QuadInt | None = None

    def __post_init__(self):
        object.__setattr__(self, "half", as_fraction(self.half))
        if self.half < 0:
            raise UsageError("interval half-length must be non-negative")

    def measure(self) -> Fraction:
        return 2 * self.half

    def shrink(self, margin) -> Interval:
        h = self.half - as_fraction(margin)
        if h < 0:
            raise UsageError(f"margin {margin} exceeds the region half-length {self.half}")
        return Interval(h, self.center)

    def contains(self, x: QuadInt) -> bool:
        c = self.center
        return quad_abs_leq(x - c if c is not None else x, self.half)


@dataclass(frozen=True)
class Ball:
    """center + p^{-level} Z_p in Q_p; Haar measure p**level."""

    level: int
    center: PadicRat | None = None

    def measure(self, p: int) -> Fraction:
        return Fraction(p) ** self.level

    def shrink(self, margin: int) -> Ball:
        return Ball(self.level - int(margin), self.center)

    def contains(self, x: PadicRat) -> bool:
        y = x - self.center if self.center is not None else x
        return y.a == 0 or y.k <= self.level


# --------------------------------------------------------------- point sets

def _unique_rows(c: np.ndarray) -> np.ndarray:
    if len(c) == 0:
        return c.reshape(0, 2)
    if c.dtype != object:
        lo = c.min(axis=0)
        span = c.max(axis=0) - lo + 1
        if int(span[0]) * int(span[1]) < 2**62:
            key = (c[:, 0] - lo[0]) * span[1] + (c[:, 1] - lo[1])
            u = np.unique(key)
            return np.stack([u // span[1] + lo[0], u % span[1] + lo[1]], axis=1)
    return np.array(sorted(set(map(tuple, c.tolist()))), dtype=object).reshape(-1, 2)


def _int_array(values) -> np.ndarray:
    """int64 array when every value fits comfortably, else an object array."""
    arr = np.asarray(values, dtype=object) if not isinstance(values, np.ndarray) else values
    if arr.dtype == object:
        if arr.size == 0:
            return arr.astype(np.int64)
        if max(abs(int(v)) for v in arr.ravel()) < 2**62:
            return arr.astype(np.int64)
        return arr
    return arr.astype(np.int64)


def quad_sort(c: np.ndarray, D: int) -> np.ndarray:
    """Sort rows (m, n) by m + n*sqrt(D). The float order is only a proposal;
    it is accepted only after exact verification of every adjacent pair."""
    if len(c) <= 1:
        return c
    if c.dtype != object:
        approx = c[:, 0].astype(np.float64) + c[:, 1].astype(np.float64) * math.sqrt(D)
        order = np.argsort(approx, kind="stable")
        s = c[order]
        step = K.sign_arr(s[1:, 0] - s[:-1, 0], s[1:, 1] - s[:-1, 1], D)
        if np.all(step > 0):
            return s
    pts = sorted((QuadInt(int(m), int(n), D) for m, n in c.tolist()))
    return _int_array(np.array([[p.m, p.n] for p in pts], dtype=object)).reshape(-1, 2)


class PointSet:
    """Finite, deduplicated, exactly indexed set of ring points."""

    kind: str

    def __len__(self) -> int:
        raise NotImplementedError

    def __iter__(self):
        return iter(self.points())

    def __contains__(self, x) -> bool:
        return self.contains(x)

    def checksum_rows(self):
        return self.rows()


class QuadPointSet(PointSet):
    kind = "quadratic"

    def __init__(self, D: int, coords, region: Interval | None = None, *, sorted_=False, unique=False):
        self.D = D
        c = _int_array(np.asarray(coords)).reshape(-1, 2)
        if not unique:
            c = _unique_rows(c)
        if not sorted_:
            c = quad_sort(c, D)
        self.coords = c
        self.region = region
        self._index = None

    @classmethod
    def from_points(cls, D: int, points, region=None) -> QuadPointSet:
        pts = [(p.m, p.n) for p in points]
        return cls(D, np.array(pts, dtype=object).reshape(-1, 2), region)

    @property
    def m(self) -> np.ndarray:
        return self.coords[:, 0]

    @property
    def n(self) -> np.ndarray:
        return self.coords[:, 1]

    def __len__(self) -> int:
        return len(self.coords)

    def points(self) -> list[QuadInt]:
        return [QuadInt(int(m), int(n), self.D) for m, n in self.coords.tolist()]

    def rows(self) -> list[tuple[int, int]]:
        return [(int(m), int(n)) for m, n in self.coords.tolist()]

    def values(self) -> np.ndarray:
        """Float values, for report output only."""
        return self.m.astype(np.float64) + self.n.astype(np.float64) * math.sqrt(self.D)

    def _build_index(self):
        if len(self) == 0:
            self._index = (np.zeros((0, 0), bool), 0, np.zeros(0, np.int64), 0)
            return
        m, n = self.m, self.n
        n_lo, n_hi = int(n.min()), int(n.max())
        base = np.array([floor_mul_sqrt(k, self.D) for k in range(n_lo, n_hi + 1)], dtype=object)
        base = _int_array(base)
        j = m - base[(n - n_lo).astype(np.int64)]
        j_lo, j_hi = int(j.min()), int(j.max())
        rows, cols = n_hi - n_lo + 1, j_hi - j_lo + 1
        _check_cap(rows * cols // 8)
        table = np.zeros((rows, cols), dtype=bool)
        table[(n - n_lo).astype(np.int64), (j - j_lo).astype(np.int64)] = True
        self._index = (table, n_lo, base, j_lo)

    @property
    def index(self):
        if self._index is None:
            self._build_index()
        return self._index

    def contains_coords(self, qm, qn) -> np.ndarray:
        table, n_lo, base, j_lo = self.index
        if table.size == 0:
            return np.zeros(np.shape(qm), dtype=bool)
        return K.grid_probe(table, n_lo, base, j_lo, np.asarray(qm), np.asarray(qn))

    def contains(self, x: QuadInt) -> bool:
        return bool(self.contains_coords(np.array([x.m], dtype=object), np.array([x.n], dtype=object))[0])

    def subset(self, mask) -> QuadPointSet:
        return QuadPointSet(self.D, self.coords[np.asarray(mask, dtype=bool)], self.region,
                            sorted_=True, unique=True)

    def abs_le_mask(self, half, center: QuadInt | None = None, strict: bool = False) -> np.ndarray:
        r = as_fraction(half)
        q, p = r.denominator, r.numerator
        dm = self.m - (center.m if center is not None else 0)
        dn = self.n - (center.n if center is not None else 0)
        s_hi = K.sign_arr(K.lin(q, dm, -p), K.lin(q, dn), self.D)
        s_lo = K.sign_arr(K.lin(q, dm, p), K.lin(q, dn), self.D)
        if strict:
            return (s_hi < 0) & (s_lo > 0)
        return (s_hi <= 0) & (s_lo >= 0)

    def star_le_mask(self, w, strict: bool = False) -> np.ndarray:
        r = as_fraction(w)
        q, p = r.denominator, r.numerator
        s_hi = K.sign_arr(K.lin(q, self.m, -p), K.lin(-q, self.n), self.D)
        s_lo = K.sign_arr(K.lin(q, self.m, p), K.lin(-q, self.n), self.D)
        if strict:
            return (s_hi < 0) & (s_lo > 0)
        return (s_hi <= 0) & (s_lo >= 0)

    def restrict(self, region: Interval) -> QuadPointSet:
        out = self.subset(self.abs_le_mask(region.half, region.center))
        out.region = region
        return out

    def translate(self, g: QuadInt) -> QuadPointSet:
        c = self.coords + np.array([g.m, g.n], dtype=self.coords.dtype)
        reg = None
        if self.region is not None:
            cen = self.region.center
            reg = Interval(self.region.half, g if cen is None else cen + g)
        return QuadPointSet(self.D, c, reg, sorted_=True, unique=True)

    def negate(self) -> QuadPointSet:
        return QuadPointSet(self.D, -self.coords[::-1], self.region, sorted_=True, unique=True)

    def __eq__(self, other) -> bool:
        return (isinstance(other, QuadPointSet) and self.D == other.D
                and self.coords.shape == other.coords.shape and bool(np.all(self.coords == other.coords)))

    def issubset(self, other: QuadPointSet) -> bool:
        return bool(np.all(other.contains_coords(self.m, self.n)))

    def __repr__(self) -> str:
        return f"QuadPointSet(D={self.D}, size={len(self)}, region={self.region})"


def padic_canonical(a: np.ndarray, K_: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Elementwise canonical (a, k) of a / p**K_."""
    a = np.array(a, copy=True)
    k = np.full(a.shape, K_, dtype=np.int64)
    k[a == 0] = 0
    while True:
        move = (k > 0) & (a % p == 0) & (a != 0)
        if not move.any():
            return a, k
        a[move] //= p
        k[move] -= 1


def valuations(a: np.ndarray, p: int, cap: int = 10**6) -> np.ndarray:
    """v_p of each nonzero integer; `cap` for zero."""
    a = np.asarray(a)
    v = np.zeros(a.shape, dtype=np.int64)
    v[a == 0] = cap
    cur = a.copy()
    live = cur != 0
    while True:
        move = live & (cur % p == 0)
        if not move.any():
            return v
        cur[move] //= p
        v[move] += 1


class PadicPointSet(PointSet):
    kind = "padic"

    def __init__(self, p: int, a, exp: int, region: Ball | None = None, *, sorted_=False):
        self.p = p
        arr = _int_array(np.asarray(a)).ravel()
        if not sorted_:
            arr = np.unique(arr) if arr.dtype != object else _int_array(np.array(sorted(set(arr.tolist())), dtype=object))
        self.a = arr
        self.exp = int(exp)
        self.region = region
        self._index = None

    @classmethod
    def from_points(cls, p: int, points, region=None) -> PadicPointSet:
        pts = list(points)
        E = max([x.k for x in pts] + [region.level if region is not None else 0, 0])
        return cls(p, np.array([x.at_exponent(E) for x in pts], dtype=object), E, region)

    def __len__(self) -> int:
        return len(self.a)

    def points(self) -> list[PadicRat]:
        return [PadicRat(int(v), self.exp, self.p) for v in self.a.tolist()]

    def rows(self) -> list[tuple[int, int]]:
        return [x.coords() for x in self.points()]

    def values(self) -> np.ndarray:
        return self.a.astype(np.float64) / float(self.p) ** self.exp

    def lift(self, E: int) -> PadicPointSet:
        """Same set with numerators over p**E (E >= exp)."""
        if E < self.exp:
            raise ValueError("cannot lower the common exponent")
        f = self.p ** (E - self.exp)
        return PadicPointSet(self.p, _int_array(self.a.astype(object) * f), E, self.region, sorted_=True)

    @property
    def index(self):
        if self._index is None:
            if len(self) == 0:
                self._index = (np.zeros(0, bool), 0)
            else:
                lo, hi = int(self.a.min()), int(self.a.max())
                _check_cap((hi - lo + 1) // 8)
                table = np.zeros(hi - lo + 1, dtype=bool)
                table[(self.a - lo).astype(np.int64)] = True
                self._index = (table, lo)
        return self._index

    def contains_numerators(self, qa) -> np.ndarray:
        """Membership of qa / p**exp."""
        table, lo = self.index
        qa = np.asarray(qa)
        j = qa - lo
        ok = (j >= 0) & (j < table.shape[0])
        out = np.zeros(qa.shape, dtype=bool)
        if ok.any():
            out[ok] = table[j[ok].astype(np.int64)]
        return out

    def contains(self, x: PadicRat) -> bool:
        if x.k > self.exp:
            return False
        return bool(self.contains_numerators(np.array([x.at_exponent(self.exp)], dtype=object))[0])

    def subset(self, mask) -> PadicPointSet:
        return PadicPointSet(self.p, self.a[np.asarray(mask, dtype=bool)], self.exp, self.region, sorted_=True)

    def arch_le_mask(self, w, strict: bool = False) -> np.ndarray:
        r = as_fraction(w)
        lhs = np.abs(self.a.astype(object)) * r.denominator
        rhs = r.numerator * self.p**self.exp
        return np.asarray((lhs < rhs) if strict else (lhs <= rhs), dtype=bool)

    def ball_mask(self, ball: Ball) -> np.ndarray:
        """Points in center + p^{-level} Z_p."""
        c = ball.center if ball.center is not None else PadicRat(0, 0, self.p)
        E = max(self.exp, c.k)
        d = self.a.astype(object) * self.p ** (E - self.exp) - c.at_exponent(E)
        if ball.level >= E:
            return np.ones(len(self), dtype=bool)
        mod = self.p ** (E - ball.level)
        return np.asarray(d % mod == 0, dtype=bool)

    def restrict(self, ball: Ball) -> PadicPointSet:
        out = self.subset(self.ball_mask(ball))
        out.region = ball
        return out

    def translate(self, g: PadicRat) -> PadicPointSet:
        E = max(self.exp, g.k)
        base = self.lift(E)
        reg = None
        if self.region is not None:
            cen = self.region.center
            reg = Ball(self.region.level, g if cen is None else cen + g)
        return PadicPointSet(self.p, _int_array(base.a.astype(object) + g.at_exponent(E)), E, reg, sorted_=True)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PadicPointSet) or other.p != self.p or len(other) != len(self):
            return False
        return self.rows() == other.rows()

    def issubset(self, other: PadicPointSet) -> bool:
        return all(other.contains(x) for x in self.points())

    def __repr__(self) -> str:
        return f"PadicPointSet(p={self.p}, size={len(self)}, exp={self.exp}, region={self.region})"


def empty_like(P: PointSet) -> PointSet:
    return P.subset(np.zeros(len(P), dtype=bool))


# -------------------------------------------------------------- enumeration

def _n_range(D: int, lo_val: Fraction, hi_val: Fraction) -> tuple[int, int]:
    """Integers n with n*sqrt(D) possibly in [lo_val, hi_val], padded by one."""
    s_lo, s_hi = sqrt_bounds(D, 12)
    cands_lo = [lo_val / s_lo, lo_val / s_hi]
    cands_hi = [hi_val / s_lo, hi_val / s_hi]
    return math.floor(min(cands_lo)) - 1, math.ceil(max(cands_hi)) + 1


def _enumerate_quad(scheme: QuadScheme, region: Interval, w=None, closed=None) -> QuadPointSet:
    D = scheme.D
    w = scheme.w if w is None else as_fraction(w)
    closed = scheme.closed if closed is None else closed
    T = region.half
    c = region.center if region.center is not None else QuadInt(0, 0, D)
    s_lo, s_hi = sqrt_bounds(D)
    c_val_lo = c.m + (c.n * s_lo if c.n >= 0 else c.n * s_hi)
    c_val_hi = c.m + (c.n * s_hi if c.n >= 0 else c.n * s_lo)
    # x - star(x) = 2 n sqrt(D), x in [c - T, c + T], star(x) in [-w, w]
    n_lo, n_hi = _n_range(D, (c_val_lo - T - w) / 2, (c_val_hi + T + w) / 2)
    width = 2 * math.ceil(w) + 3
    _check_cap(float(T) * float(w) / math.sqrt(D) + (n_hi - n_lo + 1))
    chunks = []
    step = max(1, 2_000_000 // width)
    wq, wp = w.denominator, w.numerator
    Tq, Tp = T.denominator, T.numerator
    for start in range(n_lo, n_hi + 1, step):
        ns = list(range(start, min(n_hi, start + step - 1) + 1))
        base = _int_array(np.array([floor_mul_sqrt(k, D) for k in ns], dtype=object))
        nn = _int_array(np.array(ns, dtype=object))
        off = np.arange(-math.ceil(w) - 1, math.ceil(w) + 2)
        mm = (base[:, None] + off[None, :]).ravel()
        nn = np.repeat(nn, width)
        # window on star(x) = m - n sqrt(D)
        a_hi = K.sign_arr(K.lin(wq, mm, -wp), K.lin(-wq, nn), D)
        a_lo = K.sign_arr(K.lin(wq, mm, wp), K.lin(-wq, nn), D)
        ok = ((a_hi <= 0) & (a_lo >= 0)) if closed else ((a_hi < 0) & (a_lo > 0))
        dm, dn = mm - c.m, nn - c.n
        r_hi = K.sign_arr(K.lin(Tq, dm, -Tp), K.lin(Tq, dn), D)
        r_lo = K.sign_arr(K.lin(Tq, dm, Tp), K.lin(Tq, dn), D)
        ok &= (r_hi <= 0) & (r_lo >= 0)
        if ok.any():
            chunks.append(np.stack([mm[ok], nn[ok]], axis=1))
    coords = np.concatenate(chunks) if chunks else np.zeros((0, 2), np.int64)
    return QuadPointSet(D, coords, region, unique=True)


def _enumerate_padic(scheme: PadicScheme, region: Ball, w=None, closed=None) -> PadicPointSet:
    p = scheme.p
    w = scheme.w if w is None else as_fraction(w)
    closed = scheme.closed if closed is None else closed
    n = region.level
    c = region.center if region.center is not None else PadicRat(0, 0, p)
    E = max(n, c.k, 0)
    step = p ** (E - n) if n <= E else 1
    A_num = w.numerator * p**E
    A = A_num // w.denominator
    if not closed and A * w.denominator == A_num:
        A -= 1
    _check_cap(2 * A // step + 1)
    r = c.at_exponent(E) % step
    first = -A + ((r - (-A)) % step)
    a = np.arange(first, A + 1, step, dtype=object if A > 2**62 else np.int64)
    return PadicPointSet(p, a, E, region, sorted_=True)


def enumerate_points(scheme, region, *, w=None, closed=None) -> PointSet:
    """Lambda ∩ region, exactly. ``w``/``closed`` override the window."""
    if isinstance(scheme, QuadScheme):
        if not isinstance(region, Interval):
            raise UsageError("quadratic scheme needs an Interval region")
        return _enumerate_quad(scheme, region, w, closed)
    if isinstance(scheme, PadicScheme):
        if not isinstance(region, Ball):
            raise UsageError("p-adic scheme needs a Ball region")
        return _enumerate_padic(scheme, region, w, closed)
    raise UsageError(f"unknown scheme {scheme!r}")


def in_lambda(scheme, x) -> bool:
    return in_lambda_q(scheme, x, 1)


def in_lambda_q(scheme, x, q: int) -> bool:
    """Window test against q*W: membership in the cut-and-project superset of Λ^q."""
    if q < 1:
        raise UsageError("q must be >= 1")
    bound = q * scheme.w
    if isinstance(scheme, QuadScheme):
        s = x.star()
        return quad_abs_leq(s, bound) if scheme.closed else quad_abs_lt(s, bound)
    v = x.arch_abs()
    return v <= bound if scheme.closed else v < bound


def in_lambda_q_mask(scheme, P: PointSet, q: int) -> np.ndarray:
    if isinstance(P, QuadPointSet):
        return P.star_le_mask(q * scheme.w, strict=not scheme.closed)
    return P.arch_le_mask(q * scheme.w, strict=not scheme.closed)


# ------------------------------------------------------------------- axioms

@dataclass
class AxiomReport:
    kind: str
    n_points: int
    n_inner: int
    symmetric: bool
    contains_zero: bool
    min_gap: object
    covering_radius: object
    approx_correction_set: list = field(default_factory=list)
    uncovered_sums: int = 0
    n_sums: int = 0
    mult_closed_violations: int = 0
    mult_products_checked: int = 0

    def to_dict(self) -> dict:
        def enc(v):
            if isinstance(v, (QuadInt, PadicRat)):
                return list(v.coords())
            return v
        d = dict(self.__dict__)
        d["min_gap"] = enc(self.min_gap)
        d["covering_radius"] = enc(self.covering_radius)
        d["approx_correction_set"] = [enc(f) for f in self.approx_correction_set]
        return d


def exact_extreme(m: np.ndarray, n: np.ndarray, D: int, largest: bool) -> int:
    """Index of the minimal (or maximal) value among m + n sqrt(D), exactly."""
    approx = m.astype(np.float64) + n.astype(np.float64) * math.sqrt(D) if m.dtype != object else None
    if approx is not None and np.all(np.isfinite(approx)):
        i = int(np.argmax(approx) if largest else np.argmin(approx))
        s = K.sign_arr(m - m[i], n - n[i], D)
        if np.all(s <= 0) if largest else np.all(s >= 0):
            return i
    vals = [QuadInt(int(a), int(b), D) for a, b in zip(m.tolist(), n.tolist())]
    best = max(range(len(vals)), key=vals.__getitem__) if largest else min(range(len(vals)), key=vals.__getitem__)
    return best


def gaps(P: QuadPointSet) -> np.ndarray:
    return P.coords[1:] - P.coords[:-1]


def quad_covering_gap(P: QuadPointSet) -> QuadInt | None:
    """Largest gap between consecutive points."""
    if len(P) < 2:
        return None
    g = gaps(P)
    i = exact_extreme(g[:, 0], g[:, 1], P.D, largest=True)
    return QuadInt(int(g[i, 0]), int(g[i, 1]), P.D)


def quad_min_gap(P: QuadPointSet) -> QuadInt | None:
    if len(P) < 2:
        return None
    g = gaps(P)
    i = exact_extreme(g[:, 0], g[:, 1], P.D, largest=False)
    return QuadInt(int(g[i, 0]), int(g[i, 1]), P.D)


def padic_min_gap_level(P: PadicPointSet) -> int | None:
    """-max v_p(x - y) over distinct x, y (distance p**level)."""
    if len(P) < 2:
        return None
    a = P.a.astype(object)
    e = 0
    # largest e with a collision mod p**e
    while len(set((a % P.p ** (e + 1)).tolist())) < len(P):
        e += 1
    return P.exp - e


def padic_covering_level(P: PadicPointSet, ball: Ball) -> int | None:
    """Smallest level l such that every coset of p^{-l}Z_p inside `ball` meets P."""
    sub = P.subset(P.ball_mask(ball))
    if len(sub) == 0:
        return None
    E = max(sub.exp, ball.level)
    a = sub.lift(E).a.astype(object)
    lvl = ball.level
    while True:
        mod = P.p ** (E - (lvl - 1))
        inner_classes = P.p ** (ball.level - (lvl - 1))
        if len(set((a % mod).tolist())) < inner_classes:
            return lvl
        lvl -= 1


def _greedy_hitting(feasible: np.ndarray) -> tuple[list[int], int]:
    """Greedy cover of columns by rows; rows are pre-sorted by tie-break order."""
    uncovered = np.ones(feasible.shape[1], dtype=bool)
    chosen = []
    while uncovered.any():
        gain = (feasible & uncovered[None, :]).sum(axis=1)
        best = int(np.argmax(gain))
        if gain[best] == 0:
            break
        chosen.append(best)
        uncovered &= ~feasible[best]
    return chosen, int(uncovered.sum())


def _verify_quad(scheme: QuadScheme, region: Interval, margin) -> AxiomReport:
    D = scheme.D
    P = enumerate_points(scheme, region)
    inner = P.restrict(region.shrink(margin))
    X = inner.coords
    zero_in = bool(P.contains(scheme.zero()))
    symmetric = bool(np.all(P.contains_coords(-inner.m, -inner.n)))
    min_gap = quad_min_gap(inner)
    cov = quad_covering_gap(inner)

    # correction set: every x + y (x, y inner) written as z + f with z in Λ
    S = _unique_rows((X[:, None, :] + X[None, :, :]).reshape(-1, 2))
    bound = 2 * cov.abs_upper() if cov is not None else Fraction(1)
    C = enumerate_points(scheme.with_window(3 * scheme.w, True), Interval(bound))
    cand = sorted(C.points(), key=lambda f: (abs(f), f.m, f.n))
    wq, wp = scheme.w.denominator, scheme.w.numerator
    feas = np.zeros((len(cand), len(S)), dtype=bool)
    for i, f in enumerate(cand):
        # star(s - f) = (s_m - f_m) - (s_n - f_n) sqrt(D)
        dm, dn = S[:, 0] - f.m, S[:, 1] - f.n
        hi = K.sign_arr(wq * dm - wp, -wq * dn, D)
        lo = K.sign_arr(wq * dm + wp, -wq * dn, D)
        feas[i] = ((hi <= 0) & (lo >= 0)) if scheme.closed else ((hi < 0) & (lo > 0))
    chosen, uncovered = _greedy_hitting(feas)
    corr = sorted((cand[i] for i in chosen), key=lambda f: (f, f.m, f.n))

    # multiplicative closure on products landing in the inner region
    m1, n1 = X[:, 0][:, None], X[:, 1][:, None]
    m2, n2 = X[:, 0][None, :], X[:, 1][None, :]
    pm = (m1 * m2 + D * n1 * n2).ravel()
    pn = (m1 * n2 + n1 * m2).ravel()
    prod = QuadPointSet(D, np.stack([pm, pn], axis=1), unique=True, sorted_=True)
    landed = prod.abs_le_mask(region.half - as_fraction(margin))
    bad = landed & ~prod.star_le_mask(scheme.w, strict=not scheme.closed)
    viol, checked = int(bad.sum()), int(landed.sum())
    return AxiomReport("quadratic", len(P), len(inner), symmetric, zero_in, min_gap, cov,
                       corr, uncovered, len(S), viol, checked)


def _verify_padic(scheme: PadicScheme, region: Ball, margin) -> AxiomReport:
    p = scheme.p
    P = enumerate_points(scheme, region)
    inner_ball = region.shrink(int(margin))
    inner = P.restrict(inner_ball)
    E = P.exp
    zero_in = bool(P.contains(scheme.zero()))
    symmetric = bool(np.all(P.contains_numerators(-inner.a)))
    min_gap = padic_min_gap_level(inner)
    cov = padic_covering_level(P, inner_ball)

    a = inner.a.astype(object)
    sums = np.array(sorted(set((a[:, None] + a[None, :]).ravel().tolist())), dtype=object)
    c_lvl = max(cov if cov is not None else 0, 0)
    C = enumerate_points(scheme.with_window(3 * scheme.w, True), Ball(c_lvl))
    cand = sorted(C.points(), key=lambda f: (f.arch_abs(), f.to_fraction()))
    Ec = max(E, C.exp)
    s_e = sums * p ** (Ec - E)
    wq, wp = scheme.w.denominator, scheme.w.numerator
    feas = np.zeros((len(cand), len(sums)), dtype=bool)
    for i, f in enumerate(cand):
        d = np.abs(s_e - f.at_exponent(Ec)) * wq
        lim = wp * p**Ec
        feas[i] = np.asarray((d <= lim) if scheme.closed else (d < lim), dtype=bool)
    chosen, uncovered = _greedy_hitting(feas)
    corr = sorted((cand[i] for i in chosen))

    # products x*y that land in the inner ball
    v = valuations(inner.a, p)
    nz = inner.a != 0
    an = a[nz]
    vn = v[nz]
    prod = (an[:, None] * an[None, :]).ravel()
    pexp = (2 * E - vn[:, None] - vn[None, :]).ravel()
    in_ball = pexp <= inner_ball.level
    lhs = np.abs(prod[in_ball]) * wq
    rhs = wp * p ** (2 * E)
    bad = np.asarray((lhs > rhs) if scheme.closed else (lhs >= rhs), dtype=bool)
    return AxiomReport("padic", len(P), len(inner), symmetric, zero_in, min_gap, cov,
                       corr, uncovered, len(sums), int(bad.sum()), int(in_ball.sum()))


def verify_axioms(scheme, region, margin) -> AxiomReport:
    """Finite-scale check of the approximate-lattice axioms on the inner region."""
    if isinstance(scheme, QuadScheme):
        return _verify_quad(scheme, region, as_fraction(margin))
    return _verify_padic(scheme, region, int(margin))


def covering_gap_bound(scheme: QuadScheme, sample_half=None) -> Fraction:
    """Rational upper bound on the largest gap of Λ, measured on a sample interval."""
    half = as_fraction(sample_half) if sample_half is not None else Fraction(max(50, int(20 / scheme.w) + 10))
    g = quad_covering_gap(enumerate_points(scheme, Interval(half)))
    return round_up(g.abs_upper()) if g is not None else half


@functools.lru_cache(maxsize=64)
def _cached_cov(scheme: QuadScheme) -> Fraction:
    return covering_gap_bound(scheme)


def lambda_covering_bound(scheme) -> Fraction:
    if isinstance(scheme, QuadScheme):
        return _cached_cov(scheme)
    return Fraction(0)
