"""Gap-set searches: dilated patterns, arithmetic progressions, multiple
recurrence along endomorphisms, exact sumsets and syndeticity monitoring.

Every scan reduces to one primitive: for each candidate lambda, count the base
points x of P_o (inside an inner region) such that x + d lies in P_o for each
displacement d in a per-lambda list. The displacement lists are
    dilation:           lambda * f,        f in F
    integer multiples:  k * lambda,        k = 1..r
    endomorphisms:      alpha_k(lambda)
The inner region is shrunk from P_o's region by the largest displacement, so
every probe lands where P_o is completely known.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels as K
from .errors import CapacityError, UsageError
from .exactnum import PadicRat, QuadInt, as_fraction, round_up
from .scheme import (Ball, Interval, PadicPointSet, PadicScheme, PointSet, QuadPointSet, QuadScheme,
                     _int_array, _unique_rows, exact_extreme, get_cap, lambda_covering_bound)


# ------------------------------------------------------------------- types

@dataclass(frozen=True)
class PatternQuery:
    F: tuple = ()
    mode: str = "dilation"
    r: int = 1

    def __post_init__(self):
        if self.mode not in ("dilation", "integer_multiples"):
            raise UsageError(f"unknown pattern mode {self.mode!r}")
        if self.mode == "dilation":
            if not self.F:
                raise UsageError("F must be nonempty")
            if len(set(self.F)) != len(self.F):
                raise UsageError("F elements must be distinct")
        if self.r < 1:
            raise UsageError("r must be >= 1")

    def describe(self) -> dict:
        if self.mode == "dilation":
            return {"mode": "dilation", "F": [list(f.coords()) for f in self.F]}
        return {"mode": "integer_multiples", "r": self.r}


@dataclass(frozen=True)
class Endo:
    """An additive endomorphism: multiplication by a ring element, or by an integer."""

    kind: str
    c: object = None
    k: int = 1

    @classmethod
    def mult_by(cls, c) -> Endo:
        return cls("mult", c=c)

    @classmethod
    def int_scale(cls, k: int) -> Endo:
        return cls("scale", k=int(k))

    def __call__(self, x):
        return x * self.c if self.kind == "mult" else x * self.k

    def describe(self) -> str:
        if self.kind == "mult":
            return f"mult_by({','.join(map(str, self.c.coords()))})"
        return f"int_scale({self.k})"


def is_additive(endo: Endo, samples: list, rng: np.random.Generator, trials: int = 200) -> bool:
    if len(samples) < 1:
        return True
    for _ in range(trials):
        x = samples[int(rng.integers(len(samples)))]
        y = samples[int(rng.integers(len(samples)))]
        if endo(x + y) != endo(x) + endo(y):
            return False
    return True


# ----------------------------------------------------------- displacements

def _quad_mul_coords(lm, ln, fm, fn, D):
    return lm * fm + D * ln * fn, lm * fn + ln * fm


def _quad_disp(lams: QuadPointSet, maps) -> tuple[np.ndarray, np.ndarray]:
    """maps: list of ('mult', (fm, fn)) or ('scale', k)."""
    lm, ln = lams.m.astype(object), lams.n.astype(object)
    cols_m, cols_n = [], []
    for kind, val in maps:
        if kind == "mult":
            dm, dn = _quad_mul_coords(lm, ln, val[0], val[1], lams.D)
        else:
            dm, dn = lm * val, ln * val
        cols_m.append(dm)
        cols_n.append(dn)
    L = len(lams)
    dm = _int_array(np.stack(cols_m, axis=1)) if cols_m else np.zeros((L, 0), np.int64)
    dn = _int_array(np.stack(cols_n, axis=1)) if cols_n else np.zeros((L, 0), np.int64)
    return dm.reshape(L, -1), dn.reshape(L, -1)


def _padic_disp(lams: PadicPointSet, maps, E: int) -> np.ndarray:
    """Numerators over p**E of each displacement; raises if one leaves p^{-E}Z_p."""
    p = lams.p
    la = lams.a.astype(object)
    cols = []
    for kind, val in maps:
        if kind == "mult":
            f = val
            num = la * f.a
            exp = lams.exp + f.k
        else:
            num = la * val
            exp = lams.exp
        if exp <= E:
            cols.append(num * p ** (E - exp))
        else:
            div = p ** (exp - E)
            bad = np.array([int(v) % div != 0 for v in num.tolist()], dtype=bool)
            if bad.any():
                i = int(np.flatnonzero(bad)[0])
                raise UsageError(f"displacement for lambda={lams.points()[i]} leaves the ball of level {E}; "
                                 "enlarge the region (margin violation)")
            cols.append(np.array([int(v) // div for v in num.tolist()], dtype=object))
    L = len(lams)
    if not cols:
        return np.zeros((L, 0), np.int64)
    return _int_array(np.stack(cols, axis=1)).reshape(L, -1)


def _query_maps(query: PatternQuery | None, endos: list | None, r: int | None):
    if endos is not None:
        maps = []
        for e in endos:
            if e.kind == "mult":
                maps.append(("mult", e.c.coords() if isinstance(e.c, QuadInt) else e.c))
            else:
                maps.append(("scale", e.k))
        return maps
    if r is not None:
        return [("scale", k) for k in range(1, r + 1)]
    if query.mode == "dilation":
        return [("mult", f.coords() if isinstance(f, QuadInt) else f) for f in query.F]
    return [("scale", k) for k in range(1, query.r + 1)]


def max_displacement(dm: np.ndarray, dn: np.ndarray, D: int) -> Fraction:
    if dm.size == 0:
        return Fraction(0)
    fm, fn = dm.ravel(), dn.ravel()
    sgn = K.sign_arr(fm, fn, D)
    am, an = np.where(sgn < 0, -fm, fm), np.where(sgn < 0, -fn, fn)
    i = exact_extreme(am, an, D, largest=True)
    return round_up(QuadInt(int(am[i]), int(an[i]), D).abs_upper())


# ------------------------------------------------------------------ reports

@dataclass
class GapSetReport:
    kind: str
    query: dict
    inner: object
    inner_measure: Fraction
    lambdas: list
    base_counts: np.ndarray
    witnesses: list
    displacements: list = field(default_factory=list)

    header = ["lambda_coords", "base_count", "inner_measure_num", "inner_measure_den"]

    @property
    def gap_points(self) -> list:
        return [lam for lam, c in zip(self.lambdas, self.base_counts) if c > 0]

    @property
    def empty(self) -> bool:
        return not np.any(self.base_counts > 0)

    def rows(self) -> list[tuple]:
        return [(tuple(lam.coords()), int(c)) for lam, c in zip(self.lambdas, self.base_counts)]

    def csv_rows(self) -> list[list]:
        mn, md = self.inner_measure.numerator, self.inner_measure.denominator
        return [[";".join(map(str, lam.coords())), int(c), mn, md]
                for lam, c in zip(self.lambdas, self.base_counts)]

    def empirical_c(self) -> Fraction | None:
        pos = [int(c) for c in self.base_counts if c > 0]
        return Fraction(min(pos)) / self.inner_measure if pos else None


def _default_inner(P_o: PointSet, scheme, M: Fraction, inner):
    if isinstance(P_o, QuadPointSet):
        reg = P_o.region
        if reg is None or reg.center is not None:
            raise UsageError("P_o must carry a region centred at 0")
        if inner is None:
            cov = lambda_covering_bound(scheme) if scheme is not None else Fraction(0)
            return reg.shrink(M + cov)
        inner = inner if isinstance(inner, Interval) else Interval(inner)
        if inner.half + M > reg.half:
            raise UsageError(f"inner half-length {inner.half} plus displacement {float(M):.6g} exceeds "
                             f"the region {reg.half} (margin violation)")
        return inner
    reg = P_o.region
    if reg is None:
        raise UsageError("P_o must carry a region")
    return reg if inner is None else inner


def _scan(P_o: PointSet, lams: PointSet, maps, scheme, inner, desc: dict, kind: str) -> GapSetReport:
    if isinstance(P_o, QuadPointSet):
        if not isinstance(lams, QuadPointSet) or lams.D != P_o.D:
            raise UsageError("lambda set and P_o must live in the same ring")
        dm, dn = _quad_disp(lams, maps)
        M = max_displacement(dm, dn, P_o.D)
        reg_in = _default_inner(P_o, scheme, M, inner)
        bases = P_o.subset(P_o.abs_le_mask(reg_in.half))
        if len(bases) * dm.shape[0] * max(1, dm.shape[1]) > 50 * get_cap():
            raise CapacityError("scan size exceeds the capacity cap")
        # base itself must lie in P_o: the bases are points of P_o, so only displacements are probed
        table, n_lo, base, j_lo = P_o.index
        if len(P_o) == 0:
            counts = np.zeros(len(lams), np.int64)
            first = np.full(len(lams), -1, np.int64)
        else:
            counts, first = K.count_bases_grid(bases.m, bases.n, dm, dn, table, n_lo, base, j_lo)
        wit = [QuadInt(int(bases.m[i]), int(bases.n[i]), P_o.D) if i >= 0 else None for i in first.tolist()]
        meas = reg_in.measure()
        disps = [[QuadInt(int(a), int(b), P_o.D) for a, b in zip(rm, rn)] for rm, rn in zip(dm.tolist(), dn.tolist())]
        return GapSetReport(kind, desc, reg_in, meas, lams.points(), counts, wit, disps)

    if not isinstance(lams, PadicPointSet) or lams.p != P_o.p:
        raise UsageError("lambda set and P_o must live in the same ring")
    reg_in = _default_inner(P_o, scheme, Fraction(0), inner)
    E = max(P_o.exp, reg_in.level)
    Pe = P_o.lift(E)
    da = _padic_disp(lams, maps, E)
    if E > reg_in.level and da.size:
        mod = P_o.p ** (E - reg_in.level)
        bad = np.flatnonzero([any(int(v) % mod for v in row) for row in da.tolist()])
        if bad.size:
            raise UsageError(f"displacement for lambda={lams.points()[int(bad[0])]} leaves the ball of level "
                             f"{reg_in.level} (margin violation)")
    bases = Pe.subset(Pe.ball_mask(reg_in))
    if len(Pe) == 0:
        counts = np.zeros(len(lams), np.int64)
        first = np.full(len(lams), -1, np.int64)
    else:
        table, a_lo = Pe.index
        counts, first = K.count_bases_line(bases.a, da, table, a_lo)
    wit = [PadicRat(int(bases.a[i]), E, P_o.p) if i >= 0 else None for i in first.tolist()]
    disps = [[PadicRat(int(v), E, P_o.p) for v in row] for row in da.tolist()]
    return GapSetReport(kind, desc, reg_in, reg_in.measure(P_o.p), lams.points(), counts, wit, disps)


# --------------------------------------------------------------- operations

def find_base_points(P_o: PointSet, lam, query: PatternQuery, *, scheme=None, inner=None) -> list:
    """All base points x in the inner region with x + lam*f in P_o for f in F
    (or x + k*lam, k = 1..r)."""
    lams = _singleton(P_o, lam)
    rep = _scan(P_o, lams, _query_maps(query, None, None), scheme, inner, query.describe(), "bases")
    if rep.base_counts[0] == 0:
        return []
    return _bases_for(P_o, rep.inner, rep.displacements[0])


def _singleton(P_o: PointSet, lam) -> PointSet:
    if isinstance(P_o, QuadPointSet):
        return QuadPointSet(P_o.D, np.array([[lam.m, lam.n]], dtype=object))
    return PadicPointSet.from_points(P_o.p, [lam])


def _bases_for(P_o: PointSet, inner, disps: list) -> list:
    if isinstance(P_o, QuadPointSet):
        bases = P_o.subset(P_o.abs_le_mask(inner.half))
        ok = np.ones(len(bases), dtype=bool)
        for d in disps:
            ok &= P_o.contains_coords(bases.m + d.m, bases.n + d.n)
        return bases.subset(ok).points()
    E = max(P_o.exp, inner.level)
    Pe = P_o.lift(E)
    bases = Pe.subset(Pe.ball_mask(inner))
    ok = np.ones(len(bases), dtype=bool)
    for d in disps:
        ok &= Pe.contains_numerators(bases.a + d.at_exponent(E))
    return bases.subset(ok).points()


def gap_set(P_o: PointSet, lambdas: PointSet, query: PatternQuery, *, scheme=None, inner=None) -> GapSetReport:
    """S_F = {lambda : some base x has x + lambda*F inside P_o}, with base counts."""
    return _scan(P_o, lambdas, _query_maps(query, None, None), scheme, inner, query.describe(), "gapset")


def ap_scan(P_o: PointSet, lambdas: PointSet, r: int, *, scheme=None, inner=None) -> GapSetReport:
    """Base points of P_o ∩ (P_o - lambda) ∩ ... ∩ (P_o - r*lambda)."""
    if r < 1:
        raise UsageError("r must be >= 1")
    return _scan(P_o, lambdas, _query_maps(None, None, r), scheme, inner,
                 {"mode": "integer_multiples", "r": r}, "apscan")


@dataclass
class EndoCheck:
    ok: bool
    max_star: object
    violator: object = None


def endo_check(endo: Endo, lambdas: PointSet, q: int, scheme) -> EndoCheck:
    """Does alpha map every lambda into the q*W window superset of Λ^q?"""
    if q < 1:
        raise UsageError("q must be >= 1")
    if len(lambdas) == 0:
        return EndoCheck(True, Fraction(0))
    bound = q * scheme.w
    if isinstance(lambdas, QuadPointSet):
        dm, dn = _quad_disp(lambdas, _query_maps(None, [endo], None))
        sm, sn = dm[:, 0], -dn[:, 0]
        sgn = K.sign_arr(sm, sn, lambdas.D)
        am, an = np.where(sgn < 0, -sm, sm), np.where(sgn < 0, -sn, sn)
        i = exact_extreme(am, an, lambdas.D, largest=True)
        max_star = QuadInt(int(am[i]), int(an[i]), lambdas.D)
        q_, p_ = bound.denominator, bound.numerator
        hi = K.sign_arr(K.lin(q_, sm, -p_), K.lin(q_, sn), lambdas.D)
        lo = K.sign_arr(K.lin(q_, sm, p_), K.lin(q_, sn), lambdas.D)
        inside = ((hi <= 0) & (lo >= 0)) if scheme.closed else ((hi < 0) & (lo > 0))
    else:
        vals = [endo(x) for x in lambdas.points()]
        absv = [v.arch_abs() for v in vals]
        max_star = max(absv)
        inside = np.array([(a <= bound) if scheme.closed else (a < bound) for a in absv], dtype=bool)
    if inside.all():
        return EndoCheck(True, max_star)
    j = int(np.flatnonzero(~inside)[0])
    return EndoCheck(False, max_star, lambdas.points()[j])


def multi_recurrence_scan(P_o: PointSet, lambdas: PointSet, endos: list, q: int, *, scheme,
                          inner=None, rng: np.random.Generator | None = None) -> GapSetReport:
    """Base points of P_o ∩ ⋂_k (P_o - alpha_k(lambda))."""
    rng = rng if rng is not None else np.random.default_rng(0)
    sample = lambdas.points()
    for e in endos:
        if not is_additive(e, sample, rng):
            raise UsageError(f"endomorphism {e.describe()} failed the additivity check")
        chk = endo_check(e, lambdas, q, scheme)
        if not chk.ok:
            raise UsageError(f"endomorphism {e.describe()} maps lambda={chk.violator} outside the "
                             f"window of Λ^{q} (precondition)")
    return _scan(P_o, lambdas, _query_maps(None, endos, None), scheme, inner,
                 {"mode": "endomorphisms", "endos": [e.describe() for e in endos], "q": q}, "multirec")


def recheck(report: GapSetReport, P_o: PointSet, full: bool = False) -> tuple[int, int]:
    """Independent verification of the reported witnesses by plain set
    membership on exact ring elements (no grid index). With ``full`` the base
    counts are recomputed as well. Returns (checked, failures)."""
    members = set(P_o.points())
    inner = report.inner
    checked = failures = 0
    for lam, cnt, wit, disps in zip(report.lambdas, report.base_counts, report.witnesses, report.displacements):
        if cnt > 0:
            checked += 1
            if wit is None or wit not in members or not inner.contains(wit):
                failures += 1
                continue
            if not all((wit + d) in members for d in disps):
                failures += 1
                continue
        if full:
            n = sum(1 for x in members if inner.contains(x) and all((x + d) in members for d in disps))
            if n != cnt:
                failures += 1
    return checked, failures


# ------------------------------------------------------------------- sumset

def sumset(P: PointSet, q: int) -> PointSet:
    """Exact q-fold sumset P + ... + P by iterated pairwise sums."""
    if q < 1:
        raise UsageError("q must be >= 1")
    if isinstance(P, QuadPointSet):
        S = P.coords
        for _ in range(q - 1):
            if len(S) * len(P) > get_cap():
                raise CapacityError("sumset exceeds the capacity cap")
            S = _unique_rows((S[:, None, :] + P.coords[None, :, :]).reshape(-1, 2))
        return QuadPointSet(P.D, S, unique=True)
    S = P.a
    for _ in range(q - 1):
        if len(S) * len(P) > get_cap():
            raise CapacityError("sumset exceeds the capacity cap")
        S = np.unique((S[:, None] + P.a[None, :]).ravel())
    return PadicPointSet(P.p, S, P.exp, sorted_=True)


# ------------------------------------------------------------- syndeticity

@dataclass
class SyndRow:
    scale: object
    covering_radius: object
    witness: object
    K_size: int
    infinite: bool = False

    def csv_row(self) -> list:
        r = self.covering_radius
        if self.infinite:
            rad = "inf"
        elif isinstance(r, QuadInt):
            rad = f"{r.m};{r.n}"
        elif r is None:
            rad = "-inf"
        else:
            rad = str(r)
        return [str(self.scale), rad, self.K_size]


@dataclass
class SyndeticityReport:
    rows: list
    K_candidate: list

    header = ["scale", "covering_radius", "K_size"]

    def radii(self) -> list:
        return [r.covering_radius for r in self.rows]


def _quad_nearest(S_mask: np.ndarray, L: QuadPointSet):
    """For every lambda, the index of the nearest point of S (exact), or -1."""
    N = len(L)
    idx = np.arange(N)
    prev = np.where(S_mask, idx, -1)
    prev = np.maximum.accumulate(prev)
    nxt = np.where(S_mask, idx, N)
    nxt = np.minimum.accumulate(nxt[::-1])[::-1]
    m, n = L.m, L.n
    has_p, has_n = prev >= 0, nxt < N
    pc, nc = np.clip(prev, 0, N - 1), np.clip(nxt, 0, N - 1)
    # d_prev = lam - s_prev >= 0, d_next = s_next - lam >= 0
    dpm, dpn = m - m[pc], n - n[pc]
    dnm, dnn = m[nc] - m, n[nc] - n
    cmpv = K.sign_arr(dpm - dnm, dpn - dnn, L.D)  # sign(d_prev - d_next)
    # on ties prefer the difference lam - s with lexicographically smaller coords
    tie_pick_prev = (dpm < -dnm) | ((dpm == -dnm) & (dpn <= -dnn))
    use_prev = has_p & (~has_n | (cmpv < 0) | ((cmpv == 0) & tie_pick_prev))
    near = np.where(use_prev, pc, np.where(has_n, nc, -1))
    return near


def syndeticity(S: PointSet, lambdas: PointSet, margin, scale=None) -> SyndeticityReport:
    """Covering radius of S inside the inner part of the lambda region, and the
    differences lambda - s realising it."""
    if isinstance(lambdas, QuadPointSet):
        L = lambdas
        S_mask = S.contains_coords(L.m, L.n) if len(S) else np.zeros(len(L), bool)
        if len(S) and int(S_mask.sum()) != len(S):
            raise UsageError("S must be a subset of the lambda region")
        reg = L.region if L.region is not None else Interval(0)
        inner_mask = L.abs_le_mask(reg.half - as_fraction(margin))
        if len(S) == 0:
            return SyndeticityReport([SyndRow(scale, None, None, 0, infinite=True)], [])
        near = _quad_nearest(S_mask, L)
        sel = np.flatnonzero(inner_mask)
        if sel.size == 0:
            return SyndeticityReport([SyndRow(scale, QuadInt(0, 0, L.D), None, 0)], [])
        km = L.m[sel] - L.m[near[sel]]
        kn = L.n[sel] - L.n[near[sel]]
        sg = K.sign_arr(km, kn, L.D)
        am, an = np.where(sg < 0, -km, km), np.where(sg < 0, -kn, kn)
        i = exact_extreme(am, an, L.D, largest=True)
        radius = QuadInt(int(am[i]), int(an[i]), L.D)
        wit = QuadInt(int(L.m[sel[i]]), int(L.n[sel[i]]), L.D)
        uniq = _unique_rows(np.stack([km, kn], axis=1))
        Ks = sorted((QuadInt(int(a), int(b), L.D) for a, b in uniq.tolist()), key=lambda k: (abs(k), k.m, k.n))
        return SyndeticityReport([SyndRow(scale, radius, wit, len(Ks))], Ks)

    L = lambdas
    reg = L.region if L.region is not None else Ball(L.exp)
    inner = reg.shrink(int(margin))
    E = max(L.exp, S.exp if len(S) else 0)
    La = L.lift(E)
    lam_a = La.subset(La.ball_mask(inner)).a.astype(object)
    if len(S) == 0:
        return SyndeticityReport([SyndRow(scale, None, None, 0, infinite=True)], [])
    s_a = S.lift(E).a.astype(object)
    p = L.p
    # largest e with s ≡ lam (mod p^e); exact equality first
    span = int(max(abs(int(v)) for v in list(lam_a) + list(s_a))) * 2 + 1
    e_top = 0
    while p**e_top <= span:
        e_top += 1
    levels = {}
    partner = {}
    s_list = [int(v) for v in s_a.tolist()]
    s_set = set(s_list)
    for lam in lam_a.tolist():
        if lam in s_set:
            levels[lam] = None
            partner[lam] = lam
    todo = [int(v) for v in lam_a.tolist() if int(v) not in levels]
    for e in range(e_top, -1, -1):
        if not todo:
            break
        mod = p**e
        first_by_res = {}
        for s in s_list:
            first_by_res.setdefault(s % mod, s)
        rest = []
        for lam in todo:
            s = first_by_res.get(lam % mod)
            if s is None:
                rest.append(lam)
            else:
                levels[lam] = E - e
                partner[lam] = s
        todo = rest
    worst, wit = None, None
    for lam in lam_a.tolist():
        lv = levels[int(lam)]
        if lv is not None and (worst is None or lv > worst):
            worst, wit = lv, lam
    Ks = sorted({PadicRat(int(l) - partner[int(l)], E, p) for l in lam_a.tolist()},
                key=lambda k: (k.level() if k.level() is not None else -10**9, k.to_fraction()))
    wit_pt = PadicRat(int(wit), E, p) if wit is not None else None
    return SyndeticityReport([SyndRow(scale, worst, wit_pt, len(Ks))], Ks)


def syndeticity_trend(items) -> SyndeticityReport:
    """items: iterable of (scale, S, lambdas, margin); one row per scale."""
    rows, last = [], []
    for scale, S, lams, margin in items:
        rep = syndeticity(S, lams, margin, scale)
        rows.extend(rep.rows)
        last = rep.K_candidate
    return SyndeticityReport(rows, last)
