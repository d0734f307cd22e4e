"""Hot inner loops: hash-grid membership probes, base-point counting, exact
sliding windows and the counter-based hash.

Each kernel has a numba version and a pure-numpy version with identical
results. The numba path is used when numba imports and the environment
variable ``APPROXLAT_BACKEND`` is not ``numpy``. Integer overflow is never
allowed to happen silently: callers go through the wrappers at the bottom,
which check magnitudes and route oversized inputs to the numpy path on
``object`` arrays (Python ints, arbitrary precision).
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

# the TBB layer warns on older system TBB builds; workqueue is always available
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

_BACKEND = os.environ.get("APPROXLAT_BACKEND", "numba" if HAVE_NUMBA else "numpy").lower()
if _BACKEND not in ("numba", "numpy"):
    raise ValueError(f"APPROXLAT_BACKEND must be 'numba' or 'numpy', got {_BACKEND!r}")
if _BACKEND == "numba" and not HAVE_NUMBA:
    _BACKEND = "numpy"

_WORKERS = 1


def backend() -> str:
    return _BACKEND


def set_backend(name: str) -> None:
    global _BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(name)
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _BACKEND = name


def set_workers(n: int | None) -> None:
    global _WORKERS
    n = (os.cpu_count() or 1) if n is None else max(1, int(n))
    _WORKERS = n
    if HAVE_NUMBA:
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def workers() -> int:
    return _WORKERS


def _fits(bound: int, *arrays) -> bool:
    for a in arrays:
        if a.dtype == object:
            return False
        if a.size and int(np.abs(a).max()) >= bound:
            return False
    return True


def as_obj(a: np.ndarray) -> np.ndarray:
    return a.astype(object) if a.dtype != object else a


def lin(q: int, a: np.ndarray, c: int = 0) -> np.ndarray:
    """q * a + c elementwise, switching to Python ints when int64 would overflow."""
    a = np.asarray(a)
    big = abs(int(q)) * (int(np.abs(a).max()) + 1 if a.size and a.dtype != object else 1) + abs(int(c))
    if a.dtype == object or big >= 2**62:
        return as_obj(a) * int(q) + int(c)
    return a * int(q) + int(c)


# ---------------------------------------------------------------- exact sign

def sign_arr(a: np.ndarray, b: np.ndarray, D: int) -> np.ndarray:
    """Elementwise sign of a + b*sqrt(D), exact. Returns int8 array."""
    a = np.asarray(a)
    b = np.asarray(b)
    if not _fits(2**31 // max(1, int(np.sqrt(D)) + 1), a, b):
        a, b = as_obj(a), as_obj(b)
    sa = np.sign(a)
    sb = np.sign(b)
    dom = np.sign(a * a - D * (b * b))
    out = np.where(sa == sb, sa, np.where(dom > 0, sa, np.where(dom < 0, sb, 0)))
    return out.astype(np.int8)


# ------------------------------------------------------------ numba kernels

if HAVE_NUMBA:

    @njit(cache=True)
    def _qsign(a, b, D):
        sa = 1 if a > 0 else (-1 if a < 0 else 0)
        sb = 1 if b > 0 else (-1 if b < 0 else 0)
        if sa == sb:
            return sa
        dom = a * a - D * b * b
        if dom > 0:
            return sa
        if dom < 0:
            return sb
        return 0

    @njit(cache=True)
    def _grid_has(table, n_lo, base, j_lo, m, n):
        i = n - n_lo
        if i < 0 or i >= table.shape[0]:
            return False
        j = m - base[i] - j_lo
        if j < 0 or j >= table.shape[1]:
            return False
        return table[i, j]

    @njit(cache=True)
    def _grid_probe_nb(table, n_lo, base, j_lo, qm, qn):
        out = np.zeros(qm.shape[0], dtype=np.bool_)
        for t in range(qm.shape[0]):
            out[t] = _grid_has(table, n_lo, base, j_lo, qm[t], qn[t])
        return out

    @njit(cache=True, parallel=True)
    def _count_grid_nb(bm, bn, dm, dn, table, n_lo, base, j_lo):
        L, K = dm.shape
        counts = np.zeros(L, dtype=np.int64)
        first = np.full(L, -1, dtype=np.int64)
        for l in prange(L):
            c = 0
            f = -1
            for i in range(bm.shape[0]):
                ok = True
                for k in range(K):
                    if not _grid_has(table, n_lo, base, j_lo, bm[i] + dm[l, k], bn[i] + dn[l, k]):
                        ok = False
                        break
                if ok:
                    if f < 0:
                        f = i
                    c += 1
            counts[l] = c
            first[l] = f
        return counts, first

    @njit(cache=True, parallel=True)
    def _count_line_nb(ba, da, table, a_lo):
        L, K = da.shape
        W = table.shape[0]
        counts = np.zeros(L, dtype=np.int64)
        first = np.full(L, -1, dtype=np.int64)
        for l in prange(L):
            c = 0
            f = -1
            for i in range(ba.shape[0]):
                ok = True
                for k in range(K):
                    j = ba[i] + da[l, k] - a_lo
                    if j < 0 or j >= W or not table[j]:
                        ok = False
                        break
                if ok:
                    if f < 0:
                        f = i
                    c += 1
            counts[l] = c
            first[l] = f
        return counts, first

    @njit(cache=True)
    def _window_hi_nb(m, n, D, tp, tq):
        N = m.shape[0]
        hi = np.empty(N, dtype=np.int64)
        j = 0
        for i in range(N):
            if j < i:
                j = i
            while j + 1 < N and _qsign(tq * (m[j + 1] - m[i]) - tp, tq * (n[j + 1] - n[i]), D) <= 0:
                j += 1
            hi[i] = j
        return hi

    @njit(cache=True)
    def _splitmix_nb(x):
        out = np.empty(x.shape[0], dtype=np.uint64)
        for i in range(x.shape[0]):
            z = x[i] + np.uint64(0x9E3779B97F4A7C15)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
            out[i] = z ^ (z >> np.uint64(31))
        return out


# ------------------------------------------------------------ numpy kernels

def _grid_probe_np(table, n_lo, base, j_lo, qm, qn):
    qm = np.asarray(qm)
    qn = np.asarray(qn)
    out = np.zeros(qm.shape, dtype=bool)
    i = qn - n_lo
    ok = (i >= 0) & (i < table.shape[0])
    if not ok.any():
        return out
    ii = i[ok].astype(np.int64)
    j = qm[ok] - base[ii] - j_lo
    ok2 = (j >= 0) & (j < table.shape[1])
    sub = np.zeros(ii.shape, dtype=bool)
    sub[ok2] = table[ii[ok2], j[ok2].astype(np.int64)]
    out[ok] = sub
    return out


def _chunked(fn, L, *args):
    """Run fn over row-chunks [lo, hi) of the L lambdas, concatenated in order."""
    w = _WORKERS
    if w <= 1 or L < 2 * w:
        return fn(0, L, *args)
    bounds = np.linspace(0, L, w + 1).astype(int)
    with ThreadPoolExecutor(max_workers=w) as ex:
        parts = list(ex.map(lambda lh: fn(lh[0], lh[1], *args), zip(bounds[:-1], bounds[1:])))
    return (np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]))


def _count_grid_rows(lo, hi, bm, bn, dm, dn, table, n_lo, base, j_lo):
    counts = np.zeros(hi - lo, dtype=np.int64)
    first = np.full(hi - lo, -1, dtype=np.int64)
    for l in range(lo, hi):
        alive = np.ones(bm.shape[0], dtype=bool)
        for k in range(dm.shape[1]):
            idx = np.flatnonzero(alive)
            if idx.size == 0:
                break
            hit = _grid_probe_np(table, n_lo, base, j_lo, bm[idx] + dm[l, k], bn[idx] + dn[l, k])
            alive[idx[~hit]] = False
        nz = np.flatnonzero(alive)
        counts[l - lo] = nz.size
        first[l - lo] = nz[0] if nz.size else -1
    return counts, first


def _count_grid_np(bm, bn, dm, dn, table, n_lo, base, j_lo):
    return _chunked(_count_grid_rows, dm.shape[0], bm, bn, dm, dn, table, n_lo, base, j_lo)


def _count_line_rows(lo, hi, ba, da, table, a_lo):
    W = table.shape[0]
    counts = np.zeros(hi - lo, dtype=np.int64)
    first = np.full(hi - lo, -1, dtype=np.int64)
    for l in range(lo, hi):
        alive = np.ones(ba.shape[0], dtype=bool)
        for k in range(da.shape[1]):
            idx = np.flatnonzero(alive)
            if idx.size == 0:
                break
            j = ba[idx] + da[l, k] - a_lo
            inr = (j >= 0) & (j < W)
            hit = np.zeros(idx.size, dtype=bool)
            hit[inr] = table[j[inr].astype(np.int64)]
            alive[idx[~hit]] = False
        nz = np.flatnonzero(alive)
        counts[l - lo] = nz.size
        first[l - lo] = nz[0] if nz.size else -1
    return counts, first


def _count_line_np(ba, da, table, a_lo):
    return _chunked(_count_line_rows, da.shape[0], ba, da, table, a_lo)


def _window_hi_np(m, n, D, tp, tq):
    """For each i, the largest j with x_j - x_i <= t; binary search, exact."""
    N = m.shape[0]
    lo = np.arange(N)
    hi = np.full(N, N - 1)
    # invariant: answer in [lo, hi], x_lo - x_i <= t holds trivially at lo = i
    while True:
        active = lo < hi
        if not active.any():
            return lo.astype(np.int64)
        mid = (lo + hi + 1) // 2
        i = np.arange(N)
        s = sign_arr(lin(tq, m[mid] - m[i], -tp), lin(tq, n[mid] - n[i]), D)
        good = (s <= 0) & active
        lo = np.where(good, mid, lo)
        hi = np.where(active & ~good, mid - 1, hi)


_U64 = np.uint64


def _splitmix_np(x):
    with np.errstate(over="ignore"):
        z = x + _U64(0x9E3779B97F4A7C15)
        z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
        return z ^ (z >> _U64(31))


# ---------------------------------------------------------------- wrappers

def _use_numba(*arrays) -> bool:
    return _BACKEND == "numba" and _fits(2**62, *arrays)


def grid_probe(table, n_lo, base, j_lo, qm, qn):
    qm = np.asarray(qm)
    qn = np.asarray(qn)
    if _use_numba(qm, qn, base):
        return _grid_probe_nb(table, n_lo, base, j_lo, qm.astype(np.int64), qn.astype(np.int64))
    return _grid_probe_np(table, n_lo, base, j_lo, qm, qn)


def count_bases_grid(bm, bn, dm, dn, table, n_lo, base, j_lo):
    """Per lambda row l: number of bases i with (b_i + d_{l,k}) in the grid for
    all k, and the smallest such i (-1 if none)."""
    if dm.shape[0] == 0:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    if _use_numba(bm, bn, dm, dn, base) and _fits(2**61, bm, bn, dm, dn):
        return _count_grid_nb(bm, bn, dm, dn, table, n_lo, base, j_lo)
    return _count_grid_np(bm, bn, dm, dn, table, n_lo, base, j_lo)


def count_bases_line(ba, da, table, a_lo):
    if da.shape[0] == 0:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    if _use_numba(ba, da) and _fits(2**61, ba, da, np.array([a_lo])):
        return _count_line_nb(ba, da, table, a_lo)
    return _count_line_np(ba, da, table, a_lo)


def window_hi(m, n, D: int, tp: int, tq: int):
    """Sorted points x_i = m_i + n_i sqrt(D): last index j >= i with x_j - x_i <= tp/tq."""
    m = np.asarray(m)
    n = np.asarray(n)
    if m.size == 0:
        return np.zeros(0, np.int64)
    spread = int(np.abs(m).max()) * 2 * tq + abs(tp) if m.dtype != object else None
    bound = 2**31 // (int(np.sqrt(D)) + 2)
    if (_BACKEND == "numba" and spread is not None and spread < bound
            and int(np.abs(n).max()) * 2 * tq < bound):
        return _window_hi_nb(m.astype(np.int64), n.astype(np.int64), D, tp, tq)
    return _window_hi_np(m, n, D, tp, tq)


def splitmix64(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint64)
    if _BACKEND == "numba":
        return _splitmix_nb(x)
    return _splitmix_np(x)
