"""Time the numba kernels against the pure-numpy fallbacks on identical inputs.

    python3 benchmarks/bench_kernels.py [--T 100000] [--lambda-T 200] [--repeat 3]

Both backends must return identical arrays; the script checks that before
reporting times.
"""
import argparse
import time
from fractions import Fraction

import numpy as np

from approxlat import _kernels as K
from approxlat.density import coordinate_hash
from approxlat.patterns import _quad_disp, _query_maps
from approxlat.scheme import Interval, QuadScheme, enumerate_points


def best_of(fn, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--T", type=int, default=100_000)
    ap.add_argument("--lambda-T", type=int, default=200)
    ap.add_argument("--r", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    s = QuadScheme(2)
    P = enumerate_points(s, Interval(args.T))
    lams = enumerate_points(s, Interval(args.lambda_T))
    dm, dn = _quad_disp(lams, _query_maps(None, None, args.r))
    table, n_lo, base, j_lo = P.index
    t = Fraction(1000)

    cases = {
        "count_bases_grid": lambda: K.count_bases_grid(P.m, P.n, dm, dn, table, n_lo, base, j_lo),
        "window_hi": lambda: K.window_hi(P.m, P.n, 2, t.numerator, t.denominator),
        "splitmix64_hash": lambda: coordinate_hash(7, P.m, P.n),
    }
    if not K.HAVE_NUMBA:
        print("numba is not installed; only the numpy backend can run")
    print(f"|P| = {len(P)}, |lambdas| = {len(lams)}, r = {args.r}, workers = {K.workers()}")
    print(f"{'kernel':<20}{'numba s':>12}{'numpy s':>12}{'speedup':>10}")
    for name, fn in cases.items():
        times, outs = {}, {}
        for b in ("numba", "numpy"):
            if b == "numba" and not K.HAVE_NUMBA:
                continue
            K.set_backend(b)
            fn()  # warm-up (JIT compile)
            times[b], outs[b] = best_of(fn, args.repeat)
        if len(outs) == 2:
            a, c = outs["numba"], outs["numpy"]
            same = all(np.array_equal(x, y) for x, y in zip(a, c)) if isinstance(a, tuple) else np.array_equal(a, c)
            if not same:
                raise SystemExit(f"{name}: backends disagree")
        nb = times.get("numba", float("nan"))
        print(f"{name:<20}{nb:>12.4f}{times['numpy']:>12.4f}{times['numpy'] / nb:>9.1f}x")


if __name__ == "__main__":
    main()
