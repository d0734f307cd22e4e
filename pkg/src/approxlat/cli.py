"""Command-line front end.

    approxlat <command> --config run.cfg [--out DIR] [--workers N] [--recheck] [--cap N]

Exit codes: 0 success, 2 bad input or failed precondition, 3 capacity
exceeded, 1 a recheck found a failing witness.
"""
from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__
from . import _kernels as K
from .config import ConfigError, RunConfig, load_config
from .density import (FolnerSpec, SubsetRule, SubsetSpec, _ratio_decimal, banach_density_emp,
                      counting_bound_check, half_gap, random_windows, subset_generate, upper_density)
from .errors import CapacityError, UsageError
from .exactnum import PadicRat, QuadInt
from .io import csv_text, json_text, pointset_csv, update_manifest, write_outputs
from .patterns import (Endo, GapSetReport, PatternQuery, ap_scan, gap_set, multi_recurrence_scan, recheck,
                       syndeticity_trend)
from .scheme import Ball, Interval, PadicScheme, QuadScheme, enumerate_points, set_cap, verify_axioms

COMMANDS = ("generate", "axioms", "density", "banach", "gapset", "apscan", "multirec", "synd",
            "patches", "separation", "ip")


class RecheckFailure(RuntimeError):
    pass


# ----------------------------------------------------------- config helpers

def build_scheme(cfg: RunConfig):
    kind = cfg.require("scheme", "kind")
    w = cfg.get("scheme", "w", Fraction(1))
    closed = cfg.get("scheme", "window_closed", True)
    if kind == "quadratic":
        return QuadScheme(cfg.require("scheme", "D"), w, closed)
    return PadicScheme(cfg.require("scheme", "p"), w, closed)


def elem(scheme, pair):
    if isinstance(scheme, QuadScheme):
        return QuadInt(pair[0], pair[1], scheme.D)
    if pair[1] < 0:
        raise ConfigError(f"p-adic element {pair} needs a non-negative exponent")
    return PadicRat(pair[0], pair[1], scheme.p)


def build_region(cfg: RunConfig, scheme, scale=None):
    if isinstance(scheme, QuadScheme):
        return Interval(scale if scale is not None else cfg.require("region", "T"))
    return Ball(int(scale) if scale is not None else cfg.require("region", "level"))


def lambda_region(cfg: RunConfig, scheme):
    if isinstance(scheme, QuadScheme):
        half = cfg.get("region", "lambda_T")
        if half is None:
            half = cfg.require("region", "T") / 8
        return Interval(half)
    lvl = cfg.get("region", "lambda_level")
    return Ball(lvl if lvl is not None else cfg.require("region", "level"))


def subset_spec(cfg: RunConfig) -> SubsetSpec:
    s = cfg.sections.get("subset", {})
    return SubsetSpec(kind=s.get("kind", "full"), theta=s.get("theta"), seed=s.get("seed"),
                      w_sub=s.get("w_sub"), strict=s.get("strict", False), modulus=s.get("modulus"),
                      residues=tuple(s.get("residues", ())))


def build_P_o(cfg: RunConfig, scheme, region):
    return subset_generate(enumerate_points(scheme, region), subset_spec(cfg))


def build_query(cfg: RunConfig, scheme) -> PatternQuery:
    mode = cfg.get("query", "mode", "dilation")
    if mode == "dilation":
        F = tuple(elem(scheme, f) for f in cfg.require("query", "F"))
        return PatternQuery(F=F, mode="dilation")
    return PatternQuery(mode="integer_multiples", r=cfg.require("query", "r"))


def build_endos(cfg: RunConfig, scheme) -> list[Endo]:
    out = []
    for kind, arg in cfg.require("query", "endos"):
        out.append(Endo.mult_by(elem(scheme, arg)) if kind == "mult" else Endo.int_scale(arg))
    return out


def default_margin(cfg: RunConfig, scheme):
    m = cfg.get("region", "margin")
    if m is not None:
        return m
    return Fraction(10) if isinstance(scheme, QuadScheme) else 0


def frac_json(x: Fraction) -> dict:
    return {"num": x.numerator, "den": x.denominator, "decimal": _ratio_decimal(x)}


def gap_csv(rep: GapSetReport) -> str:
    return csv_text(rep.header, rep.csv_rows())


# ------------------------------------------------------------- commands

def cmd_generate(cfg, scheme, args):
    region = build_region(cfg, scheme)
    P = enumerate_points(scheme, region)
    files = {"points.csv": pointset_csv(P)}
    if "subset" in cfg.sections:
        files["subset.csv"] = pointset_csv(subset_generate(P, subset_spec(cfg)))
    return files, {"n_points": len(P)}


def cmd_axioms(cfg, scheme, args):
    rep = verify_axioms(scheme, build_region(cfg, scheme), default_margin(cfg, scheme))
    return {"axioms.json": json_text(rep.to_dict())}, {}


def cmd_density(cfg, scheme, args):
    scales = cfg.require("folner", "scales")
    if isinstance(scheme, QuadScheme):
        spec = FolnerSpec("interval", tuple(scales), thickening=cfg.get("folner", "thickening"))
    else:
        th = cfg.get("folner", "thickening")
        spec = FolnerSpec("ball", tuple(int(s) for s in scales), thickening=int(th) if th is not None else None,
                          p=scheme.p)
    trace = upper_density(SubsetRule(scheme, subset_spec(cfg)), spec)
    files = {"density.csv": csv_text(trace.header, [r.csv_row() for r in trace.rows]),
             "density_summary.json": json_text({"limsup_estimate": frac_json(trace.limsup_estimate)})}
    return files, {}


def cmd_banach(cfg, scheme, args):
    region = build_region(cfg, scheme)
    P = build_P_o(cfg, scheme, region)
    t = cfg.require("query", "t")
    d = banach_density_emp(P, region, t if isinstance(scheme, QuadScheme) else int(t))
    rng = np.random.default_rng(cfg.get("query", "seed", 0))
    samples = cfg.get("query", "samples", 100)
    V = half_gap(P)
    if isinstance(scheme, QuadScheme):
        Q = random_windows(rng, region, samples, t)
        inv_mV = 1 / (2 * V)
        v_enc = [V.numerator, V.denominator]
    else:
        Q = random_windows(rng, region, samples, (max(0, region.level - int(V)), scheme.p))
        inv_mV = 1 / Fraction(scheme.p) ** int(V)
        v_enc = int(V)
    viol = counting_bound_check(P, Q, V)
    out = {"t": str(t), "d_star_emp": frac_json(d), "V_gap": v_enc, "inverse_measure_V": frac_json(inv_mV),
           "d_star_within_bound": d <= inv_mV, "counting_samples": samples, "counting_violations": viol}
    return {"banach.json": json_text(out)}, {}


def _finish_scan(name, rep, P_o, args, meta):
    if args.recheck:
        checked, failures = recheck(rep, P_o)
        meta["recheck"] = {"checked": checked, "failures": failures}
        if failures:
            raise RecheckFailure(f"{failures} of {checked} witnesses failed the recheck")
    meta["gap_points"] = len(rep.gap_points)
    return {f"{name}.csv": gap_csv(rep)}, meta


def cmd_gapset(cfg, scheme, args):
    region = build_region(cfg, scheme)
    P_o = build_P_o(cfg, scheme, region)
    lams = enumerate_points(scheme, lambda_region(cfg, scheme))
    rep = gap_set(P_o, lams, build_query(cfg, scheme), scheme=scheme)
    return _finish_scan("gapset", rep, P_o, args, {})


def cmd_apscan(cfg, scheme, args):
    region = build_region(cfg, scheme)
    P_o = build_P_o(cfg, scheme, region)
    lams = enumerate_points(scheme, lambda_region(cfg, scheme))
    rep = ap_scan(P_o, lams, cfg.require("query", "r"), scheme=scheme)
    return _finish_scan("apscan", rep, P_o, args, {})


def cmd_multirec(cfg, scheme, args):
    region = build_region(cfg, scheme)
    P_o = build_P_o(cfg, scheme, region)
    lams = enumerate_points(scheme, lambda_region(cfg, scheme))
    rep = multi_recurrence_scan(P_o, lams, build_endos(cfg, scheme), cfg.get("query", "q", 1), scheme=scheme)
    return _finish_scan("multirec", rep, P_o, args, {})


def cmd_synd(cfg, scheme, args):
    scales = cfg.require("folner", "scales")
    lreg = lambda_region(cfg, scheme)
    lams = enumerate_points(scheme, lreg)
    query = build_query(cfg, scheme)
    if isinstance(scheme, QuadScheme):
        margin = cfg.get("query", "synd_margin", lreg.half / 10)
    else:
        margin = int(cfg.get("query", "synd_margin", 0))
    items, rechecks = [], [0, 0]
    for s in scales:
        region = build_region(cfg, scheme, s)
        P_o = build_P_o(cfg, scheme, region)
        rep = gap_set(P_o, lams, query, scheme=scheme)
        if args.recheck:
            c, f = recheck(rep, P_o)
            rechecks[0] += c
            rechecks[1] += f
        S = lams.subset(rep.base_counts > 0)
        items.append((str(s), S, lams, margin))
    trend = syndeticity_trend(items)
    meta = {}
    if args.recheck:
        meta["recheck"] = {"checked": rechecks[0], "failures": rechecks[1]}
        if rechecks[1]:
            raise RecheckFailure(f"{rechecks[1]} witnesses failed the recheck")
    K_json = {"K_candidate": [list(k.coords()) for k in trend.K_candidate]}
    return {"synd.csv": csv_text(trend.header, [r.csv_row() for r in trend.rows]),
            "synd_K.json": json_text(K_json)}, meta


def cmd_patches(cfg, scheme, args):
    from .transversal import patch_census
    region = build_region(cfg, scheme)
    P = build_P_o(cfg, scheme, region)
    rho = cfg.require("query", "radius")
    stats = patch_census(P, rho if isinstance(scheme, QuadScheme) else int(rho))
    return {"patches.json": json_text(stats.to_json())}, {"distinct_patch_count": stats.distinct_patch_count}


def cmd_separation(cfg, scheme, args):
    from .transversal import difference_set, near_zero_oracle, separation_check
    region = build_region(cfg, scheme)
    P = build_P_o(cfg, scheme, region)
    q = cfg.get("query", "q", 1)
    radius = cfg.get("query", "radius", Fraction(10) if isinstance(scheme, QuadScheme) else 0)
    Xi = difference_set(P, radius if isinstance(scheme, QuadScheme) else int(radius),
                        order=cfg.get("query", "order", 1))
    V = cfg.get("query", "V_radius", Fraction(0))
    res = separation_check(Xi, q, V if isinstance(scheme, QuadScheme) else int(V), scheme)
    oracle = near_zero_oracle(scheme, q)
    out = res.to_dict()
    out["oracle_min"] = list(oracle.coords()) if isinstance(oracle, QuadInt) else oracle
    out["oracle_agrees"] = oracle == res.max_admissible_radius
    out["difference_set_size"] = len(Xi)
    out["label"] = Xi.label
    return {"separation.json": json_text(out)}, {}


def cmd_ip(cfg, scheme, args):
    from .ipsystems import ip_pattern_search
    if not isinstance(scheme, QuadScheme):
        raise ConfigError("the ip command needs a quadratic scheme ([scheme] kind)")
    region = build_region(cfg, scheme)
    P_o = build_P_o(cfg, scheme, region)
    delta = elem(scheme, cfg.require("query", "delta"))
    F = [elem(scheme, f) for f in cfg.require("query", "F")]
    res = ip_pattern_search(P_o, delta, F, cfg.require("query", "n"), scheme=scheme)
    meta = {}
    if args.recheck and res.found:
        meta["recheck"] = {"checked": 1, "failures": int(not res.verified)}
        if not res.verified:
            raise RecheckFailure("the reported pattern failed the recheck")
    return {"ip.json": json_text(res.to_json())}, meta


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


# ------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="approxlat", description="Finite-scale experiments on approximate lattices.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="run configuration file")
    ap.add_argument("--out", help="output directory (overrides [output] directory)")
    ap.add_argument("--workers", type=int, help="worker threads (default: all cores)")
    ap.add_argument("--recheck", action="store_true", help="re-verify every reported witness")
    ap.add_argument("--cap", type=int, help="capacity cap on enumerated points and scan sizes")
    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        out_dir = args.out or cfg.get("output", "directory") or "out"
        K.set_workers(args.workers)
        set_cap(args.cap)
        scheme = build_scheme(cfg)
        t0 = time.perf_counter()
        files, meta = HANDLERS[args.command](cfg, scheme, args)
        wall = time.perf_counter() - t0
        sums = write_outputs(out_dir, files)
        seeds = {k: v for k, v in (("subset", cfg.get("subset", "seed")), ("query", cfg.get("query", "seed")))
                 if v is not None}
        entry = {"wall_time_s": round(wall, 4), "files": sums, "seeds": seeds, "workers": K.workers(),
                 "backend": K.backend(), **meta}
        update_manifest(out_dir, args.command, entry,
                        {"artifact_version": __version__, "config_sha256": cfg.sha256()})
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (CapacityError, MemoryError) as e:
        print(f"capacity error: {e}", file=sys.stderr)
        return 3
    except RecheckFailure as e:
        print(f"recheck failed: {e}", file=sys.stderr)
        return 1
    finally:
        set_cap(None)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
