"""Command line surface: build summaries, query them, compare with oracles.

Exit codes: 0 ok, 2 input parse failure, 3 bad configuration, 4 internal
certification failure.  All outputs are JSON lines or CSV and deterministic
for a given input and configuration (the bench runtime column aside).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction

from .engine import Snapshot, StreamState, make_config
from .errors import CertificationError, EpsStreamError, FamilyMismatchError, StreamParseError
from .oracles import (
    PrefixMirror,
    exact_count,
    exact_discrepancy,
    exact_lms_disk,
    exact_lms_slab,
    exact_regression_depth,
    exact_simplicial_depth,
    exact_slope_rank,
    exact_tukey_depth,
)
from .queries import approx_count, eps_net, iceberg_query
from .ranges import DEFAULT_SCALE, FamilyKind, Point2, family, format_point, parse_descriptor, parse_point
from .sampler import WeightedSample, sample_from_json, sample_to_json
from . import stats as stats_mod

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_CONFIG = 3
EXIT_CERT = 4


def _frac(f: Fraction) -> str:
    f = Fraction(f)
    return f"{f.numerator}/{f.denominator}"


def _emit(out, obj) -> None:
    out.write(json.dumps(obj, sort_keys=True) + "\n")


def _read_points(path: str, scale: int) -> list[Point2]:
    if path == "-":
        lines = sys.stdin.read().splitlines()
    else:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    pts = []
    for i, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        pts.append(parse_point(line, scale, line_no=i))
    if not pts:
        raise StreamParseError("empty stream")
    return pts


def _load_snapshot(path: str) -> Snapshot:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    if "snapshot" not in obj:
        raise StreamParseError("not a snapshot file")
    meta = obj["snapshot"]
    cfg = make_config(Fraction(meta["eps"]), meta["family"], Fraction(meta["c"]),
                      int(meta["scale"]))
    return Snapshot(sample_from_json(obj["sample"]), int(meta["n"]), cfg)


def _snapshot_json(snap: Snapshot) -> dict:
    return {
        "snapshot": {
            "eps": _frac(snap.eps),
            "c": _frac(snap.config.c),
            "family": snap.family.kind.value,
            "scale": snap.config.scale,
            "n": snap.n,
            "certified_error": _frac(snap.certified_error),
        },
        "sample": sample_to_json(snap.sample, snap.family),
    }


def _scale_of(args) -> int:
    if args.scale is not None:
        return args.scale
    env = os.environ.get("EPS_STREAM_SCALE")
    return int(env) if env else DEFAULT_SCALE


# ---------------------------------------------------------------------------
# Subcommands.
# ---------------------------------------------------------------------------


def _cmd_build(args, out) -> int:
    scale = _scale_of(args)
    cfg = make_config(Fraction(args.eps), args.family, Fraction(args.c), scale)
    pts = _read_points(args.input, scale)
    if args.resume:
        with open(args.resume, "r", encoding="utf-8") as fh:
            state = StreamState.from_json(json.load(fh))
    else:
        state = StreamState(cfg)
    state.extend(pts)
    if args.state:
        with open(args.state, "w", encoding="utf-8") as fh:
            fh.write(state.to_json_str())
    snap = state.snapshot()
    blob = json.dumps(_snapshot_json(snap), sort_keys=True)
    if args.snapshot:
        with open(args.snapshot, "w", encoding="utf-8") as fh:
            fh.write(blob)
    _emit(out, {"n": state.n, "points_stored": state.memory_footprint().points_stored,
                "levels": state.memory_footprint().levels_occupied,
                "snapshot_size": len(snap.sample),
                "certified_error": _frac(snap.certified_error)})
    return EXIT_OK


def _run_query_line(snap: Snapshot, line: str, scale: int) -> dict:
    parts = line.strip().split(None, 1)
    if not parts:
        raise StreamParseError("empty query")
    verb = parts[0]
    if verb == "net":
        return {"points": [format_point(p, scale) for p in eps_net(snap)]}
    if verb == "count":
        if len(parts) < 2:
            raise StreamParseError("count needs a range descriptor")
        desc = parse_descriptor(parts[1], scale)
        est = approx_count(snap, desc)
        return {"estimate": _frac(est.estimate), "estimate_float": float(est.estimate),
                "bound": _frac(est.additive_bound)}
    if verb == "iceberg":
        rest = parts[1].split(None, 1) if len(parts) > 1 else []
        if len(rest) != 2:
            raise StreamParseError("iceberg needs: iceberg <theta> <descriptor>")
        verdict = iceberg_query(snap, parse_descriptor(rest[1], scale), Fraction(rest[0]))
        return {"verdict": verdict.value}
    raise StreamParseError(f"unknown query verb {verb!r}")


def _cmd_query(args, out) -> int:
    snap = _load_snapshot(args.snapshot)
    scale = snap.config.scale
    if args.queries == "-":
        lines = sys.stdin.read().splitlines()
    else:
        with open(args.queries, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    for line in lines:
        if line.strip():
            _emit(out, _run_query_line(snap, line, scale))
    return EXIT_OK


def _cmd_net(args, out) -> int:
    snap = _load_snapshot(args.snapshot)
    _emit(out, {"points": [format_point(p, snap.config.scale) for p in eps_net(snap)]})
    return EXIT_OK


def _parse_xy(text: str, scale: int) -> Point2:
    return parse_point(text, scale)


def _cmd_stats(args, out) -> int:
    snap = _load_snapshot(args.snapshot)
    scale = snap.config.scale
    op = args.stat
    if op == "tukey-depth":
        dv = stats_mod.tukey_depth(snap, _parse_xy(args.point, scale))
        _emit(out, {"value": _frac(dv.value), "value_float": float(dv.value),
                    "additive_bound": _frac(dv.additive_bound)})
    elif op == "tukey-median":
        pt, dv = stats_mod.tukey_median(snap)
        _emit(out, {"point": format_point(pt, scale), "value": _frac(dv.value),
                    "value_float": float(dv.value), "additive_bound": _frac(dv.additive_bound)})
    elif op == "simplicial":
        delta = Fraction(args.delta) if args.delta else None
        dv = stats_mod.simplicial_depth_estimate(snap, _parse_xy(args.point, scale), delta)
        _emit(out, {"value": _frac(dv.value), "value_float": float(dv.value),
                    "additive_bound": _frac(dv.additive_bound)})
    elif op == "regdepth":
        a, b = args.line.split(",")
        line = stats_mod.FitLine(Fraction(a), Fraction(b) * scale)
        dv = stats_mod.regression_depth(snap, line)
        _emit(out, {"value": _frac(dv.value), "value_float": float(dv.value),
                    "additive_bound": _frac(dv.additive_bound)})
    elif op == "regfit":
        fit, dv = stats_mod.max_regression_depth_fit(snap)
        _emit(out, {"slope": _frac(fit.slope), "intercept": _frac(fit.intercept / scale),
                    "value": _frac(dv.value), "additive_bound": _frac(dv.additive_bound)})
    elif op == "slope-rank":
        rank = stats_mod.slope_rank_estimate(snap, Fraction(args.slope))
        _emit(out, {"value": _frac(rank), "value_float": float(rank)})
    elif op == "theil-sen":
        fit = stats_mod.theil_sen_fit(snap)
        _emit(out, {"slope": _frac(fit.slope), "slope_float": float(fit.slope),
                    "intercept": _frac(fit.intercept / scale)})
    elif op == "lms-loc":
        disk = stats_mod.lms_location(snap)
        _emit(out, {"center": f"{_frac(disk.center[0] / scale)},{_frac(disk.center[1] / scale)}",
                    "radius2": _frac(disk.radius2 / scale / scale),
                    "radius_float": float(disk.radius2) ** 0.5 / scale})
    elif op == "lms-reg":
        fit, width = stats_mod.lms_regression(snap)
        _emit(out, {"slope": _frac(fit.slope), "intercept": _frac(fit.intercept / scale),
                    "vertical_width": _frac(width / scale)})
    else:
        raise StreamParseError(f"unknown stats subcommand {op!r}")
    return EXIT_OK


def _cmd_oracle(args, out) -> int:
    scale = _scale_of(args)
    mirror = PrefixMirror(_read_points(args.input, scale))
    op = args.stat
    if op == "count":
        desc = parse_descriptor(args.range, scale)
        _emit(out, {"count": exact_count(mirror, desc)})
    elif op == "tukey-depth":
        v = exact_tukey_depth(mirror, _parse_xy(args.point, scale))
        _emit(out, {"value": _frac(v), "value_float": float(v)})
    elif op == "simplicial":
        v = exact_simplicial_depth(mirror, _parse_xy(args.point, scale))
        _emit(out, {"value": _frac(v), "value_float": float(v)})
    elif op == "regdepth":
        a, b = args.line.split(",")
        v = exact_regression_depth(mirror, Fraction(a), Fraction(b) * scale)
        _emit(out, {"value": _frac(v), "value_float": float(v)})
    elif op == "slope-rank":
        v = exact_slope_rank(mirror, Fraction(args.slope))
        _emit(out, {"value": _frac(v), "value_float": float(v)})
    elif op == "lms-loc":
        (cx, cy), r2 = exact_lms_disk(mirror, Fraction(args.fraction))
        _emit(out, {"center": f"{_frac(cx / scale)},{_frac(cy / scale)}",
                    "radius2": _frac(r2 / scale / scale)})
    elif op == "lms-reg":
        a, b1, b2 = exact_lms_slab(mirror, Fraction(args.fraction))
        _emit(out, {"slope": _frac(a), "b1": _frac(b1 / scale), "b2": _frac(b2 / scale),
                    "vertical_width": _frac((b2 - b1) / scale)})
    elif op == "discrepancy":
        snap = _load_snapshot(args.snapshot)
        ground = WeightedSample.uniform(sorted(mirror.points))
        v = exact_discrepancy(ground, snap.sample, snap.family)
        _emit(out, {"value": _frac(v), "value_float": float(v), "eps": _frac(snap.eps)})
    else:
        raise StreamParseError(f"unknown oracle subcommand {op!r}")
    return EXIT_OK


def _cmd_bench(args, out) -> int:
    scale = _scale_of(args)
    cfg = make_config(Fraction(args.eps), args.family, Fraction(args.c), scale)
    pts = _read_points(args.input, scale)
    sizes = sorted({int(s) for s in args.sizes.split(",") if s.strip()})
    if not sizes or sizes[-1] > len(pts):
        raise ValueError(f"sizes must be nonempty and at most the stream length {len(pts)}")
    state = StreamState(cfg)
    rows = ["n,points_stored,levels,max_error,runtime_ms"]
    done = 0
    t0 = time.perf_counter()
    for n in sizes:
        state.extend(pts[done:n])
        done = n
        foot = state.memory_footprint()
        max_err = ""
        if n <= 512:
            snap = state.snapshot()
            ground = WeightedSample.uniform(sorted(pts[:n]))
            max_err = str(float(exact_discrepancy(ground, snap.sample, cfg.family) * n))
        ms = (time.perf_counter() - t0) * 1000.0
        rows.append(f"{n},{foot.points_stored},{foot.levels_occupied},{max_err},{ms:.1f}")
    text = "\n".join(rows) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="eps-stream",
                                  description="deterministic geometric stream summaries")
    top.add_argument("--scale", type=int, default=None,
                     help="coordinate scale (default env EPS_STREAM_SCALE or 2^20)")
    sub = top.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="stream points into a summary")
    b.add_argument("--input", required=True, help="points file, one x,y per line ('-' = stdin)")
    b.add_argument("--family", required=True, choices=[k.value for k in FamilyKind])
    b.add_argument("--eps", required=True)
    b.add_argument("--c", default="1")
    b.add_argument("--state", help="write engine state JSON here")
    b.add_argument("--snapshot", help="write snapshot JSON here")
    b.add_argument("--resume", help="resume from a previously written state")

    q = sub.add_parser("query", help="run query lines against a snapshot")
    q.add_argument("--snapshot", required=True)
    q.add_argument("--queries", default="-", help="query file ('-' = stdin)")

    n = sub.add_parser("net", help="emit the epsilon-net (snapshot support)")
    n.add_argument("--snapshot", required=True)

    s = sub.add_parser("stats", help="robust statistics from a snapshot")
    s.add_argument("stat", choices=["tukey-depth", "tukey-median", "simplicial", "regdepth",
                                    "regfit", "slope-rank", "theil-sen", "lms-loc", "lms-reg"])
    s.add_argument("--snapshot", required=True)
    s.add_argument("--point", help="x,y for depth queries")
    s.add_argument("--delta", help="sector granularity for simplicial depth")
    s.add_argument("--line", help="slope,intercept for regdepth")
    s.add_argument("--slope", help="query slope for slope-rank")

    o = sub.add_parser("oracle", help="exact brute-force references on raw input")
    o.add_argument("stat", choices=["count", "tukey-depth", "simplicial", "regdepth",
                                    "slope-rank", "lms-loc", "lms-reg", "discrepancy"])
    o.add_argument("--input", required=True)
    o.add_argument("--point")
    o.add_argument("--line")
    o.add_argument("--slope")
    o.add_argument("--range", help="range descriptor for count")
    o.add_argument("--fraction", default="1/2")
    o.add_argument("--snapshot", help="snapshot file for discrepancy")

    be = sub.add_parser("bench", help="space/error report over stream prefixes")
    be.add_argument("--input", required=True)
    be.add_argument("--family", required=True, choices=[k.value for k in FamilyKind])
    be.add_argument("--eps", required=True)
    be.add_argument("--c", default="1")
    be.add_argument("--sizes", required=True, help="comma separated prefix sizes")
    be.add_argument("--out", help="write the CSV here instead of stdout")

    return top


_DISPATCH = {
    "build": _cmd_build,
    "query": _cmd_query,
    "net": _cmd_net,
    "stats": _cmd_stats,
    "oracle": _cmd_oracle,
    "bench": _cmd_bench,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return _DISPATCH[args.command](args, out)
    except StreamParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CertificationError as exc:
        print(f"certification failure: {exc}", file=sys.stderr)
        return EXIT_CERT
    except (ValueError, FamilyMismatchError, EpsStreamError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
