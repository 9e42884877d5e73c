"""Robust statistics evaluated on stream snapshots.

Each estimator reads the weighted support of a snapshot built on the range
family its error analysis needs (halfplanes for Tukey depth, wedges for
simplicial depth, double wedges for regression depth, vertical
parallelograms for slope statistics, disks and slabs for the least-median
fits).  All arithmetic is exact; additive bounds quote the snapshot's eps.
"""

from __future__ import annotations

import bisect
import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .engine import Snapshot
from .errors import EpsStreamError, FamilyMismatchError
from .ranges import FamilyKind, Point2

# Documented constant for the simplicial-depth additive bound K*sqrt(eps);
# fitted empirically on exact samples (see the acceptance suite).
SIMPLICIAL_K = 5

# Documented constant for the slope-rank bound K*eps^(1/3).
SLOPE_RANK_K = 2


@dataclass(frozen=True)
class FitLine:
    """y = slope * x + intercept; slope None marks a vertical (nonfit) line."""

    slope: Fraction | None
    intercept: Fraction


@dataclass(frozen=True)
class DepthValue:
    value: Fraction
    additive_bound: Fraction

    def __post_init__(self):
        if not 0 <= self.value <= 1:
            raise ValueError("depth must lie in [0, 1]")


def _require(snap: Snapshot, kind: FamilyKind, op: str) -> None:
    if snap.family.kind is not kind:
        raise FamilyMismatchError(f"{op} needs a {kind.value} snapshot, got "
                                  f"{snap.family.kind.value}")


def _support(snap: Snapshot):
    return snap.sample.points, snap.sample.weights, Fraction(snap.n)


def _sqrt_upper(x: Fraction) -> Fraction:
    """A rational upper bound on sqrt(x)."""
    scale = 1 << 20
    if x < 0:
        raise ValueError("negative radicand")
    num = x.numerator * scale * scale
    return Fraction(math.isqrt(num // x.denominator) + 1, scale)


def _prim_dir(vx, vy) -> tuple[int, int]:
    """Reduce an exact vector (int or Fraction parts) to a primitive int direction."""
    if isinstance(vx, Fraction) or isinstance(vy, Fraction):
        fx, fy = Fraction(vx), Fraction(vy)
        mul = fx.denominator * fy.denominator // math.gcd(fx.denominator, fy.denominator)
        vx, vy = int(fx * mul), int(fy * mul)
    g = math.gcd(abs(vx), abs(vy))
    return vx // g, vy // g


def _dir_half(d: tuple[int, int]) -> int:
    return 0 if (d[1] > 0 or (d[1] == 0 and d[0] > 0)) else 1


def _dir_sort_key_exact(dirs: list[tuple[int, int]]) -> list[tuple[int, int]]:
    def cmp(a, b):
        ha, hb = _dir_half(a), _dir_half(b)
        if ha != hb:
            return -1 if ha < hb else 1
        cr = a[0] * b[1] - a[1] * b[0]
        return 0 if cr == 0 else (-1 if cr > 0 else 1)

    return sorted(dirs, key=functools.cmp_to_key(cmp))


# ---------------------------------------------------------------------------
# Tukey depth and median.
# ---------------------------------------------------------------------------


def _depth_of(points: Sequence[Point2], weights: Sequence[Fraction], total: Fraction,
              q: Point2) -> Fraction:
    """Minimum closed-halfplane mass through q, over total."""
    coincident = Fraction(0)
    groups: dict[tuple[int, int], Fraction] = {}
    for p, w in zip(points, weights):
        vx = p.x - q.x
        vy = p.y - q.y
        if vx == 0 and vy == 0:
            coincident += w
            continue
        d = _prim_dir(vx, vy)
        groups[d] = groups.get(d, Fraction(0)) + w
    if not groups:
        return coincident / total
    best = None
    dirs = list(groups)
    for d in dirs:
        for u in ((-d[1], d[0]), (d[1], -d[0])):
            at = coincident
            plus = coincident
            minus = coincident
            rx, ry = -u[1], u[0]
            for c, w in groups.items():
                dot = c[0] * u[0] + c[1] * u[1]
                if dot > 0:
                    at += w
                    plus += w
                    minus += w
                elif dot == 0:
                    at += w
                    side = c[0] * rx + c[1] * ry
                    if side > 0:
                        plus += w
                    else:
                        minus += w
            cand = min(at, plus, minus)
            if best is None or cand < best:
                best = cand
    return best / total


def tukey_depth(snap: Snapshot, q: Point2) -> DepthValue:
    """Halfspace depth of q in the snapshot; within eps of the stream's."""
    _require(snap, FamilyKind.HALFPLANE, "tukey_depth")
    pts, ws, n = _support(snap)
    return DepthValue(_depth_of(pts, ws, n, q), snap.eps)


def _clip(poly, a: int, b: int, t) -> list:
    """Clip a convex polygon (Fraction vertex list) to a*x + b*y <= t."""
    if not poly:
        return poly
    out = []
    m = len(poly)
    vals = [a * x + b * y for x, y in poly]
    for i in range(m):
        x1, y1 = poly[i]
        v1 = vals[i]
        j = (i + 1) % m
        x2, y2 = poly[j]
        v2 = vals[j]
        if v1 <= t:
            out.append((x1, y1))
        if (v1 < t < v2) or (v2 < t < v1):
            lam = Fraction(t - v1, v2 - v1)
            out.append((x1 + lam * (x2 - x1), y1 + lam * (y2 - y1)))
    return out


def tukey_median(snap: Snapshot) -> tuple[Point2, DepthValue]:
    """A point maximizing snapshot depth; its depth is within eps of the
    stream's maximum depth and at least 1/3."""
    _require(snap, FamilyKind.HALFPLANE, "tukey_median")
    pts, ws, n = _support(snap)
    if not pts:
        raise EpsStreamError("empty snapshot")
    if len(pts) == 1:
        return pts[0], DepthValue(Fraction(1), snap.eps)

    base = pts[0]
    ref = next((p for p in pts if p != base), None)
    collinear = all((p.x - base.x) * (ref.y - base.y) == (p.y - base.y) * (ref.x - base.x)
                    for p in pts)
    if collinear:
        best = None
        for p in pts:
            d = _depth_of(pts, ws, n, p)
            if best is None or d > best[1] or (d == best[1] and p < best[0]):
                best = (p, d)
        return best[0], DepthValue(best[1], snap.eps)

    # normals to all support directions, both orientations
    normals: set[tuple[int, int]] = set()
    for i, p in enumerate(pts):
        for q in pts[i + 1:]:
            d = _prim_dir(q.x - p.x, q.y - p.y)
            normals.add((-d[1], d[0]))
            normals.add((d[1], -d[0]))
    # per normal: descending projection values with suffix masses
    tables = {}
    depth_values: set[Fraction] = set()
    for u in normals:
        proj: dict[int, Fraction] = {}
        for p, w in zip(pts, ws):
            v = u[0] * p.x + u[1] * p.y
            proj[v] = proj.get(v, Fraction(0)) + w
        vals = sorted(proj, reverse=True)
        suffix = []
        run = Fraction(0)
        for v in vals:
            run += proj[v]
            suffix.append(run)
        tables[u] = (vals, suffix)
        depth_values.update(suffix)

    levels = sorted(depth_values)

    def region(tau: Fraction):
        minx = min(p.x for p in pts)
        maxx = max(p.x for p in pts)
        miny = min(p.y for p in pts)
        maxy = max(p.y for p in pts)
        poly = [(Fraction(minx - 1), Fraction(miny - 1)), (Fraction(maxx + 1), Fraction(miny - 1)),
                (Fraction(maxx + 1), Fraction(maxy + 1)), (Fraction(minx - 1), Fraction(maxy + 1))]
        for u, (vals, suffix) in tables.items():
            k = bisect.bisect_left(suffix, tau)
            if k == len(suffix):
                return []
            poly = _clip(poly, u[0], u[1], vals[k])
            if not poly:
                return []
        return poly

    lo, hi = 0, len(levels) - 1
    best_poly = None
    best_tau = None
    while lo <= hi:
        mid = (lo + hi) // 2
        poly = region(levels[mid])
        if poly:
            best_poly = poly
            best_tau = levels[mid]
            lo = mid + 1
        else:
            hi = mid - 1
    if best_poly is None:
        raise EpsStreamError("depth region search failed")
    vx = min(best_poly)
    q = Point2(vx[0].numerator if vx[0].denominator == 1 else vx[0],
               vx[1].numerator if vx[1].denominator == 1 else vx[1])
    value = _depth_of(pts, ws, n, q)
    return q, DepthValue(value, snap.eps)


# ---------------------------------------------------------------------------
# Simplicial depth.
# ---------------------------------------------------------------------------


def _c2(w: Fraction) -> Fraction:
    v = w * (w - 1) / 2
    return v if v > 0 else Fraction(0)


def _c3(w: Fraction) -> Fraction:
    v = w * (w - 1) * (w - 2) / 6
    return v if v > 0 else Fraction(0)


def simplicial_depth_estimate(snap: Snapshot, q: Point2,
                              delta_sub: Fraction | None = None) -> DepthValue:
    """Wedge-count estimate of the fraction of point triples enclosing q.

    The plane around q is cut into angular sectors holding at most a
    delta_sub fraction of the mass each (heavy single directions may
    overshoot); triples confined to one halfplane off a sector boundary are
    subtracted from the total.
    """
    _require(snap, FamilyKind.WEDGE, "simplicial_depth_estimate")
    if delta_sub is None:
        delta_sub = min(Fraction(1, 2), _sqrt_upper(snap.eps)) if snap.eps > 0 else Fraction(1, 4)
    delta_sub = Fraction(delta_sub)
    if not 0 < delta_sub < 1:
        raise ValueError("delta_sub must be in (0, 1)")
    pts, ws, n = _support(snap)
    if n < 3:
        raise EpsStreamError("simplicial depth needs mass >= 3")
    groups: dict[tuple[int, int], Fraction] = {}
    for p, w in zip(pts, ws):
        vx = p.x - q.x
        vy = p.y - q.y
        if vx == 0 and vy == 0:
            continue  # triples using q-coincident points always contain q
        d = _prim_dir(vx, vy)
        groups[d] = groups.get(d, Fraction(0)) + w
    if not groups:
        return DepthValue(Fraction(1), SIMPLICIAL_K * _sqrt_upper(snap.eps))
    order = _dir_sort_key_exact(list(groups))
    cap = delta_sub * n
    sectors: list[list[tuple[int, int]]] = []
    cur: list[tuple[int, int]] = []
    cur_mass = Fraction(0)
    for d in order:
        w = groups[d]
        spans = cur and not (cur[0][0] * d[1] - cur[0][1] * d[0] > 0)
        if cur and (cur_mass + w > cap or spans):
            sectors.append(cur)
            cur = []
            cur_mass = Fraction(0)
        cur.append(d)
        cur_mass += w
    if cur:
        sectors.append(cur)
    excluded = Fraction(0)
    for sec in sectors:
        w_i = sum((groups[d] for d in sec), Fraction(0))
        lead = sec[0]
        h_i = Fraction(0)
        for d, wd in groups.items():
            cr = lead[0] * d[1] - lead[1] * d[0]
            if cr > 0 or d == lead:
                h_i += wd
        rest = h_i - w_i
        excluded += _c3(w_i) + _c2(w_i) * rest + w_i * _c2(rest)
    value = 1 - excluded / _c3(n)
    value = min(max(value, Fraction(0)), Fraction(1))
    return DepthValue(value, SIMPLICIAL_K * _sqrt_upper(snap.eps))


# ---------------------------------------------------------------------------
# Regression depth.
# ---------------------------------------------------------------------------


def _pivot_candidates(xs: list) -> list:
    out = set()
    for x in xs:
        out.add(x - 1)
        out.add(x)
        out.add(x + 1)
    return sorted(out)


def regression_depth(snap: Snapshot, line: FitLine) -> DepthValue:
    """Minimum mass swept when rotating the line to vertical about any pivot.

    Points on the line (outside the pivot column) always count: the motion
    starts on them.
    """
    _require(snap, FamilyKind.DOUBLE_WEDGE, "regression_depth")
    if line.slope is None:
        raise ValueError("vertical lines are nonfits")
    pts, ws, n = _support(snap)
    residuals = [p.y - (line.slope * p.x + line.intercept) for p in pts]
    xs = sorted({p.x for p in pts})
    best = None
    for v in _pivot_candidates(xs):
        on_off = Fraction(0)
        up_right = Fraction(0)
        up_left = Fraction(0)
        down_right = Fraction(0)
        down_left = Fraction(0)
        for p, w, r in zip(pts, ws, residuals):
            if p.x == v:
                continue
            if r == 0:
                on_off += w
            elif r > 0:
                if p.x > v:
                    up_right += w
                else:
                    up_left += w
            else:
                if p.x > v:
                    down_right += w
                else:
                    down_left += w
        ccw = up_right + down_left + on_off
        cw = up_left + down_right + on_off
        cand = min(ccw, cw)
        if best is None or cand < best:
            best = cand
    return DepthValue(best / n, snap.eps)


def max_regression_depth_fit(snap: Snapshot) -> tuple[FitLine, DepthValue]:
    """Deepest fit over lines through support pairs and nearby perturbations."""
    _require(snap, FamilyKind.DOUBLE_WEDGE, "max_regression_depth_fit")
    pts, ws, n = _support(snap)
    if len(pts) < 2:
        raise EpsStreamError("need at least 2 support points")
    candidates: set[tuple[Fraction, Fraction]] = set()
    m = len(pts)
    for i in range(m):
        for j in range(i + 1, m):
            p, q = pts[i], pts[j]
            if p.x == q.x:
                continue
            slope = Fraction(q.y - p.y, q.x - p.x)
            inter = p.y - slope * p.x
            candidates.add((slope, inter))
    if not candidates:
        # all support on one vertical column: any horizontal line through a point
        candidates = {(Fraction(0), Fraction(p.y)) for p in pts}
    enriched: set[tuple[Fraction, Fraction]] = set()
    for slope, inter in candidates:
        enriched.add((slope, inter))
        gaps = [abs(p.y - (slope * p.x + inter)) for p in pts]
        gaps = [g for g in gaps if g > 0]
        if gaps:
            db = min(gaps) / 2
            enriched.add((slope, inter + db))
            enriched.add((slope, inter - db))
        spanx = max(abs(p.x) for p in pts) + 1
        da = (min(gaps) / (2 * spanx)) if gaps else Fraction(1, 2)
        for ds in (da, -da):
            enriched.add((slope + ds, inter))
    best = None
    for slope, inter in sorted(enriched):
        d = regression_depth(snap, FitLine(slope, inter))
        if best is None or d.value > best[1].value:
            best = (FitLine(slope, inter), d)
    return best


# ---------------------------------------------------------------------------
# Slope statistics (Theil-Sen).
# ---------------------------------------------------------------------------


def _collapsed_support(snap: Snapshot):
    agg: dict[tuple, Fraction] = {}
    for p, w in zip(snap.sample.points, snap.sample.weights):
        agg[(p.x, p.y)] = agg.get((p.x, p.y), Fraction(0)) + w
    coords = sorted(agg)
    return [Point2(x, y) for x, y in coords], [agg[c] for c in coords]


def slope_rank_estimate(snap: Snapshot, s: Fraction) -> Fraction:
    """Normalized position of slope s among weighted support pair slopes.

    Vertical pairs rank above any finite slope; ties count half.
    """
    _require(snap, FamilyKind.VPARALLELOGRAM, "slope_rank_estimate")
    s = Fraction(s)
    pts, ws = _collapsed_support(snap)
    if len(pts) < 2:
        raise EpsStreamError("need at least 2 distinct support points")
    below = Fraction(0)
    ties = Fraction(0)
    denom = Fraction(0)
    m = len(pts)
    for i in range(m):
        for j in range(i + 1, m):
            ww = ws[i] * ws[j]
            denom += ww
            dx = pts[j].x - pts[i].x
            if dx == 0:
                continue  # vertical: above every finite slope
            dy = pts[j].y - pts[i].y
            lhs = dy * s.denominator
            rhs = s.numerator * dx
            if dx < 0:
                lhs, rhs = -lhs, -rhs
                dx = -dx
            if lhs < rhs:
                below += ww
            elif lhs == rhs:
                ties += ww
    return (below + ties / 2) / denom


def theil_sen_fit(snap: Snapshot) -> FitLine:
    """Line with the weighted-median pair slope, balancing mass above/below."""
    _require(snap, FamilyKind.VPARALLELOGRAM, "theil_sen_fit")
    pts, ws = _collapsed_support(snap)
    if len(pts) < 2:
        raise EpsStreamError("all support points coincident")
    slopes: dict[Fraction, Fraction] = {}
    vertical = Fraction(0)
    total = Fraction(0)
    m = len(pts)
    for i in range(m):
        for j in range(i + 1, m):
            ww = ws[i] * ws[j]
            total += ww
            dx = pts[j].x - pts[i].x
            if dx == 0:
                vertical += ww
                continue
            sl = Fraction(pts[j].y - pts[i].y, dx)
            slopes[sl] = slopes.get(sl, Fraction(0)) + ww
    if 2 * vertical >= total:
        raise EpsStreamError("median pair slope is vertical")
    run = Fraction(0)
    slope = None
    for sl in sorted(slopes):
        run += slopes[sl]
        if 2 * run >= total:
            slope = sl
            break
    if slope is None:
        raise EpsStreamError("median pair slope is vertical")
    keys = sorted({p.y - slope * p.x for p in pts})
    candidates = list(keys)
    candidates.extend((a + b) / 2 for a, b in zip(keys, keys[1:]))
    best = None
    for b in candidates:
        above = Fraction(0)
        below = Fraction(0)
        for q, w in zip(pts, ws):
            r = q.y - (slope * q.x + b)
            if r > 0:
                above += w
            elif r < 0:
                below += w
        imb = abs(above - below)
        if best is None or (imb, b) < best[:2]:
            best = (imb, b)
    return FitLine(slope, best[1])


# ---------------------------------------------------------------------------
# Least median of squares.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LmsDisk:
    center: tuple[Fraction, Fraction]
    radius2: Fraction


def lms_location(snap: Snapshot) -> LmsDisk:
    """Smallest canonical disk holding a (1/2 + eps) fraction of the snapshot.

    Such a disk holds at least half of the true stream mass.
    """
    _require(snap, FamilyKind.DISK, "lms_location")
    if snap.eps >= Fraction(1, 2):
        raise ValueError("lms_location needs eps < 1/2")
    pts, ws = _collapsed_support(snap)
    n = Fraction(snap.n)
    need = (Fraction(1, 2) + snap.eps) * n

    def mass_in(cx, cy, r2):
        tot = Fraction(0)
        for p, w in zip(pts, ws):
            dx = p.x - cx
            dy = p.y - cy
            if dx * dx + dy * dy <= r2:
                tot += w
        return tot

    best = None
    m = len(pts)
    for i, w in enumerate(ws):  # radius 0
        if w >= need:
            cand = (Fraction(0), Fraction(pts[i].x), Fraction(pts[i].y))
            if best is None or cand < best:
                best = cand
    for i in range(m):
        for j in range(i + 1, m):
            cx = Fraction(pts[i].x + pts[j].x, 2)
            cy = Fraction(pts[i].y + pts[j].y, 2)
            dx = pts[i].x - pts[j].x
            dy = pts[i].y - pts[j].y
            r2 = Fraction(dx * dx + dy * dy, 4)
            if best is not None and r2 >= best[0]:
                continue
            if mass_in(cx, cy, r2) >= need:
                cand = (r2, cx, cy)
                if best is None or cand < best:
                    best = cand
    for i in range(m):
        for j in range(i + 1, m):
            for k in range(j + 1, m):
                a, b, c = pts[i], pts[j], pts[k]
                d = 2 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y))
                if d == 0:
                    continue
                a2 = a.x * a.x + a.y * a.y
                b2 = b.x * b.x + b.y * b.y
                c2 = c.x * c.x + c.y * c.y
                cx = Fraction(a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y), d)
                cy = Fraction(a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x), d)
                r2 = (a.x - cx) ** 2 + (a.y - cy) ** 2
                if best is not None and r2 >= best[0]:
                    continue
                if mass_in(cx, cy, r2) >= need:
                    cand = (r2, cx, cy)
                    if best is None or cand < best:
                        best = cand
    if best is None:
        raise EpsStreamError("no feasible disk (internal)")
    r2, cx, cy = best
    return LmsDisk((cx, cy), r2)


def lms_regression(snap: Snapshot) -> tuple[FitLine, Fraction]:
    """Minimum-vertical-width slab holding a (1/2 + eps) fraction; returns
    its central line and the width."""
    _require(snap, FamilyKind.SLAB, "lms_regression")
    if snap.eps >= Fraction(1, 2):
        raise ValueError("lms_regression needs eps < 1/2")
    pts, ws = _collapsed_support(snap)
    if len(pts) < 2:
        raise EpsStreamError("need at least 2 distinct support points")
    n = Fraction(snap.n)
    need = (Fraction(1, 2) + snap.eps) * n
    slopes = sorted({Fraction(q.y - p.y, q.x - p.x)
                     for p in pts for q in pts if q.x != p.x}) or [Fraction(0)]
    best = None
    for a in slopes:
        keyed: dict[Fraction, Fraction] = {}
        for p, w in zip(pts, ws):
            k = p.y - a * p.x
            keyed[k] = keyed.get(k, Fraction(0)) + w
        keys = sorted(keyed)
        masses = [keyed[k] for k in keys]
        lo = 0
        run = Fraction(0)
        for hi in range(len(keys)):
            run += masses[hi]
            while run - masses[lo] >= need:
                run -= masses[lo]
                lo += 1
            if run >= need:
                width = keys[hi] - keys[lo]
                cand = (width, a, keys[lo])
                if best is None or cand < best:
                    best = cand
    if best is None:
        raise EpsStreamError("no feasible slab (internal)")
    width, a, blo = best
    return FitLine(a, blo + width / 2), width
