"""Exact maximum signed range sums, family by family.

Given points with integer coordinates and one signed integer delta per
point, these routines compute ``max over induced ranges R of |sum of deltas
over R|`` exactly.  They back every certification step: halving errors,
sample verification, and the engine's budget accounting all reduce to this
quantity with suitable deltas.

The enumerations follow each family's geometry (rotating sweeps around
apexes for halfplanes, threshold grids for quadrants, bisector sweeps for
disks, slope-sorted windows for slabs) instead of materializing subsets, so
they stay polynomial with small constants.  Floating point appears only in
sort keys and in integer-valued matrix products; every ordering is repaired
with exact integer comparisons and every reported sum is an exact integer.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from .ranges import FamilyKind, Point2

# float64 holds integers exactly below 2**53; keep margin for sums.
_FLOAT_EXACT_LIMIT = 1 << 52


def _collapse_by_coordinate(pts: Sequence[Point2], deltas: Sequence[int]):
    """Merge coincident points; no range can separate them."""
    agg: dict[tuple, int] = {}
    for p, d in zip(pts, deltas):
        key = (p.x, p.y)
        agg[key] = agg.get(key, 0) + d
    coords = sorted(agg)
    return [Point2(x, y) for x, y in coords], [agg[c] for c in coords]


def _collapse_multi(pts: Sequence[Point2], delta_lists: Sequence[Sequence[int]]):
    agg: dict[tuple, list[int]] = {}
    k = len(delta_lists)
    for i, p in enumerate(pts):
        key = (p.x, p.y)
        row = agg.get(key)
        if row is None:
            agg[key] = [dl[i] for dl in delta_lists]
        else:
            for j in range(k):
                row[j] += delta_lists[j][i]
    coords = sorted(agg)
    return ([Point2(x, y) for x, y in coords],
            [[agg[c][j] for c in coords] for j in range(k)])


# ---------------------------------------------------------------------------
# Exact circular direction order.
# ---------------------------------------------------------------------------


def _primitive(dx: int, dy: int) -> tuple[int, int]:
    g = math.gcd(abs(dx), abs(dy))
    return dx // g, dy // g


def _dir_half(d: tuple[int, int]) -> int:
    # 0 for angle in [0, pi), 1 for [pi, 2pi)
    return 0 if (d[1] > 0 or (d[1] == 0 and d[0] > 0)) else 1


def _dir_less(a: tuple[int, int], b: tuple[int, int]) -> bool:
    ha, hb = _dir_half(a), _dir_half(b)
    if ha != hb:
        return ha < hb
    return a[0] * b[1] - a[1] * b[0] > 0


def _sorted_directions(dirs: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Angle-sort exact direction vectors: float keys, exact repair."""
    keyed = []
    for d in dirs:
        ang = math.atan2(d[1], d[0])
        if ang < 0:
            ang += 2 * math.pi
        keyed.append((ang, d))
    keyed.sort(key=lambda t: t[0])
    out = [d for _, d in keyed]
    for i in range(len(out) - 1):
        if _dir_less(out[i + 1], out[i]):
            # rare float collision; fall back to exact insertion sort
            for j in range(1, len(out)):
                cur = out[j]
                k = j - 1
                while k >= 0 and _dir_less(cur, out[k]):
                    out[k + 1] = out[k]
                    k -= 1
                out[k + 1] = cur
            break
    return out


# ---------------------------------------------------------------------------
# Halfplanes: rotate a line about every point class.
# ---------------------------------------------------------------------------


def _halfplane_sweep(pts, delta_lists, emit):
    """Drive the apex sweep; ``emit(values_tuple)`` sees every induced sum.

    Every induced halfplane subset has a representation whose boundary
    touches one of its points, so sweeping the boundary direction around
    each point class and emitting the just-before / on-line-closed /
    just-after positions covers the whole induced family.
    """
    k = len(delta_lists)
    zero = (0,) * k
    totals = tuple(sum(dl) for dl in delta_lists)
    emit(totals)
    emit(zero)
    m = len(pts)
    for ai in range(m):
        apex = pts[ai]
        base = [0] * k
        groups: dict[tuple[int, int], list[int]] = {}
        for i, p in enumerate(pts):
            dx = p.x - apex.x
            dy = p.y - apex.y
            if dx == 0 and dy == 0:
                for j in range(k):
                    base[j] += delta_lists[j][i]
                continue
            groups.setdefault(_primitive(dx, dy), []).append(i)
        if not groups:
            emit(tuple(base))
            continue
        gsum: dict[tuple[int, int], list[int]] = {}
        for d, idxs in groups.items():
            gsum[d] = [sum(delta_lists[j][i] for i in idxs) for j in range(k)]
        # a group leaves the open side at its own direction and enters at
        # the antipode, so both are sweep events
        events = _sorted_directions(list({d for d in groups}
                                         | {(-d[0], -d[1]) for d in groups}))
        d0 = events[0]
        left = [0] * k
        for d, s in gsum.items():
            if d0[0] * d[1] - d0[1] * d[0] > 0 or d == d0:
                for j in range(k):
                    left[j] += s[j]
        for d in events:
            g = gsum.get(d, zero)
            anti = gsum.get((-d[0], -d[1]), zero)
            emit(tuple(base[j] + left[j] for j in range(k)))
            emit(tuple(base[j] + left[j] + anti[j] for j in range(k)))
            emit(tuple(base[j] + left[j] - g[j] + anti[j] for j in range(k)))
            for j in range(k):
                left[j] += anti[j] - g[j]


def _max_halfplane_sums_py(pts, delta_lists) -> list[int]:
    best = [0] * len(delta_lists)

    def emit(vals):
        for j, v in enumerate(vals):
            a = -v if v < 0 else v
            if a > best[j]:
                best[j] = a

    _halfplane_sweep(pts, delta_lists, emit)
    return best


def _max_halfplane_sums_np(pts, delta_lists) -> list[int]:
    """Vectorized apex sweep; callers guarantee int64-safe magnitudes."""
    m = len(pts)
    k = len(delta_lists)
    xs = np.array([p.x for p in pts], dtype=np.int64)
    ys = np.array([p.y for p in pts], dtype=np.int64)
    ds = np.array(delta_lists, dtype=np.int64)  # k x m
    totals = ds.sum(axis=1)
    best = np.abs(totals).astype(np.int64)
    off = np.int64(1) << np.int64(27)
    shift = np.int64(1) << np.int64(28)

    def enc(px, py):
        return (px + off) * shift + (py + off)

    for ai in range(m):
        dx = xs - xs[ai]
        dy = ys - ys[ai]
        at_apex = (dx == 0) & (dy == 0)
        base = ds[:, at_apex].sum(axis=1)
        rest = ~at_apex
        if not rest.any():
            best = np.maximum(best, np.abs(base))
            continue
        rdx = dx[rest]
        rdy = dy[rest]
        g = np.gcd(np.abs(rdx), np.abs(rdy))
        px = rdx // g
        py = rdy // g
        keys = enc(px, py)
        ukeys, inv = np.unique(keys, return_inverse=True)
        ng = ukeys.shape[0]
        gsum = np.zeros((k, ng), dtype=np.int64)
        for j in range(k):
            gsum[j] = np.bincount(inv, weights=ds[j, rest].astype(np.float64),
                                  minlength=ng).astype(np.int64)
        upx = ukeys // shift - off
        upy = ukeys % shift - off
        # events: group directions and their antipodes
        evkeys = np.unique(np.concatenate([ukeys, enc(-upx, -upy)]))
        epx = evkeys // shift - off
        epy = evkeys % shift - off
        ang = np.arctan2(epy.astype(np.float64), epx.astype(np.float64))
        ang = np.where(ang < 0, ang + 2 * np.pi, ang)
        order = np.argsort(ang, kind="stable")
        opx = epx[order]
        opy = epy[order]
        cross_adj = opx[:-1] * opy[1:] - opy[:-1] * opx[1:]
        bad = cross_adj < 0
        if bad.any():
            half = (opy < 0) | ((opy == 0) & (opx < 0))
            if (bad & (half[:-1] == half[1:])).any():
                return _max_halfplane_sums_py(pts, delta_lists)
        okeys = enc(opx, opy)
        pos = np.searchsorted(ukeys, okeys)
        has_g = (pos < ng)
        has_g &= np.where(has_g, ukeys[np.minimum(pos, ng - 1)] == okeys, False)
        aokeys = enc(-opx, -opy)
        apos = np.searchsorted(ukeys, aokeys)
        has_a = (apos < ng)
        has_a &= np.where(has_a, ukeys[np.minimum(apos, ng - 1)] == aokeys, False)
        gs = np.zeros((k, order.shape[0]), dtype=np.int64)
        ans = np.zeros((k, order.shape[0]), dtype=np.int64)
        gs[:, has_g] = gsum[:, pos[has_g]]
        ans[:, has_a] = gsum[:, apos[has_a]]
        d0x, d0y = int(opx[0]), int(opy[0])
        strictly_left = (d0x * upy - d0y * upx) > 0
        first = strictly_left | ((upx == d0x) & (upy == d0y))
        left0 = gsum[:, first].sum(axis=1)
        steps = ans - gs
        cum = np.cumsum(steps, axis=1)
        left_before = np.empty_like(cum)
        left_before[:, 0] = left0
        left_before[:, 1:] = left0[:, None] + cum[:, :-1]
        c1 = base[:, None] + left_before
        c2 = c1 + ans
        c3 = c2 - gs
        cand = np.maximum(np.abs(c1).max(axis=1),
                          np.maximum(np.abs(c2).max(axis=1), np.abs(c3).max(axis=1)))
        best = np.maximum(best, cand)
        best = np.maximum(best, np.abs(base))
    return [int(v) for v in best]


def max_halfplane_sums(pts: Sequence[Point2], delta_lists: Sequence[Sequence[int]]) -> list[int]:
    pts, delta_lists = _collapse_multi(pts, delta_lists)
    if not pts:
        return [0] * len(delta_lists)
    max_coord = max(max(abs(p.x), abs(p.y)) for p in pts)
    max_abs_sum = max(sum(abs(d) for d in dl) for dl in delta_lists) if delta_lists else 0
    if max_coord < (1 << 25) and max_abs_sum < (1 << 52):
        return _max_halfplane_sums_np(pts, delta_lists)
    return _max_halfplane_sums_py(pts, delta_lists)


def halfplane_subset_masks(pts: Sequence[Point2]) -> list[int]:
    """All halfplane-induced subsets of ``pts`` as index bitmasks."""
    m = len(pts)
    classes: dict[tuple, list[int]] = {}
    for i, p in enumerate(pts):
        classes.setdefault((p.x, p.y), []).append(i)
    coords = sorted(classes)
    cpts = [Point2(x, y) for x, y in coords]
    cmask = {c: sum(1 << i for i in classes[c]) for c in coords}
    masks: set[int] = {0, (1 << m) - 1}
    n = len(cpts)
    for ai in range(n):
        apex = cpts[ai]
        base = cmask[coords[ai]]
        groups: dict[tuple[int, int], int] = {}
        for ci, p in enumerate(cpts):
            dx = p.x - apex.x
            dy = p.y - apex.y
            if dx == 0 and dy == 0:
                continue
            d = _primitive(dx, dy)
            groups[d] = groups.get(d, 0) | cmask[coords[ci]]
        if not groups:
            masks.add(base)
            continue
        events = _sorted_directions(list({d for d in groups}
                                         | {(-d[0], -d[1]) for d in groups}))
        d0 = events[0]
        left = 0
        for d, gm in groups.items():
            if d0[0] * d[1] - d0[1] * d[0] > 0 or d == d0:
                left |= gm
        for d in events:
            g = groups.get(d, 0)
            anti = groups.get((-d[0], -d[1]), 0)
            masks.add(base | left)
            masks.add(base | left | anti)
            masks.add(base | (left & ~g) | anti)
            left = (left & ~g) | anti
    return sorted(masks)


# ---------------------------------------------------------------------------
# Quadrants: dominance suffix sums over the compressed grid.
# ---------------------------------------------------------------------------


def max_quadrant_sums(pts: Sequence[Point2], delta_lists: Sequence[Sequence[int]]) -> list[int]:
    pts, delta_lists = _collapse_multi(pts, delta_lists)
    k = len(delta_lists)
    best = [0] * k
    if not pts:
        return best
    ys = sorted({p.y for p in pts})
    yidx = {y: i for i, y in enumerate(ys)}
    ny = len(ys)
    order = sorted(range(len(pts)), key=lambda i: -pts[i].x)
    for j in range(k):
        suff = [0] * ny
        deltas = delta_lists[j]
        i = 0
        bj = 0
        while i < len(order):
            x = pts[order[i]].x
            while i < len(order) and pts[order[i]].x == x:
                pi = order[i]
                d = deltas[pi]
                if d:
                    t = yidx[pts[pi].y]
                    for r in range(t + 1):
                        suff[r] += d
                i += 1
            for v in suff:
                a = -v if v < 0 else v
                if a > bj:
                    bj = a
        best[j] = bj
    return best


# ---------------------------------------------------------------------------
# Disks: sweep the center along each pair bisector.
# ---------------------------------------------------------------------------


def max_disk_sum(pts: Sequence[Point2], deltas: Sequence[int]) -> int:
    pts, deltas = _collapse_by_coordinate(pts, deltas)
    n = len(pts)
    best = 0
    for d in deltas:  # radius-0 disks
        best = max(best, abs(d))
    best = max(best, abs(sum(deltas)))
    for i in range(n):
        A = pts[i]
        for j in range(i + 1, n):
            B = pts[j]
            dx = B.x - A.x
            dy = B.y - A.y
            ux, uy = -dy, dx
            events: list[tuple[int, int, int]] = []  # (alpha, beta, idx)
            state = 0  # sum at t = -inf
            for ci, C in enumerate(pts):
                bx = C.x - A.x
                by = C.y - A.y
                beta = 2 * (bx * ux + by * uy)
                alpha = (C.x * C.x + C.y * C.y - A.x * A.x - A.y * A.y
                         - bx * (A.x + B.x) - by * (A.y + B.y))
                if beta == 0:
                    if alpha <= 0:
                        state += deltas[ci]
                elif beta < 0:
                    state += deltas[ci]
                    events.append((alpha, beta, ci))
                else:
                    events.append((alpha, beta, ci))
            if not events:
                best = max(best, abs(state))
                continue
            events.sort(key=lambda e: e[0] / e[1])
            # exact repair of the float ordering, then group equal times
            def t_less(e, f):
                # alpha/beta < alpha'/beta' with beta of either sign
                lhs = e[0] * f[1]
                rhs = f[0] * e[1]
                return lhs < rhs if (e[1] > 0) == (f[1] > 0) else lhs > rhs
            for a in range(len(events) - 1):
                if t_less(events[a + 1], events[a]):
                    for b in range(1, len(events)):
                        cur = events[b]
                        c = b - 1
                        while c >= 0 and t_less(cur, events[c]):
                            events[c + 1] = events[c]
                            c -= 1
                        events[c + 1] = cur
                    break
            idx = 0
            while idx < len(events):
                stop = idx + 1
                e0 = events[idx]
                while stop < len(events) and not t_less(e0, events[stop]):
                    stop += 1
                enter = leave = 0
                for a in range(idx, stop):
                    al, be, ci = events[a]
                    if be > 0:
                        enter += deltas[ci]
                    else:
                        leave += deltas[ci]
                best = max(best, abs(state))
                best = max(best, abs(state + enter))
                state += enter - leave
                best = max(best, abs(state))
                idx = stop
    return best


# ---------------------------------------------------------------------------
# Slabs: per canonical slope, windows over the projection order.
# ---------------------------------------------------------------------------


def _measure_slopes(pts: Sequence[Point2]) -> list[tuple[int, int]]:
    """Pair slopes and separators in between, as (num, den) with den > 0."""
    slopes = sorted({Fraction(q.y - p.y, q.x - p.x)
                     for p in pts for q in pts if q.x != p.x})
    if not slopes:
        return [(0, 1)]
    cands = [slopes[0] - 1, slopes[-1] + 1]
    cands.extend(slopes)
    cands.extend((a + b) / 2 for a, b in zip(slopes, slopes[1:]))
    return [(f.numerator, f.denominator) for f in sorted(set(cands))]


def _max_window_sum(keyed: list[tuple[object, int]]) -> int:
    """Max |sum| over runs of consecutive equal-key groups."""
    keyed.sort(key=lambda t: t[0])
    prefix = 0
    lo = hi = 0
    i = 0
    n = len(keyed)
    while i < n:
        key = keyed[i][0]
        s = 0
        while i < n and keyed[i][0] == key:
            s += keyed[i][1]
            i += 1
        prefix += s
        lo = min(lo, prefix)
        hi = max(hi, prefix)
    return hi - lo


def max_slab_sum(pts: Sequence[Point2], deltas: Sequence[int]) -> int:
    pts, deltas = _collapse_by_coordinate(pts, deltas)
    if not pts:
        return 0
    best = 0
    for num, den in _measure_slopes(pts):
        keyed = [(p.y * den - p.x * num, d) for p, d in zip(pts, deltas)]
        best = max(best, _max_window_sum(keyed))
    return best


# ---------------------------------------------------------------------------
# Vertical parallelograms: slab windows restricted to x-strips.
# ---------------------------------------------------------------------------


def max_vpar_sum(pts: Sequence[Point2], deltas: Sequence[int]) -> int:
    pts, deltas = _collapse_by_coordinate(pts, deltas)
    if not pts:
        return 0
    xs = sorted({p.x for p in pts})
    best = 0
    for num, den in _measure_slopes(pts):
        items = sorted(((p.y * den - p.x * num, p.x, d)
                        for p, d in zip(pts, deltas)), key=lambda t: t[0])
        for li in range(len(xs)):
            for hi in range(li, len(xs)):
                xlo, xhi = xs[li], xs[hi]
                keyed = [(key, d) for key, x, d in items if xlo <= x <= xhi]
                if keyed:
                    best = max(best, _max_window_sum(keyed))
    return best


# ---------------------------------------------------------------------------
# Wedges and double wedges: integer-valued float products over the
# halfplane subset matrix.
# ---------------------------------------------------------------------------


def _wedge_machinery(pts: Sequence[Point2], deltas: Sequence[int]):
    masks = halfplane_subset_masks(pts)
    m = len(pts)
    sigma = np.array(deltas, dtype=np.float64)
    if sum(abs(d) for d in deltas) >= _FLOAT_EXACT_LIMIT:
        raise OverflowError("wedge measure: deltas too large for exact float sums")
    rows = np.zeros((len(masks), m), dtype=np.float64)
    for r, mask in enumerate(masks):
        mm = mask
        i = 0
        while mm:
            if mm & 1:
                rows[r, i] = 1.0
            mm >>= 1
            i += 1
    return rows, sigma


def max_wedge_sum(pts: Sequence[Point2], deltas: Sequence[int]) -> int:
    pts, deltas = _collapse_by_coordinate(pts, deltas)
    if not pts:
        return 0
    rows, sigma = _wedge_machinery(pts, deltas)
    weighted = rows * sigma
    best = 0.0
    chunk = max(1, (1 << 22) // max(1, rows.shape[0]))
    for lo in range(0, rows.shape[0], chunk):
        prod = weighted[lo:lo + chunk] @ rows.T
        best = max(best, float(np.abs(prod).max()))
    return int(round(best))


def max_dwedge_sum(pts: Sequence[Point2], deltas: Sequence[int]) -> int:
    pts, deltas = _collapse_by_coordinate(pts, deltas)
    if not pts:
        return 0
    rows, sigma = _wedge_machinery(pts, deltas)
    weighted = rows * sigma
    sums = weighted.sum(axis=1)
    best = 0.0
    chunk = max(1, (1 << 22) // max(1, rows.shape[0]))
    for lo in range(0, rows.shape[0], chunk):
        inter = weighted[lo:lo + chunk] @ rows.T
        vals = sums[lo:lo + chunk, None] + sums[None, :] - 2.0 * inter
        best = max(best, float(np.abs(vals).max()))
    return int(round(best))


# ---------------------------------------------------------------------------
# Dispatch.
# ---------------------------------------------------------------------------


def max_range_sums(kind: FamilyKind, pts: Sequence[Point2],
                   delta_lists: Sequence[Sequence[int]]) -> list[int]:
    """Exact max |signed range sum| for each delta assignment."""
    if kind is FamilyKind.HALFPLANE:
        return max_halfplane_sums(pts, delta_lists)
    if kind is FamilyKind.QUADRANT:
        return max_quadrant_sums(pts, delta_lists)
    single = {
        FamilyKind.DISK: max_disk_sum,
        FamilyKind.SLAB: max_slab_sum,
        FamilyKind.WEDGE: max_wedge_sum,
        FamilyKind.DOUBLE_WEDGE: max_dwedge_sum,
        FamilyKind.VPARALLELOGRAM: max_vpar_sum,
    }[kind]
    return [single(pts, dl) for dl in delta_lists]


def max_range_sum(kind: FamilyKind, pts: Sequence[Point2], deltas: Sequence[int]) -> int:
    return max_range_sums(kind, pts, [deltas])[0]
