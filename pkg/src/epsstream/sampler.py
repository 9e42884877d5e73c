"""Deterministic construction of weighted epsilon-approximations.

The reduction primitive is a halving step: color the points +1/-1, keep one
sign class, and rescale its weights so the represented mass is preserved
exactly.  Unlike the textbook construction we never trust an a-priori
discrepancy bound; after every halving the worst-case error of the kept
class is measured exactly over all induced ranges, and a halving that would
overspend the error budget is rolled back.  The certificate attached to a
sample is therefore a sum of exactly measured quantities.

Colorings are guided by a hyperbolic-cosine potential (method of
conditional expectations) over a collection of induced ranges, plus a
cheap locality pairing as an alternative candidate; the measured error picks
the winner.  Floats appear only inside the guidance potential, never in a
certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import CapExceededError, CertificationError
from .ranges import FamilyKind, Point2, RangeFamily, family
from . import rangesums

_COSH_CAP = 700.0

# Reductions are attempted only at or below these sizes; the exact error
# measurement for the composite families grows too fast beyond them.  The
# family oracle caps still bound what halve() itself accepts.
DEFAULT_REDUCE_THRESHOLDS = {
    FamilyKind.HALFPLANE: 1024,
    FamilyKind.QUADRANT: 2048,
    FamilyKind.DISK: 96,
    FamilyKind.SLAB: 64,
    FamilyKind.WEDGE: 64,
    FamilyKind.DOUBLE_WEDGE: 64,
    FamilyKind.VPARALLELOGRAM: 24,
}

# Skip a halving attempt when the potential-method guarantee is more than
# this factor above the remaining budget (tiny inputs are always tried).
_PRECHECK_MARGIN = 8.0
_ALWAYS_TRY = 16


@dataclass(frozen=True)
class WeightedSample:
    """A finite weighted point multiset certifying an approximation bound.

    ``eps_bound`` certifies that for every induced range the weighted mass
    differs from the represented population's by at most
    ``eps_bound * total_weight``.
    """

    points: tuple[Point2, ...]
    weights: tuple[Fraction, ...]
    total_weight: Fraction
    eps_bound: Fraction

    def __post_init__(self):
        if len(self.points) != len(self.weights):
            raise ValueError("points/weights length mismatch")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be positive")
        if sum(self.weights, Fraction(0)) != self.total_weight:
            raise ValueError("weights must sum to total_weight exactly")

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def uniform(cls, points: Iterable[Point2], eps_bound: Fraction = Fraction(0)) -> "WeightedSample":
        pts = tuple(points)
        if not pts:
            raise ValueError("empty sample")
        return cls(pts, tuple(Fraction(1) for _ in pts), Fraction(len(pts)), Fraction(eps_bound))


@dataclass(frozen=True)
class Coloring:
    """One +1/-1 sign per input point; both classes nonempty for >= 2 points."""

    signs: tuple[int, ...]

    def __post_init__(self):
        if any(s not in (-1, 1) for s in self.signs):
            raise ValueError("signs must be +1 or -1")
        if len(self.signs) >= 2 and len(set(self.signs)) < 2:
            raise ValueError("both sign classes must be nonempty")


def _frac_str(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def _coord_json(v) -> object:
    if isinstance(v, int):
        return v
    return _frac_str(v)


def _coord_from_json(v) -> object:
    if isinstance(v, int):
        return v
    f = Fraction(v)
    return f.numerator if f.denominator == 1 else f


def sample_to_json(sample: WeightedSample, fam: RangeFamily | None = None) -> dict:
    return {
        "version": 1,
        "family": fam.kind.value if fam is not None else None,
        "eps_bound": _frac_str(sample.eps_bound),
        "total_weight": _frac_str(sample.total_weight),
        "points": [[_coord_json(p.x), _coord_json(p.y), _frac_str(w)]
                   for p, w in zip(sample.points, sample.weights)],
    }


def sample_from_json(obj: dict) -> WeightedSample:
    if obj.get("version") != 1:
        raise ValueError(f"unsupported sample version {obj.get('version')!r}")
    pts = tuple(Point2(_coord_from_json(x), _coord_from_json(y)) for x, y, _ in obj["points"])
    ws = tuple(Fraction(w) for _, _, w in obj["points"])
    return WeightedSample(pts, ws, Fraction(obj["total_weight"]), Fraction(obj["eps_bound"]))


# ---------------------------------------------------------------------------
# Greedy low-discrepancy coloring.
# ---------------------------------------------------------------------------


def _as_mask(range_like, n: int) -> int:
    if isinstance(range_like, int):
        return range_like
    mask = 0
    for i in range_like:
        mask |= 1 << i
    return mask


def potential_bound(sample: WeightedSample, n_ranges: int) -> float:
    """The conditional-expectations guarantee sqrt(2 * W2 * ln(2R))."""
    w2 = float(sum(w * w for w in sample.weights))
    return math.sqrt(2.0 * w2 * math.log(2.0 * max(2, n_ranges)))


def low_discrepancy_coloring(sample: WeightedSample, ranges: Iterable) -> Coloring:
    """Color points +1/-1 keeping every given range's weighted signed sum
    within sqrt(2*W2*ln(2R)) and the class totals within max-weight of each
    other.

    Points are processed in descending weight order; each sign choice
    minimizes the hyperbolic-cosine potential over the ranges containing the
    point, overridden when the running signed total would make the final
    weight balance unreachable.
    """
    m = len(sample)
    if m < 2:
        raise ValueError("coloring needs at least 2 points")
    masks = [_as_mask(r, m) for r in ranges]
    nr = max(1, len(masks))
    point_ranges: list[list[int]] = [[] for _ in range(m)]
    for rid, mask in enumerate(masks):
        mm = mask
        i = 0
        while mm:
            if mm & 1:
                point_ranges[i].append(rid)
            mm >>= 1
            i += 1
    w2 = float(sum(w * w for w in sample.weights))
    lam = math.sqrt(2.0 * math.log(2.0 * nr) / w2) if w2 > 0 else 1.0
    d = np.zeros(len(masks), dtype=np.float64)
    order = sorted(range(m), key=lambda i: (-sample.weights[i], sample.points[i], i))
    signs = [0] * m
    max_w = max(sample.weights)
    total_after = sum(sample.weights, Fraction(0))
    running = Fraction(0)
    for i in order:
        w = sample.weights[i]
        total_after -= w
        ids = point_ranges[i]
        if ids:
            cur = d[ids]
            g = float(w)
            up = np.cosh(np.clip(lam * (cur + g), -_COSH_CAP, _COSH_CAP)).sum()
            down = np.cosh(np.clip(lam * (cur - g), -_COSH_CAP, _COSH_CAP)).sum()
            prefer = 1 if up <= down else -1
        else:
            prefer = 1
        limit = total_after + max_w
        sign = prefer
        if abs(running + sign * w) > limit:
            sign = -prefer
            if abs(running + sign * w) > limit:  # unreachable; keep the safe side
                sign = -1 if running > 0 else 1
        signs[i] = sign
        running += sign * w
        if ids:
            d[ids] += sign * float(w)
    return Coloring(tuple(signs))


def _morton(x: int, y: int) -> int:
    """Interleave bits of nonnegative ints (z-order key)."""
    out = 0
    bit = 0
    while x or y:
        out |= (x & 1) << (2 * bit)
        out |= (y & 1) << (2 * bit + 1)
        x >>= 1
        y >>= 1
        bit += 1
    return out


def _paired_coloring(sample: WeightedSample) -> Coloring | None:
    """Pair equal-weight points along a z-order curve, alternating signs.

    Paired points cancel inside any range that contains both, so for
    geometrically local pairs only boundary-straddling pairs contribute.
    """
    m = len(sample)
    if m < 2:
        return None
    minx = min(p.x for p in sample.points)
    miny = min(p.y for p in sample.points)
    if not all(isinstance(p.x, int) and isinstance(p.y, int) for p in sample.points):
        return None
    by_weight: dict[Fraction, list[int]] = {}
    for i, w in enumerate(sample.weights):
        by_weight.setdefault(w, []).append(i)
    signs = [0] * m
    leftovers: list[int] = []
    for w in sorted(by_weight, reverse=True):
        idxs = by_weight[w]
        idxs.sort(key=lambda i: (_morton(sample.points[i].x - minx, sample.points[i].y - miny), i))
        for a in range(0, len(idxs) - 1, 2):
            signs[idxs[a]] = 1
            signs[idxs[a + 1]] = -1
        if len(idxs) % 2:
            leftovers.append(idxs[-1])
    running = sum((sample.weights[i] * s for i, s in enumerate(signs) if s), Fraction(0))
    leftovers.sort(key=lambda i: (-sample.weights[i], i))
    for i in leftovers:
        sign = -1 if running > 0 else 1
        signs[i] = sign
        running += sign * sample.weights[i]
    if len(set(signs)) < 2:
        return None
    return Coloring(tuple(signs))


# ---------------------------------------------------------------------------
# Guidance ranges for the coloring.
# ---------------------------------------------------------------------------

_GUIDE_DIRS = ((1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 2),
               (2, -1), (1, -2), (3, 1), (1, 3), (3, -1), (1, -3))
_FULL_GUIDE_CAP = 72


def _prefix_masks(pts: Sequence[Point2], dirs) -> list[int]:
    """Projection-prefix subsets: each is induced by a halfplane."""
    masks: set[int] = set()
    for dx, dy in dirs:
        keyed = sorted(range(len(pts)), key=lambda i: (pts[i].x * dx + pts[i].y * dy, i))
        mask = 0
        prev_key = None
        for i in keyed:
            key = pts[i].x * dx + pts[i].y * dy
            if key != prev_key and mask:
                masks.add(mask)
            mask |= 1 << i
            prev_key = key
        masks.add(mask)
    return sorted(masks)


def _quadrant_masks(pts: Sequence[Point2]) -> list[int]:
    masks: set[int] = set()
    order = sorted(range(len(pts)), key=lambda i: -pts[i].x)
    ys = sorted({p.y for p in pts})
    for cut in range(len(order) + 1):
        active = order[:cut]
        for y in ys:
            mask = 0
            for i in active:
                if pts[i].y >= y:
                    mask |= 1 << i
            masks.add(mask)
    return sorted(masks)


def _guidance_masks(kind: FamilyKind, pts: Sequence[Point2]) -> list[int]:
    m = len(pts)
    if kind is FamilyKind.QUADRANT:
        if m <= _FULL_GUIDE_CAP:
            return _quadrant_masks(pts)
        return _prefix_masks(pts, ((1, 0), (0, 1), (-1, 0), (0, -1)))
    if kind in (FamilyKind.SLAB, FamilyKind.VPARALLELOGRAM):
        dirs = [(0, 1), (0, -1)]
        for p in pts[:6]:
            for q in pts[-6:]:
                if q.x != p.x:
                    dirs.append((-(q.y - p.y), q.x - p.x))
        if kind is FamilyKind.VPARALLELOGRAM:
            dirs.extend(((1, 0), (-1, 0)))
        return _prefix_masks(pts, dirs)
    if m <= _FULL_GUIDE_CAP:
        return rangesums.halfplane_subset_masks(pts)
    dirs = list(_GUIDE_DIRS) + [(-a, -b) for a, b in _GUIDE_DIRS]
    return _prefix_masks(pts, dirs)


# ---------------------------------------------------------------------------
# Halving with exact error measurement.
# ---------------------------------------------------------------------------


def _scaled_weights(weights: Sequence[Fraction]) -> tuple[list[int], int]:
    denom = 1
    for w in weights:
        denom = denom * w.denominator // math.gcd(denom, w.denominator)
    return [int(w * denom) for w in weights], denom


def _class_error_deltas(signs, scaled, keep_sign):
    """Integer deltas whose range sums scale the kept-class error.

    With scaled weights g, kept mass M = sum over kept g, and T = sum g, the
    per-point delta T*g*[kept] - M*g makes max |range sum| / (M*T) the exact
    relative error of the rescaled kept class.
    """
    total = sum(scaled)
    kept_mass = sum(g for g, s in zip(scaled, signs) if s == keep_sign)
    deltas = [total * g - kept_mass * g if s == keep_sign else -kept_mass * g
              for g, s in zip(scaled, signs)]
    return deltas, kept_mass, total


def halve(sample: WeightedSample, fam: RangeFamily,
          ranges: Iterable | None = None) -> tuple[WeightedSample, Fraction]:
    """One reduction round: color, keep the better class, rescale weights.

    Returns the kept class (total weight preserved exactly) and the exact
    worst-case relative discrepancy it incurred against the input over all
    ranges the family induces on the input's support.
    """
    m = len(sample)
    if m < 2:
        raise ValueError("halve needs at least 2 points")
    if m > fam.oracle_cap:
        raise CapExceededError(f"halve on {m} points exceeds {fam.kind.value} cap {fam.oracle_cap}")
    if ranges is not None:
        guide = [_as_mask(r, m) for r in ranges]
    else:
        guide = _guidance_masks(fam.kind, sample.points)
    colorings = [low_discrepancy_coloring(sample, guide)]
    paired = _paired_coloring(sample)
    if paired is not None:
        colorings.append(paired)
    scaled, denom = _scaled_weights(sample.weights)
    size_cap = (m + 1) // 2 + 1
    candidates = []  # (delta list, meta)
    metas = []
    for ci, col in enumerate(colorings):
        for keep in (1, -1):
            size = sum(1 for s in col.signs if s == keep)
            if size == 0 or size > size_cap:
                continue
            deltas, kept_mass, total = _class_error_deltas(col.signs, scaled, keep)
            candidates.append(deltas)
            metas.append((ci, keep, kept_mass, total, col))
    maxima = rangesums.max_range_sums(fam.kind, sample.points, candidates)
    best = None
    for (ci, keep, kept_mass, total, col), mx in zip(metas, maxima):
        err = Fraction(mx, kept_mass * total)
        key = (err, ci, -keep)
        if best is None or key < best[0]:
            best = (key, keep, kept_mass, col, err)
    _, keep, kept_mass, col, err = best
    factor = Fraction(sum(scaled), kept_mass)
    pts = tuple(p for p, s in zip(sample.points, col.signs) if s == keep)
    ws = tuple(w * factor for w, s in zip(sample.weights, col.signs) if s == keep)
    out = WeightedSample(pts, ws, sample.total_weight, sample.eps_bound + err)
    return out, err


def collapse_duplicates(sample: WeightedSample) -> WeightedSample:
    """Merge coincident points (a zero-error reduction for any family)."""
    agg: dict[tuple, Fraction] = {}
    for p, w in zip(sample.points, sample.weights):
        key = (p.x, p.y)
        agg[key] = agg.get(key, Fraction(0)) + w
    if len(agg) == len(sample.points):
        return sample
    coords = sorted(agg)
    return WeightedSample(tuple(Point2(x, y) for x, y in coords),
                          tuple(agg[c] for c in coords),
                          sample.total_weight, sample.eps_bound)


def reduce_with_budget(sample: WeightedSample, fam: RangeFamily, budget: Fraction,
                       thresholds: dict | None = None) -> tuple[WeightedSample, Fraction]:
    """Collapse duplicates, then halve while the measured error fits the budget."""
    thresholds = thresholds or DEFAULT_REDUCE_THRESHOLDS
    current = collapse_duplicates(sample)
    spent = Fraction(0)
    threshold = thresholds.get(fam.kind, 64)
    est_ranges = max(4, min(len(current), 64) ** min(fam.oracle_dimension, 3))
    while len(current) >= 2:
        if len(current) > min(threshold, fam.oracle_cap):
            break
        if len(current) > _ALWAYS_TRY:
            bound = potential_bound(current, est_ranges) / float(current.total_weight)
            if float(budget - spent) * _PRECHECK_MARGIN < bound:
                break
        reduced, err = halve(current, fam)
        if spent + err > budget:
            break
        current = collapse_duplicates(reduced)
        spent += err
    return current, spent


# ---------------------------------------------------------------------------
# The epsilon-approximation constructors and the exact verifier.
# ---------------------------------------------------------------------------

_VERIFY_CAP = {
    FamilyKind.HALFPLANE: 160,
    FamilyKind.QUADRANT: 256,
    FamilyKind.DISK: 72,
    FamilyKind.SLAB: 56,
    FamilyKind.WEDGE: 48,
    FamilyKind.DOUBLE_WEDGE: 48,
    FamilyKind.VPARALLELOGRAM: 20,
}


def static_eps_approx(points: Sequence[Point2], fam: RangeFamily, eps: Fraction) -> WeightedSample:
    """Deterministic eps-approximation of an unweighted point sequence.

    The input is canonicalized by sorting, so the result depends only on the
    multiset of points.  The output's eps_bound is the exact measured error,
    which never exceeds eps.
    """
    eps = Fraction(eps)
    if not 0 < eps <= 1:
        raise ValueError("eps must be in (0, 1]")
    pts = sorted(points)
    if not pts:
        raise ValueError("empty input")
    base = WeightedSample(tuple(pts), tuple(Fraction(1) for _ in pts),
                          Fraction(len(pts)), Fraction(0))
    return weighted_eps_approx(base, fam, eps)


def weighted_eps_approx(sample: WeightedSample, fam: RangeFamily, eps: Fraction) -> WeightedSample:
    """Weighted reduction with the same contract, relative to the input measure."""
    eps = Fraction(eps)
    if not 0 < eps <= 1:
        raise ValueError("eps must be in (0, 1]")
    if eps == 1:
        p = min(sample.points)
        out = WeightedSample((p,), (sample.total_weight,), sample.total_weight,
                             sample.eps_bound + 1)
        return out
    ordered = sorted(range(len(sample)), key=lambda i: (sample.points[i], sample.weights[i]))
    canon = WeightedSample(tuple(sample.points[i] for i in ordered),
                           tuple(sample.weights[i] for i in ordered),
                           sample.total_weight, sample.eps_bound)
    reduced, spent = reduce_with_budget(canon, fam, eps)
    if len(canon) <= _VERIFY_CAP.get(fam.kind, 48):
        if not verify_approximation(canon, reduced, fam, spent):
            raise CertificationError(
                f"certified error {spent} failed exact verification ({fam.kind.value})")
    return reduced


def verify_approximation(ground: WeightedSample, candidate: WeightedSample,
                         fam: RangeFamily, eps: Fraction) -> bool:
    """Exact check of the weighted approximation inequality on every induced range."""
    union: dict[tuple, Fraction] = {}
    for p, w in zip(ground.points, ground.weights):
        union[(p.x, p.y)] = union.get((p.x, p.y), Fraction(0)) - w
    for p, w in zip(candidate.points, candidate.weights):
        union[(p.x, p.y)] = union.get((p.x, p.y), Fraction(0)) + w
    coords = sorted(union)
    if len(coords) > fam.oracle_cap:
        raise CapExceededError(f"verification on {len(coords)} points exceeds "
                               f"{fam.kind.value} cap {fam.oracle_cap}")
    pts = [Point2(x, y) for x, y in coords]
    denom = 1
    for c in coords:
        denom = denom * union[c].denominator // math.gcd(denom, union[c].denominator)
    ints = [int(union[c] * denom) for c in coords]
    mx = rangesums.max_range_sum(fam.kind, pts, ints)
    return Fraction(mx, denom) <= Fraction(eps) * ground.total_weight
