"""Streaming merge-reduce engine over canonical stream blocks.

The stream is tiled by blocks of 2^k consecutive elements.  The engine keeps
one weighted summary per maximal available block (the occupied levels always
spell n in binary), merging sibling summaries when a block completes and
reducing the merge under a per-level error budget

    delta_k = (eps/2) * w_k / W,   w_k = k^(-1-c),  W = sum of all w_u,

so the deltas telescope below eps/2 no matter how deep the hierarchy grows.
A snapshot unions the live summaries (a weighted merge; weights travel
unchanged) and applies one more weighted reduction with budget eps/2,
yielding a sample whose exactly measured certificate never exceeds eps.

W is evaluated as a rational upper bound and the w_k as rational lower
bounds, so every budget is conservative and the telescoping sum stays below
eps/2 by construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import EpsStreamError
from .ranges import DEFAULT_SCALE, FamilyKind, Point2, RangeFamily, family
from .sampler import (
    DEFAULT_REDUCE_THRESHOLDS,
    WeightedSample,
    collapse_duplicates,
    reduce_with_budget,
    sample_from_json,
    sample_to_json,
)

# pi^2/6 = 1.6449340668482264... ; any rational above it is a safe W for c=1
_ZETA2_UPPER = Fraction(16449340668482265, 10 ** 16)

_W_TRUNCATION = 4096
_ROOT_PRECISION_BITS = 30


def _integer_root(n: int, q: int) -> int:
    """floor(n ** (1/q)) for nonnegative integer n."""
    if n < 0:
        raise ValueError("negative radicand")
    if n == 0:
        return 0
    x = 1 << (-(-n.bit_length() // q))
    while True:
        y = ((q - 1) * x + n // x ** (q - 1)) // q
        if y >= x:
            return x
        x = y


def schedule_weight(k: int, c: Fraction) -> Fraction:
    """w_k = k^(-1-c); exact for integer c, else a close rational lower bound."""
    if k < 1:
        raise ValueError("k must be >= 1")
    c = Fraction(c)
    if c <= 0:
        raise ValueError("c must be > 0")
    if c.denominator == 1:
        return Fraction(1, k ** (1 + c.numerator))
    p, q = c.numerator, c.denominator
    scale = 1 << _ROOT_PRECISION_BITS
    # upper bound on k^(1+c) at ~2^-30 relative precision
    t = _integer_root(k ** (q + p) * scale ** q, q) + 1
    return Fraction(scale, t)


def _schedule_weight_upper(k: int, c: Fraction) -> Fraction:
    if c.denominator == 1:
        return Fraction(1, k ** (1 + c.numerator))
    p, q = c.numerator, c.denominator
    scale = 1 << _ROOT_PRECISION_BITS
    t = max(1, _integer_root(k ** (q + p) * scale ** q, q))
    return Fraction(scale, t)


@lru_cache(maxsize=None)
def _w_total_upper(c: Fraction) -> Fraction:
    """Rational upper bound on W = sum of u^(-1-c)."""
    if c == 1:
        return _ZETA2_UPPER
    total = Fraction(0)
    for u in range(1, _W_TRUNCATION + 1):
        total += _schedule_weight_upper(u, c)
    # integral tail: sum_{u>N} u^(-1-c) <= N^(-c)/c = N * w_N / c
    total += Fraction(_W_TRUNCATION) * _schedule_weight_upper(_W_TRUNCATION, c) / c
    return total


@dataclass(frozen=True)
class EngineConfig:
    eps: Fraction
    family: RangeFamily
    c: Fraction = Fraction(1)
    scale: int = DEFAULT_SCALE
    reduce_thresholds: tuple = tuple(sorted((k.value, v) for k, v in DEFAULT_REDUCE_THRESHOLDS.items()))

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ValueError("eps must be in (0, 1)")
        if self.c <= 0:
            raise ValueError("c must be > 0")

    def thresholds_dict(self) -> dict:
        return {FamilyKind(k): v for k, v in self.reduce_thresholds}


def make_config(eps, fam, c=Fraction(1), scale=DEFAULT_SCALE, thresholds=None) -> EngineConfig:
    if isinstance(fam, (str, FamilyKind)):
        fam = family(fam)
    kwargs = {}
    if thresholds:
        merged = dict(DEFAULT_REDUCE_THRESHOLDS)
        merged.update(thresholds)
        kwargs["reduce_thresholds"] = tuple(sorted((k.value, v) for k, v in merged.items()))
    return EngineConfig(Fraction(eps), fam, Fraction(c), scale, **kwargs)


def error_budget(k: int, cfg: EngineConfig) -> Fraction:
    """Reduction budget delta_k = (eps/2) * w_k / W at level k (conservative)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return cfg.eps / 2 * schedule_weight(k, cfg.c) / _w_total_upper(cfg.c)


def budget_prefix(k: int, cfg: EngineConfig) -> Fraction:
    return sum((error_budget(u, cfg) for u in range(1, k + 1)), Fraction(0))


@dataclass
class LevelSummary:
    """Summary of one canonical block of 2^level stream elements."""

    level: int
    sample: WeightedSample
    delta: Fraction

    def __post_init__(self):
        if self.sample.total_weight != Fraction(2 ** self.level):
            raise ValueError("level summary must represent 2^level mass")


@dataclass(frozen=True)
class MemoryFootprint:
    points_stored: int
    levels_occupied: int


@dataclass(frozen=True)
class Snapshot:
    """Immutable stream output: a weighted sample certifying the full prefix."""

    sample: WeightedSample
    n: int
    config: EngineConfig

    @property
    def eps(self) -> Fraction:
        return self.config.eps

    @property
    def certified_error(self) -> Fraction:
        return self.sample.eps_bound

    @property
    def family(self) -> RangeFamily:
        return self.config.family


class StreamState:
    """Single-writer stream engine; snapshots are immutable values."""

    def __init__(self, config: EngineConfig):
        self.config = config
        self.n = 0
        self.slots: dict[int, LevelSummary] = {}

    def insert(self, p: Point2) -> "StreamState":
        """Consume one stream element, restoring the binary slot invariant."""
        pending = LevelSummary(0, WeightedSample((p,), (Fraction(1),), Fraction(1), Fraction(0)),
                               Fraction(0))
        level = 0
        while level in self.slots:
            left = self.slots.pop(level)
            pending = self._merge_reduce(left, pending, level + 1)
            level += 1
        self.slots[level] = pending
        self.n += 1
        return self

    def extend(self, points) -> "StreamState":
        for p in points:
            self.insert(p)
        return self

    def _merge_reduce(self, left: LevelSummary, right: LevelSummary, k: int) -> LevelSummary:
        ls, rs = left.sample, right.sample
        merged = WeightedSample(ls.points + rs.points, ls.weights + rs.weights,
                                ls.total_weight + rs.total_weight,
                                (left.delta + right.delta) / 2)
        reduced, spent = reduce_with_budget(merged, self.config.family, error_budget(k, self.config),
                                            self.config.thresholds_dict())
        delta = (left.delta + right.delta) / 2 + spent
        reduced = WeightedSample(reduced.points, reduced.weights, reduced.total_weight, delta)
        return LevelSummary(k, reduced, delta)

    def snapshot(self) -> Snapshot:
        """Union the live summaries and apply the final eps/2 reduction."""
        if self.n < 1:
            raise EpsStreamError("empty stream has no snapshot")
        pts: list[Point2] = []
        ws: list[Fraction] = []
        base_err = Fraction(0)
        for level in sorted(self.slots, reverse=True):
            summ = self.slots[level]
            pts.extend(summ.sample.points)
            ws.extend(summ.sample.weights)
            base_err += summ.delta * summ.sample.total_weight
        base_err /= self.n
        merged = WeightedSample(tuple(pts), tuple(ws), Fraction(self.n), base_err)
        merged = collapse_duplicates(merged)
        ordered = sorted(range(len(merged)), key=lambda i: (merged.points[i], i))
        merged = WeightedSample(tuple(merged.points[i] for i in ordered),
                                tuple(merged.weights[i] for i in ordered),
                                merged.total_weight, merged.eps_bound)
        reduced, spent = reduce_with_budget(merged, self.config.family, self.config.eps / 2,
                                            self.config.thresholds_dict())
        certified = base_err + spent
        out = WeightedSample(reduced.points, reduced.weights, reduced.total_weight, certified)
        return Snapshot(out, self.n, self.config)

    def memory_footprint(self) -> MemoryFootprint:
        return MemoryFootprint(sum(len(s.sample) for s in self.slots.values()), len(self.slots))

    # -- persistence --------------------------------------------------------

    def to_json(self) -> dict:
        cfg = self.config
        return {
            "version": 1,
            "config": {
                "eps": f"{cfg.eps.numerator}/{cfg.eps.denominator}",
                "c": f"{cfg.c.numerator}/{cfg.c.denominator}",
                "family": cfg.family.kind.value,
                "scale": cfg.scale,
                "reduce_thresholds": list(cfg.reduce_thresholds),
            },
            "n": self.n,
            "slots": [
                {
                    "level": lvl,
                    "delta": f"{s.delta.numerator}/{s.delta.denominator}",
                    "sample": sample_to_json(s.sample, cfg.family),
                }
                for lvl, s in sorted(self.slots.items())
            ],
        }

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, obj: dict) -> "StreamState":
        if obj.get("version") != 1:
            raise EpsStreamError(f"unsupported state version {obj.get('version')!r}")
        c = obj["config"]
        cfg = EngineConfig(Fraction(c["eps"]), family(c["family"]), Fraction(c["c"]),
                           int(c["scale"]), tuple(tuple(t) for t in c["reduce_thresholds"]))
        state = cls(cfg)
        state.n = int(obj["n"])
        for slot in obj["slots"]:
            sample = sample_from_json(slot["sample"])
            state.slots[int(slot["level"])] = LevelSummary(int(slot["level"]), sample,
                                                           Fraction(slot["delta"]))
        occupied = sorted(state.slots)
        if sorted(k for k in range(state.n.bit_length()) if state.n >> k & 1) != occupied:
            raise EpsStreamError("slot levels do not match n")
        return state


def insert(state: StreamState, p: Point2) -> StreamState:
    return state.insert(p)


def snapshot(state: StreamState) -> Snapshot:
    return state.snapshot()


def memory_footprint(state: StreamState) -> MemoryFootprint:
    return state.memory_footprint()


def snapshot_of_exact(points, cfg: EngineConfig) -> Snapshot:
    """A snapshot that is exactly the given multiset (weight-1 points).

    Useful for evaluating estimators on unreduced data; the certificate is 0.
    """
    pts = tuple(sorted(points))
    if not pts:
        raise EpsStreamError("empty stream has no snapshot")
    sample = collapse_duplicates(WeightedSample.uniform(pts))
    return Snapshot(sample, len(pts), cfg)
