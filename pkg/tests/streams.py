"""Deterministic test stream generators (seeds explicit, product stays seedless)."""

import random

from epsstream import Point2

SPAN = 1 << 21  # keeps every oracle fast path inside int64


def make_stream(style: str, n: int, seed: int) -> list[Point2]:
    rng = random.Random((style, n, seed).__repr__())
    if style == "uniform":
        return [Point2(rng.randint(-SPAN, SPAN), rng.randint(-SPAN, SPAN)) for _ in range(n)]
    if style == "sorted":
        pts = [Point2(rng.randint(-SPAN, SPAN), rng.randint(-SPAN, SPAN)) for _ in range(n)]
        return sorted(pts)
    if style == "clustered":
        centers = [(rng.randint(-SPAN, SPAN), rng.randint(-SPAN, SPAN)) for _ in range(5)]
        out = []
        for _ in range(n):
            cx, cy = rng.choice(centers)
            out.append(Point2(cx + rng.randint(-SPAN >> 7, SPAN >> 7),
                              cy + rng.randint(-SPAN >> 7, SPAN >> 7)))
        return out
    if style == "duplicates":
        half = [Point2(rng.randint(-SPAN, SPAN), rng.randint(-SPAN, SPAN))
                for _ in range((n + 1) // 2)]
        out = (half + half)[:n]
        rng.shuffle(out)
        return out
    raise ValueError(f"unknown style {style!r}")


STYLES = ("uniform", "sorted", "clustered", "duplicates")
