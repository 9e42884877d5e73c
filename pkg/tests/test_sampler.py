import random
from fractions import Fraction

import pytest

from epsstream import (
    FamilyKind,
    Point2,
    WeightedSample,
    family,
    halve,
    low_discrepancy_coloring,
    static_eps_approx,
    verify_approximation,
    weighted_eps_approx,
)
from epsstream.rangesums import halfplane_subset_masks
from epsstream.sampler import (
    collapse_duplicates,
    potential_bound,
    sample_from_json,
    sample_to_json,
)
from streams import STYLES, make_stream

HP = family(FamilyKind.HALFPLANE)
QUAD = family(FamilyKind.QUADRANT)


def uniform(points):
    return WeightedSample.uniform(sorted(points))


class TestColoring:
    def test_two_points_pair_up(self):
        s = WeightedSample.uniform([Point2(0, 0), Point2(5, 5)])
        col = low_discrepancy_coloring(s, [(0, 1)])
        assert sorted(col.signs) == [-1, 1]

    def test_collinear_prefixes_within_two(self):
        pts = [Point2(i, 0) for i in range(4)]
        s = WeightedSample.uniform(pts)
        masks = halfplane_subset_masks(pts)
        col = low_discrepancy_coloring(s, masks)
        worst = max(abs(sum(col.signs[i] for i in range(4) if m >> i & 1)) for m in masks)
        assert worst <= 2

    def test_weight_balance_with_heavy_point(self):
        pts = tuple(Point2(i, i * i) for i in range(6))
        s = WeightedSample(pts, (Fraction(1),) * 5 + (Fraction(5),), Fraction(10), Fraction(0))
        col = low_discrepancy_coloring(s, halfplane_subset_masks(pts))
        balance = sum(w if sg == 1 else -w for w, sg in zip(s.weights, col.signs))
        assert abs(balance) <= 5

    def test_potential_bound_holds(self):
        rng = random.Random(4)
        for _ in range(12):
            m = rng.randint(2, 14)
            pts = [Point2(rng.randint(-9, 9), rng.randint(-9, 9)) for _ in range(m)]
            ws = tuple(Fraction(rng.randint(1, 6)) for _ in range(m))
            s = WeightedSample(tuple(pts), ws, sum(ws, Fraction(0)), Fraction(0))
            masks = halfplane_subset_masks(pts)
            col = low_discrepancy_coloring(s, masks)
            bound = potential_bound(s, len(masks))
            for mask in masks:
                signed = sum(col.signs[i] * ws[i] for i in range(m) if mask >> i & 1)
                assert abs(float(signed)) <= bound + 1e-9

    def test_rejects_tiny_input(self):
        with pytest.raises(ValueError):
            low_discrepancy_coloring(WeightedSample.uniform([Point2(0, 0)]), [])


class TestHalve:
    def test_duplicate_pair_is_free(self):
        s = WeightedSample.uniform([Point2(3, 3), Point2(3, 3)])
        out, err = halve(s, HP)
        assert len(out) == 1 and out.weights[0] == 2 and err == 0

    def test_four_collinear(self):
        s = WeightedSample.uniform([Point2(0, 0), Point2(1, 0), Point2(2, 0), Point2(3, 0)])
        out, err = halve(s, HP)
        assert err <= Fraction(1, 4)
        assert out.total_weight == 4
        assert len(out) <= 3

    def test_error_composes_into_eps_bound(self):
        s = WeightedSample.uniform([Point2(i, i % 3) for i in range(8)])
        base = WeightedSample(s.points, s.weights, s.total_weight, Fraction(1, 10))
        out, err = halve(base, HP)
        assert out.eps_bound == Fraction(1, 10) + err

    def test_size_cap(self):
        rng = random.Random(8)
        for m in (5, 9, 16):
            pts = [Point2(rng.randint(-40, 40), rng.randint(-40, 40)) for _ in range(m)]
            out, _ = halve(WeightedSample.uniform(pts), HP)
            assert len(out) <= (m + 1) // 2 + 1

    def test_weight_conservation_exact(self):
        rng = random.Random(9)
        pts = [Point2(rng.randint(-99, 99), rng.randint(-99, 99)) for _ in range(11)]
        ws = tuple(Fraction(rng.randint(1, 9), rng.randint(1, 4)) for _ in range(11))
        s = WeightedSample(tuple(pts), ws, sum(ws, Fraction(0)), Fraction(0))
        out, _ = halve(s, HP)
        assert out.total_weight == s.total_weight
        assert sum(out.weights, Fraction(0)) == s.total_weight


class TestApprox:
    def test_eps_one_single_point(self):
        pts = [Point2(9, 9), Point2(1, 2), Point2(3, 4)]
        a = static_eps_approx(pts, HP, Fraction(1))
        assert len(a) == 1 and a.total_weight == 3

    def test_eps_zero_rejected(self):
        with pytest.raises(ValueError):
            static_eps_approx([Point2(0, 0)], HP, Fraction(0))

    def test_eight_on_a_line(self):
        pts = [Point2(i, 0) for i in range(8)]
        a = static_eps_approx(pts, HP, Fraction(1, 4))
        assert verify_approximation(uniform(pts), a, HP, Fraction(1, 4))
        assert a.eps_bound <= Fraction(1, 4)

    @pytest.mark.parametrize("eps", [Fraction(1), Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)])
    @pytest.mark.parametrize("style", STYLES)
    def test_certified_grid(self, eps, style):
        for fam in (HP, QUAD):
            pts = make_stream(style, 48, seed=3)
            a = static_eps_approx(pts, fam, eps)
            assert verify_approximation(uniform(pts), a, fam, eps)

    def test_composition(self):
        pts = make_stream("uniform", 32, seed=5)
        first = static_eps_approx(pts, HP, Fraction(1, 4))
        second = weighted_eps_approx(first, HP, Fraction(1, 4))
        assert verify_approximation(uniform(pts), second, HP,
                                    first.eps_bound + (second.eps_bound - first.eps_bound))
        assert verify_approximation(uniform(pts), second, HP, Fraction(1, 2))

    def test_singleton_weighted_exact(self):
        s = WeightedSample((Point2(1, 1),), (Fraction(100),), Fraction(100), Fraction(0))
        out = weighted_eps_approx(s, HP, Fraction(1, 10))
        assert out.points == s.points and out.weights == s.weights and out.eps_bound == 0

    def test_uniform_weights_agree_with_static(self):
        pts = make_stream("uniform", 24, seed=6)
        a = static_eps_approx(pts, HP, Fraction(1, 2))
        b = weighted_eps_approx(uniform(pts), HP, Fraction(1, 2))
        assert a == b

    def test_order_insensitive_determinism(self):
        pts = make_stream("clustered", 40, seed=7)
        rng = random.Random(0)
        shuffled = pts[:]
        rng.shuffle(shuffled)
        assert static_eps_approx(pts, HP, Fraction(1, 4)) == \
            static_eps_approx(shuffled, HP, Fraction(1, 4))

    def test_size_bound_fitted_constant(self):
        # documented build constant: size <= C * eps^-2 * lg(1/eps + 2), C = 4
        C = 4
        import math
        for style in STYLES:
            pts = make_stream(style, 64, seed=11)
            for eps in (Fraction(1), Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)):
                a = static_eps_approx(pts, HP, eps)
                cap = C / float(eps) ** 2 * math.log2(1 / float(eps) + 2)
                assert len(a) <= cap, (style, eps, len(a), cap)


class TestVerify:
    def test_identity(self):
        s = uniform(make_stream("uniform", 12, seed=1))
        assert verify_approximation(s, s, HP, Fraction(0))

    def test_two_point_example(self):
        g = uniform([Point2(0, 0), Point2(1, 0)])
        c = WeightedSample((Point2(0, 0),), (Fraction(2),), Fraction(2), Fraction(1, 2))
        assert verify_approximation(g, c, HP, Fraction(1, 2))
        assert not verify_approximation(g, c, HP, Fraction(2, 5))

    def test_missing_mass_fails(self):
        g = uniform([Point2(0, 0), Point2(5, 5)])
        c = WeightedSample((Point2(0, 0),), (Fraction(1),), Fraction(1), Fraction(1))
        assert not verify_approximation(g, c, HP, Fraction(1, 4))


def test_collapse_duplicates_merges_mass():
    s = WeightedSample((Point2(1, 1), Point2(1, 1), Point2(2, 2)),
                       (Fraction(1), Fraction(2), Fraction(1)), Fraction(4), Fraction(0))
    out = collapse_duplicates(s)
    assert len(out) == 2 and out.total_weight == 4
    assert dict(zip(out.points, out.weights))[Point2(1, 1)] == 3


def test_sample_json_round_trip():
    s = WeightedSample((Point2(1, 2), Point2(-3, 4)), (Fraction(1, 3), Fraction(8, 3)),
                       Fraction(3), Fraction(1, 7))
    blob = sample_to_json(s, HP)
    assert blob["family"] == "halfplane"
    assert sample_from_json(blob) == s


class TestAllFamiliesCertified:
    @pytest.mark.parametrize("fam_name,n", [
        ("halfplane", 32), ("quadrant", 32), ("disk", 20), ("slab", 20),
        ("wedge", 16), ("dwedge", 16), ("vpar", 12),
    ])
    def test_static_certifies_everywhere(self, fam_name, n):
        fam = family(FamilyKind(fam_name))
        pts = make_stream("uniform", n, seed=21)
        for eps in (Fraction(1), Fraction(1, 2), Fraction(1, 4)):
            a = static_eps_approx(pts, fam, eps)
            assert a.eps_bound <= eps
            assert verify_approximation(uniform(pts), a, fam, eps)


class TestCaps:
    def test_halve_cap(self):
        from epsstream.errors import CapExceededError
        fam = family(FamilyKind.VPARALLELOGRAM)
        pts = make_stream("uniform", fam.oracle_cap + 1, seed=22)
        with pytest.raises(CapExceededError):
            halve(WeightedSample.uniform(pts), fam)

    def test_verify_cap(self):
        from epsstream.errors import CapExceededError
        fam = family(FamilyKind.WEDGE)
        pts = make_stream("uniform", fam.oracle_cap + 8, seed=23)
        g = uniform(pts)
        with pytest.raises(CapExceededError):
            verify_approximation(g, g, fam, Fraction(1))

    def test_oracle_cap(self):
        from epsstream.errors import CapExceededError
        from epsstream import subsystem_oracle
        fam = family(FamilyKind.VPARALLELOGRAM)
        pts = make_stream("uniform", fam.oracle_cap + 1, seed=24)
        with pytest.raises(CapExceededError):
            subsystem_oracle(fam, pts)


def test_weighted_reduction_mixed_weights_certified():
    pts = tuple(Point2(3 * i, (i * i) % 7) for i in range(10))
    ws = tuple(Fraction(i + 1) for i in range(10))
    s = WeightedSample(pts, ws, Fraction(55), Fraction(0))
    out = weighted_eps_approx(s, HP, Fraction(3, 10))
    assert out.total_weight == 55
    assert verify_approximation(s, out, HP, Fraction(3, 10))
