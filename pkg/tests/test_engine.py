import json
from fractions import Fraction

import pytest

from epsstream import (
    FamilyKind,
    Point2,
    StreamState,
    WeightedSample,
    error_budget,
    family,
    make_config,
    schedule_weight,
    verify_approximation,
)
from epsstream.engine import budget_prefix, snapshot_of_exact
from epsstream.errors import EpsStreamError
from streams import STYLES, make_stream

HP = family(FamilyKind.HALFPLANE)


def test_schedule_weight_values():
    assert schedule_weight(1, Fraction(1)) == 1
    assert schedule_weight(2, Fraction(1)) == Fraction(1, 4)
    assert schedule_weight(3, Fraction(1)) == Fraction(1, 9)


def test_schedule_weight_general_c_is_close_lower_bound():
    w = schedule_weight(5, Fraction(1, 2))
    true = 5.0 ** -1.5
    assert 0 < float(w) <= true
    assert true - float(w) < 1e-6


def test_error_budget_values():
    cfg = make_config(Fraction(1, 10), "halfplane")
    b1 = error_budget(1, cfg)
    assert abs(float(b1) - 0.030396) < 1e-5
    assert float(b1) <= 0.05 / 1.6449340668482264  # never above the exact value
    assert error_budget(2, cfg) == b1 / 4


def test_budgets_telescope_under_half_eps():
    for c in (Fraction(1), Fraction(1, 2), Fraction(3)):
        cfg = make_config(Fraction(1, 4), "halfplane", c=c)
        assert budget_prefix(60, cfg) < cfg.eps / 2


def test_slots_follow_binary_representation():
    st = StreamState(make_config(Fraction(1, 2), "halfplane"))
    pts = make_stream("uniform", 40, seed=2)
    for i, p in enumerate(pts, start=1):
        st.insert(p)
        assert sorted(st.slots) == [k for k in range(8) if i >> k & 1]
        assert sum(s.sample.total_weight for s in st.slots.values()) == i
    assert st.memory_footprint().levels_occupied == bin(40).count("1")


def test_single_insert_and_snapshot():
    st = StreamState(make_config(Fraction(1, 2), "halfplane"))
    st.insert(Point2(7, 8))
    snap = st.snapshot()
    assert snap.n == 1
    assert snap.sample.points == (Point2(7, 8),)
    assert snap.sample.weights == (Fraction(1),)


def test_empty_snapshot_rejected():
    with pytest.raises(EpsStreamError):
        StreamState(make_config(Fraction(1, 2), "halfplane")).snapshot()


def test_eight_points_level_three_budget():
    cfg = make_config(Fraction(1, 2), "halfplane")
    st = StreamState(cfg)
    st.extend(make_stream("uniform", 8, seed=3))
    (level,) = st.slots
    assert level == 3
    assert st.slots[3].delta <= budget_prefix(3, cfg) < Fraction(1, 4)


@pytest.mark.parametrize("style", STYLES)
def test_snapshot_certificate_verified_small(style):
    cfg = make_config(Fraction(1, 2), "halfplane")
    pts = make_stream(style, 48, seed=4)
    snap = StreamState(cfg).extend(pts).snapshot()
    assert snap.certified_error <= cfg.eps
    ground = WeightedSample.uniform(sorted(pts))
    assert verify_approximation(ground, snap.sample, HP, snap.certified_error)


def test_anytime_snapshots():
    cfg = make_config(Fraction(1, 2), "quadrant")
    st = StreamState(cfg)
    pts = make_stream("duplicates", 24, seed=5)
    for i, p in enumerate(pts, start=1):
        st.insert(p)
        snap = st.snapshot()
        assert snap.n == i
        assert snap.sample.total_weight == i
        assert snap.certified_error <= cfg.eps


def test_snapshot_deterministic_and_reproducible():
    cfg = make_config(Fraction(1, 4), "halfplane")
    pts = make_stream("clustered", 96, seed=6)
    s1 = StreamState(cfg).extend(pts)
    s2 = StreamState(cfg).extend(pts)
    a = s1.snapshot()
    b = s1.snapshot()
    c = s2.snapshot()
    assert a.sample == b.sample == c.sample


def test_state_round_trip_and_resume():
    cfg = make_config(Fraction(1, 4), "quadrant")
    pts = make_stream("sorted", 80, seed=7)
    full = StreamState(cfg).extend(pts)
    part = StreamState(cfg).extend(pts[:33])
    blob = part.to_json_str()
    resumed = StreamState.from_json(json.loads(blob)).extend(pts[33:])
    assert resumed.to_json_str() == full.to_json_str()
    assert resumed.snapshot().sample == full.snapshot().sample


def test_footprint_counts_slots():
    cfg = make_config(Fraction(1, 2), "halfplane")
    st = StreamState(cfg).extend(make_stream("uniform", 33, seed=8))
    foot = st.memory_footprint()
    assert foot.points_stored == sum(len(s.sample) for s in st.slots.values())
    assert foot.levels_occupied == 2  # 33 = 100001b


def test_duplicate_streams_collapse_storage():
    cfg = make_config(Fraction(1, 4), "halfplane")
    pts = make_stream("duplicates", 128, seed=9)
    st = StreamState(cfg).extend(pts)
    # every level-k summary collapses coincident points, so storage stays
    # well below the raw prefix for duplicate-heavy streams
    assert st.memory_footprint().points_stored < 128


def test_snapshot_of_exact_helper():
    pts = [Point2(0, 0), Point2(1, 1), Point2(1, 1)]
    snap = snapshot_of_exact(pts, make_config(Fraction(1, 4), "wedge"))
    assert snap.n == 3
    assert snap.sample.total_weight == 3
    assert snap.certified_error == 0


def test_budget_accounting_tracked_per_level():
    cfg = make_config(Fraction(1, 2), "halfplane")
    pts = make_stream("uniform", 64, seed=10)
    st = StreamState(cfg).extend(pts)
    for lvl, summ in st.slots.items():
        if lvl >= 1:
            assert summ.delta <= budget_prefix(lvl, cfg)
        else:
            assert summ.delta == 0


def test_module_level_op_aliases():
    from epsstream import insert, snapshot, memory_footprint
    st = StreamState(make_config(Fraction(1, 2), "halfplane"))
    insert(st, Point2(1, 2))
    insert(st, Point2(3, 4))
    snap = snapshot(st)
    assert snap.n == 2
    assert memory_footprint(st).levels_occupied == 1
