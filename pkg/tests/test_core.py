import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from lcmswarm.core import (
    ChiralityError,
    Configuration,
    LightTuple,
    LocalFrame,
    ModelKind,
    Multiplicity,
    Point,
    circular_order,
    from_local,
    make_configuration,
    order_locations,
    snapshot,
    to_local,
)


def matrix_oracle(frame: LocalFrame, p: Point) -> tuple[float, float]:
    """Independent 2x2 matrix implementation of the local transform."""
    dx, dy = p.x - frame.origin.x, p.y - frame.origin.y
    c, s = math.cos(-frame.rotation), math.sin(-frame.rotation)
    x = (c * dx - s * dy) / frame.scale
    y = (s * dx + c * dy) / frame.scale
    if frame.reflecting:
        y = -y
    return x, y


def test_to_local_identity_frame():
    frame = LocalFrame(Point(0, 0))
    assert to_local(frame, Point(3, 4)) == Point(3, 4)


def test_to_local_self_is_origin():
    frame = LocalFrame(Point(1, 1))
    assert to_local(frame, Point(1, 1)) == Point(0, 0)


def test_to_local_matches_matrix_oracle():
    frame = LocalFrame(Point(0, 0), rotation=math.pi / 2, scale=2.0)
    got = to_local(frame, Point(2, 0))
    want = matrix_oracle(frame, Point(2, 0))
    assert got.x == pytest.approx(want[0], abs=1e-12)
    assert got.y == pytest.approx(want[1], abs=1e-12)


@given(
    st.floats(-100, 100), st.floats(-100, 100),
    st.floats(-100, 100), st.floats(-100, 100),
    st.floats(-math.pi, math.pi),
    st.floats(0.1, 10),
    st.booleans(),
)
@settings(max_examples=200, deadline=None)
def test_frame_round_trip(px, py, ox, oy, rot, scale, reflecting):
    frame = LocalFrame(Point(ox, oy), rot, scale, reflecting)
    p = Point(px, py)
    q = from_local(frame, to_local(frame, p))
    assert abs(q.x - p.x) <= 1e-9 and abs(q.y - p.y) <= 1e-9


def test_point_rejects_non_finite():
    with pytest.raises(ValueError):
        Point(float("nan"), 0.0)
    with pytest.raises(ValueError):
        Point(0.0, float("inf"))


def test_frame_rejects_bad_scale():
    with pytest.raises(ValueError):
        LocalFrame(Point(0, 0), scale=0.0)


def test_light_tuple_palette_enforced():
    LightTuple((1, 0), (2, 3))
    with pytest.raises(ValueError):
        LightTuple((2, 0), (2, 3))
    with pytest.raises(ValueError):
        LightTuple((0,), (2, 3))


def test_light_tuple_replace_keeps_unassigned():
    lt = LightTuple((1, 2, 0), (2, 3, 2))
    assert lt.replace({1: 0}).values == (1, 0, 0)


def test_configuration_requires_dense_ordered_ids():
    p = Point(0, 0)
    lt = LightTuple((), ())
    with pytest.raises(ValueError):
        Configuration(((1, p, lt), (0, p, lt)))
    with pytest.raises(ValueError):
        Configuration(((0, p, lt), (2, p, lt)))


def _config(positions, lights, palette):
    return make_configuration(
        [Point(*p) for p in positions],
        [LightTuple(v, palette) for v in lights],
        palette,
    )


RED, GREEN, BLUE = (0,), (1,), (2,)
PAL = (3,)


def test_snapshot_lumi_sees_everything():
    cfg = _config([(0, 0), (1, 0)], [RED, BLUE], PAL)
    snap = snapshot(ModelKind.LUMI, cfg, 0, LocalFrame(Point(0, 0)))
    assert snap.own_light == RED
    by_point = {(loc.point.x, loc.point.y): loc.lights for loc in snap.observed}
    assert by_point[(0.0, 0.0)] == (RED,)
    assert by_point[(1.0, 0.0)] == (BLUE,)


def test_snapshot_fcom_omits_own_color():
    cfg = _config([(0, 0), (0, 0), (1, 0)], [RED, GREEN, BLUE], PAL)
    snap = snapshot(ModelKind.FCOM, cfg, 0, LocalFrame(Point(0, 0)))
    assert snap.own_light is None
    by_point = {(loc.point.x, loc.point.y): loc for loc in snap.observed}
    assert by_point[(0.0, 0.0)].lights == (GREEN,)
    assert by_point[(0.0, 0.0)].count == 2
    assert by_point[(1.0, 0.0)].lights == (BLUE,)


def test_snapshot_oblot_positions_only():
    cfg = _config([(0, 0), (0, 0), (1, 0)], [RED, GREEN, BLUE], PAL)
    snap = snapshot(ModelKind.OBLOT, cfg, 0, LocalFrame(Point(0, 0)))
    assert snap.own_light is None
    by_point = {(loc.point.x, loc.point.y): loc for loc in snap.observed}
    assert by_point[(0.0, 0.0)].lights is None
    assert by_point[(0.0, 0.0)].count == 2
    assert by_point[(1.0, 0.0)].count == 1


def test_snapshot_unknown_observer():
    cfg = _config([(0, 0)], [RED], PAL)
    with pytest.raises(ValueError):
        snapshot(ModelKind.LUMI, cfg, 5, LocalFrame(Point(0, 0)))


def test_multiplicity_modes():
    cfg = _config([(0, 0), (0, 0), (0, 0)], [RED, RED, RED], PAL)
    strong = snapshot(ModelKind.OBLOT, cfg, 0, LocalFrame(Point(0, 0)), Multiplicity.STRONG)
    weak = snapshot(ModelKind.OBLOT, cfg, 0, LocalFrame(Point(0, 0)), Multiplicity.WEAK)
    none = snapshot(ModelKind.OBLOT, cfg, 0, LocalFrame(Point(0, 0)), Multiplicity.NONE)
    assert strong.observed[0].count == 3
    assert weak.observed[0].count == 2
    assert none.observed[0].count == 1
    assert strong.multiplicity_visible and weak.multiplicity_visible
    assert not none.multiplicity_visible


@pytest.mark.parametrize("model", [ModelKind.OBLOT, ModelKind.FSTA])
def test_silent_models_blind_to_other_lights(model):
    rng = random.Random(7)
    for _ in range(50):
        positions = [(rng.randint(-5, 5), rng.randint(-5, 5)) for _ in range(4)]
        one = _config(positions, [RED, GREEN, BLUE, RED], PAL)
        two = _config(positions, [RED, BLUE, RED, GREEN], PAL)  # same own light for robot 0
        f = LocalFrame(Point(*positions[0]))
        assert snapshot(model, one, 0, f) == snapshot(model, two, 0, f)


def test_fcom_blind_to_own_light():
    rng = random.Random(8)
    for _ in range(50):
        positions = [(rng.randint(-5, 5), rng.randint(-5, 5)) for _ in range(4)]
        one = _config(positions, [RED, GREEN, BLUE, RED], PAL)
        two = _config(positions, [BLUE, GREEN, BLUE, RED], PAL)  # only robot 0 differs
        f = LocalFrame(Point(*positions[0]))
        assert snapshot(ModelKind.FCOM, one, 0, f) == snapshot(ModelKind.FCOM, two, 0, f)


def angle_sort_oracle(points):
    """Clockwise-from-lexicographic-start ordering, computed independently."""
    cx = sum(p.x for p in points) / len(points)
    cy = sum(p.y for p in points) / len(points)
    start = min(points, key=lambda p: (p.x, p.y))
    a0 = math.atan2(start.y - cy, start.x - cx)
    return sorted(
        points,
        key=lambda p: (a0 - math.atan2(p.y - cy, p.x - cx)) % (2 * math.pi),
    )


def test_circular_order_square_ring():
    pts = [Point(1, 0), Point(0, 1), Point(-1, 0), Point(0, -1)]
    ring = order_locations(pts)
    assert ring.m == 4
    i = ring.index_of(Point(1, 0))
    for _ in range(4):
        i = ring.suc(i)
    assert i == ring.index_of(Point(1, 0))
    # Clockwise neighbor of (0,1) seen from the centroid is (1,0).
    assert ring.locations[ring.suc(ring.index_of(Point(0, 1)))] == Point(1, 0)


def test_circular_order_singleton():
    ring = order_locations([Point(5, 5)])
    assert ring.m == 1 and ring.suc(0) == 0 and ring.pred(0) == 0


def test_circular_order_matches_angle_sort_oracle():
    pts = [Point(0, 0), Point(2, 0), Point(1, 3)]
    ring = order_locations(pts)
    assert list(ring.locations) == angle_sort_oracle(pts)


def _cyclic_equal(a, b):
    if len(a) != len(b):
        return False
    doubled = b + b
    return any(a == doubled[i : i + len(a)] for i in range(len(b)))


def test_circular_order_similarity_invariant():
    rng = random.Random(11)
    for _ in range(30):
        pts = []
        while len(pts) < 5:
            p = Point(rng.uniform(-10, 10), rng.uniform(-10, 10))
            pts.append(p)
        base = order_locations(pts)
        theta = rng.uniform(0, 2 * math.pi)
        k = rng.uniform(0.1, 5)
        c, s = math.cos(theta), math.sin(theta)
        mapped = [Point(k * (c * p.x - s * p.y), k * (s * p.x + c * p.y)) for p in pts]
        moved = order_locations(mapped)
        base_idx = [pts.index(p) for p in base.locations]
        moved_idx = [mapped.index(p) for p in moved.locations]
        assert _cyclic_equal(base_idx, moved_idx)


def test_circular_order_needs_chirality():
    cfg = _config([(0, 0), (1, 0)], [RED, RED], PAL)
    with pytest.raises(ChiralityError):
        circular_order(cfg, chirality=False)
    ring = circular_order(cfg)
    assert ring.m == 2


def test_circular_order_over_locations_not_robots():
    cfg = _config([(0, 0), (0, 0), (1, 0)], [RED, RED, RED], PAL)
    assert circular_order(cfg).m == 2
