import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracsgs.geometry import (
    Point, Sector, Segment, SpatialIndex, Trace, TraceKind, angular_difference, arc_midpoint,
    azimuth_of, first_intersection, nearest_segment, point_in_sector, point_segment_distance,
    points_in_polygon, points_in_sector, polygon_area, segment_intersect,
)
from oracles import crossing_param, interior_crossings, seg

coord = st.floats(-100, 100, allow_nan=False)


# -- primitives ------------------------------------------------------------------

def test_point_rejects_nonfinite():
    with pytest.raises(ValueError):
        Point(float("nan"), 0.0)
    with pytest.raises(ValueError):
        Point(0.0, float("inf"))


def test_segment_rejects_zero_length():
    with pytest.raises(ValueError):
        seg(1, 1, 1, 1)


@pytest.mark.parametrize("dx,dy,az", [(0, 1, 0), (1, 0, 90), (0, -1, 180), (-1, 0, 270), (1, 1, 45)])
def test_azimuth_clockwise_from_north(dx, dy, az):
    assert azimuth_of(dx, dy) == pytest.approx(az)


def test_horizontal_unit_segment():
    s = seg(0, 0, 1, 0)
    assert s.azimuth == pytest.approx(90.0)
    assert s.length == pytest.approx(1.0)


@given(coord, coord, coord, coord)
def test_segment_invariants(x0, y0, x1, y1):
    if math.hypot(x1 - x0, y1 - y0) < 1e-6:
        return
    s = seg(x0, y0, x1, y1)
    assert s.length == pytest.approx(math.hypot(x1 - x0, y1 - y0), rel=1e-9)
    assert 0.0 <= s.azimuth < 360.0
    # offsetting the start along the azimuth reproduces the end
    q = s.start.offset(s.azimuth, s.length)
    assert q.x == pytest.approx(x1, abs=1e-9) and q.y == pytest.approx(y1, abs=1e-9)


def test_angular_difference_wraps():
    assert angular_difference(350, 10) == pytest.approx(20)
    assert angular_difference(10, 170, period=180) == pytest.approx(20)


# -- intersection ----------------------------------------------------------------

def test_perpendicular_crossing():
    p = segment_intersect(seg(0, 0, 2, 0), seg(1, -1, 1, 1))
    assert (p.x, p.y) == pytest.approx((1, 0))


def test_parallel_disjoint():
    assert segment_intersect(seg(0, 0, 1, 0), seg(0, 1, 1, 1)) is None


def test_shared_endpoint():
    a, b = seg(0, 0, 1, 1), seg(1, 1, 2, 0)
    p = segment_intersect(a, b)
    assert (p.x, p.y) == pytest.approx((1, 1))
    # excluding the chained predecessor: the first-hit search skips it
    starts = np.array([[1.0, 1.0]])
    ends = np.array([[2.0, 0.0]])
    assert first_intersection((0, 0), (1, 1), starts[:0], ends[:0]) is None
    assert first_intersection((0, 0), (1, 1), starts, ends) is not None


def test_collinear_overlap_returns_point_nearest_start():
    p = segment_intersect(seg(0, 0, 10, 0), seg(4, 0, 20, 0))
    assert (p.x, p.y) == pytest.approx((4, 0))
    p = segment_intersect(seg(10, 0, 0, 0), seg(4, 0, 20, 0))
    assert (p.x, p.y) == pytest.approx((10, 0))


@given(st.lists(coord, min_size=8, max_size=8))
def test_intersection_symmetric(c):
    try:
        a, b = seg(*c[:4]), seg(*c[4:])
    except ValueError:
        return
    pab, pba = segment_intersect(a, b), segment_intersect(b, a)
    tu = crossing_param(c[0:2], c[2:4], c[4:6], c[6:8])
    if tu is not None and 1e-6 < tu[0] < 1 - 1e-6 and 1e-6 < tu[1] < 1 - 1e-6:
        # proper crossing: both orders agree on the point
        assert pab is not None and pba is not None
        assert pab.x == pytest.approx(pba.x, abs=1e-6) and pab.y == pytest.approx(pba.y, abs=1e-6)
    elif pab is None:
        # absent in one order means no contact at all, unless collinear
        assert pba is None or tu is None


def test_first_intersection_picks_nearest():
    starts = np.array([[5.0, -1.0], [2.0, -1.0], [8.0, -1.0]])
    ends = np.array([[5.0, 1.0], [2.0, 1.0], [8.0, 1.0]])
    k, t = first_intersection((0, 0), (10, 0), starts, ends)
    assert k == 1 and t == pytest.approx(0.2)


def test_interior_crossing_oracle_detects_a_cross():
    assert len(interior_crossings([((0, 0), (2, 2)), ((0, 2), (2, 0)), ((5, 5), (6, 6))])) == 1


# -- sectors ---------------------------------------------------------------------

def test_sector_on_axis_and_range():
    s = Sector(Point(0, 0), 30.0, 10.0, 10.0)
    assert point_in_sector(Point(0, 0).offset(30, 5), s)
    assert not point_in_sector(Point(0, 0).offset(30, 20), s)
    assert not point_in_sector(Point(0, 0), s)


def test_sector_wraparound():
    s = Sector(Point(0, 0), 350.0, 20.0, 10.0)
    assert point_in_sector(Point(0, 0).offset(5, 5), s)


@pytest.mark.parametrize("half", [0.0, 90.0, -5.0])
def test_sector_rejects_bad_half_angle(half):
    with pytest.raises(ValueError):
        Sector(Point(0, 0), 0.0, half, 1.0)


@given(st.floats(0, 360), st.floats(1, 89), st.floats(0, 360), st.floats(0.1, 20), st.integers(-3, 3))
def test_sector_invariant_under_full_turns(center, half, az, dist, k):
    p = Point(0, 0).offset(az, dist)
    a = Sector(Point(0, 0), center, half, 10.0)
    b = Sector(Point(0, 0), center + 360.0 * k, half, 10.0)
    assert point_in_sector(p, a) == point_in_sector(p, b)


def test_vectorised_sector_matches_scalar():
    rng = np.random.default_rng(0)
    xy = rng.uniform(-20, 20, (500, 2))
    s = Sector(Point(1, 2), 123.0, 25.0, 15.0)
    vec = points_in_sector(xy, s)
    assert vec.tolist() == [point_in_sector(Point(*p), s) for p in xy]


# -- spatial index -----------------------------------------------------------------

def _random_segments(rng, n, span=100.0, max_len=15.0):
    p = rng.uniform(0, span, (n, 2))
    ang = rng.uniform(0, 360, n)
    ln = rng.uniform(0.5, max_len, n)
    q = p + ln[:, None] * np.c_[np.sin(np.radians(ang)), np.cos(np.radians(ang))]
    return [Segment(Point(*a), Point(*b)) for a, b in zip(p, q)]


def test_index_insert_and_query_disk():
    idx = SpatialIndex(10.0)
    idx.insert((0, 0), seg(1, 1, 3, 3))
    assert idx.query_radius(Point(2, 2), 1.0).tolist() == [0]
    assert idx.query_radius(Point(80, 80), 5.0).tolist() == []


def test_index_radius_matches_brute_force():
    rng = np.random.default_rng(1)
    segs = _random_segments(rng, 100)
    idx = SpatialIndex(12.0)
    for i, s in enumerate(segs):
        idx.insert((i, 0), s)
    for _ in range(200):
        p = Point(*rng.uniform(-10, 110, 2))
        r = rng.uniform(1, 40)
        got = set(idx.query_radius(p, r).tolist())
        d = point_segment_distance((p.x, p.y), idx.starts, idx.ends)
        want = set(np.flatnonzero(d <= r).tolist())
        assert want <= got  # candidates are a superset of exact hits
        assert {i for i in got if d[i] <= r} == want


def test_index_sector_matches_brute_force_1000_cases():
    rng = np.random.default_rng(2)
    segs = _random_segments(rng, 300)
    idx = SpatialIndex(10.0)
    for i, s in enumerate(segs):
        idx.insert((i, 0), s)
    mids = idx.midpoints
    for _ in range(1000):
        s = Sector(Point(*rng.uniform(0, 100, 2)), rng.uniform(0, 360), rng.uniform(1, 89), rng.uniform(1, 50))
        got = sorted(idx.query_sector(s).tolist())
        want = [i for i, m in enumerate(mids) if point_in_sector(Point(*m), s)]
        assert got == want


# -- nearest segment ---------------------------------------------------------------

def test_nearest_segment_examples():
    assert nearest_segment(Point(0, 0), []) is None
    tid, sid, d = nearest_segment(Point(0, 0), [(0, 0, seg(5, 0, 5, 10))])[:3]
    assert (tid, sid, d) == (0, 0, pytest.approx(5.0))
    items = [(3, 0, seg(-5, -5, -5, 5)), (1, 0, seg(5, -5, 5, 5))]
    assert nearest_segment(Point(0, 0), items)[0] == 1
    assert nearest_segment(Point(0, 0), items, exclude=1)[0] == 3


# -- traces ------------------------------------------------------------------------

def test_trace_from_polyline_splits_at_arc_midpoint():
    verts = [Point(0, 0), Point(0, 10), Point(0, 20), Point(0, 30), Point(0, 40)]
    mid, k, split = arc_midpoint(verts)
    assert (mid.x, mid.y) == (0, 20) and k == 2 and not split
    t = Trace.from_polyline(verts)
    assert t.origin == Point(0, 20)
    assert [(v.x, v.y) for v in t.polyline()] == [(v.x, v.y) for v in verts]
    assert t.length == pytest.approx(40)
    assert t.kind is TraceKind.KNOWN


def test_trace_chains_connect():
    t = Trace.from_polyline([Point(0, 0), Point(3, 4), Point(3, 10)])
    for chain in t.sides:
        p = t.origin
        for s in chain:
            assert s.start == p
            p = s.end


def test_polygon_helpers():
    sq = [[0, 0], [2, 0], [2, 2], [0, 2]]
    assert polygon_area(sq) == pytest.approx(4)
    assert points_in_polygon(np.array([[1, 1], [3, 1]]), sq).tolist() == [True, False]


def test_odd_polyline_midpoint_splits_a_segment():
    mid, k, split = arc_midpoint([Point(0, 0), Point(0, 10), Point(0, 20), Point(0, 30)])
    assert (mid.x, mid.y) == (0, 15) and k == 1 and split
