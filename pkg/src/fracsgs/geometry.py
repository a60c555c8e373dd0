"""
Planar primitives for fracture traces.

Angles are azimuths in degrees, measured clockwise from north. A step of
length ``L`` along azimuth ``az`` moves by ``(L sin az, L cos az)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


def azimuth_of(dx: float, dy: float) -> float:
    """Azimuth in [0, 360) of the direction (dx, dy)."""
    az = math.degrees(math.atan2(dx, dy)) % 360.0
    if az >= 360.0:  # -tiny % 360 rounds up to 360.0
        az = 0.0
    return az + 0.0


def direction(azimuth: float) -> tuple[float, float]:
    """Unit vector (dx, dy) for an azimuth in degrees."""
    rad = math.radians(azimuth)
    return math.sin(rad), math.cos(rad)


def angular_difference(a: float, b: float, period: float = 360.0) -> float:
    """Smallest absolute difference between two angles on a circle of ``period``."""
    d = (a - b) % period
    return min(d, period - d)


@dataclass(frozen=True, slots=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        # plain floats keep serialized output independent of the caller's number types
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")

    def distance(self, other: "Point") -> float:
        return math.hypot(other.x - self.x, other.y - self.y)

    def offset(self, azimuth: float, length: float) -> "Point":
        dx, dy = direction(azimuth)
        return Point(self.x + length * dx, self.y + length * dy)

    def __iter__(self):
        yield self.x
        yield self.y


@dataclass(frozen=True, slots=True)
class Segment:
    """Directed straight segment; azimuth and length are derived."""

    start: Point
    end: Point
    azimuth: float = field(init=False)
    length: float = field(init=False)

    def __post_init__(self):
        dx = self.end.x - self.start.x
        dy = self.end.y - self.start.y
        length = math.hypot(dx, dy)
        if not length > 0.0:
            raise ValueError("zero-length segment")
        object.__setattr__(self, "length", length)
        object.__setattr__(self, "azimuth", azimuth_of(dx, dy))

    @property
    def folded_azimuth(self) -> float:
        return self.azimuth % 180.0

    @property
    def midpoint(self) -> Point:
        return Point(0.5 * (self.start.x + self.end.x), 0.5 * (self.start.y + self.end.y))

    def reversed(self) -> "Segment":
        return Segment(self.end, self.start)


class TraceKind(str, enum.Enum):
    KNOWN = "known"
    SIMULATED = "simulated"


@dataclass
class Trace:
    """A fracture trace stored as two chains grown outward from ``origin``.

    ``sides[0]`` and ``sides[1]`` are chained: each segment starts where the
    previous one ended, the first one at ``origin``. When ``split_origin`` is
    set the origin lies inside a straight piece of the polyline and is not
    reported as a vertex.
    """

    origin: Point
    kind: TraceKind = TraceKind.SIMULATED
    sides: tuple[list[Segment], list[Segment]] = field(default_factory=lambda: ([], []))
    split_origin: bool = False
    terminations: list = field(default_factory=lambda: [None, None])

    @classmethod
    def from_polyline(cls, vertices: Sequence[Point], kind=TraceKind.KNOWN) -> "Trace":
        """Split a polyline at its arc-length midpoint into two outward chains."""
        if len(vertices) < 2:
            raise ValueError("a trace needs at least 2 vertices")
        origin, k, split = arc_midpoint(vertices)
        side_a, side_b = [], []
        prev = origin
        for v in vertices[k + 1:]:
            side_a.append(Segment(prev, v))
            prev = v
        prev = origin
        # a split origin sits strictly inside segment (k, k+1)
        stop = k if split else k - 1
        for v in vertices[stop::-1] if stop >= 0 else []:
            side_b.append(Segment(prev, v))
            prev = v
        return cls(origin=origin, kind=kind, sides=(side_a, side_b), split_origin=split)

    @property
    def segments(self) -> list[Segment]:
        """All segments in polyline order, oriented from the side-B end to the side-A end."""
        return [s.reversed() for s in reversed(self.sides[1])] + list(self.sides[0])

    @property
    def length(self) -> float:
        return sum(s.length for s in self.sides[0]) + sum(s.length for s in self.sides[1])

    @property
    def n_segments(self) -> int:
        return len(self.sides[0]) + len(self.sides[1])

    def polyline(self) -> list[Point]:
        verts = [s.end for s in reversed(self.sides[1])]
        if not (self.split_origin and self.sides[0] and self.sides[1]):
            verts.append(self.origin)
        verts.extend(s.end for s in self.sides[0])
        return verts

    def polyline_segments(self) -> list[Segment]:
        """Segments between consecutive polyline vertices (split origin merged)."""
        v = self.polyline()
        return [Segment(a, b) for a, b in zip(v[:-1], v[1:])]


def arc_midpoint(vertices: Sequence[Point], rtol: float = 1e-12) -> tuple[Point, int, bool]:
    """Arc-length midpoint of a polyline.

    Returns ``(point, k, split)``: if ``split`` the midpoint lies strictly
    inside segment ``(k, k+1)``, otherwise it is vertex ``k``.
    """
    lengths = [a.distance(b) for a, b in zip(vertices[:-1], vertices[1:])]
    total = sum(lengths)
    if total <= 0.0:
        raise ValueError("degenerate polyline")
    half = 0.5 * total
    acc = 0.0
    for k, seg_len in enumerate(lengths):
        if abs(acc - half) <= rtol * total:
            return vertices[k], k, False
        if acc + seg_len > half + rtol * total:
            t = (half - acc) / seg_len
            a, b = vertices[k], vertices[k + 1]
            return Point(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)), k, True
        acc += seg_len
    return vertices[-1], len(vertices) - 1, False


@dataclass(frozen=True)
class Sector:
    apex: Point
    center_azimuth: float
    half_angle: float
    radius: float

    def __post_init__(self):
        if not 0.0 < self.half_angle < 90.0:
            raise ValueError(f"sector half-angle must be in (0, 90), got {self.half_angle}")
        if not self.radius > 0.0:
            raise ValueError(f"sector radius must be positive, got {self.radius}")


def point_in_sector(p: Point, s: Sector) -> bool:
    dx = p.x - s.apex.x
    dy = p.y - s.apex.y
    dist = math.hypot(dx, dy)
    if dist == 0.0 or dist > s.radius:
        return False
    return angular_difference(azimuth_of(dx, dy), s.center_azimuth) <= s.half_angle


def points_in_sector(xy: np.ndarray, s: Sector) -> np.ndarray:
    """Vectorised :func:`point_in_sector` over an (n, 2) array."""
    dx = xy[:, 0] - s.apex.x
    dy = xy[:, 1] - s.apex.y
    dist = np.hypot(dx, dy)
    az = np.degrees(np.arctan2(dx, dy))
    d = np.mod(az - s.center_azimuth, 360.0)
    d = np.minimum(d, 360.0 - d)
    return (dist > 0.0) & (dist <= s.radius) & (d <= s.half_angle)


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def segment_intersect(a: Segment, b: Segment, tol: float = 1e-9) -> Point | None:
    """Contact point of two closed segments, or None.

    For collinear overlaps the overlap point nearest to ``a.start`` is
    returned. Callers exclude chained predecessors themselves.
    """
    px, py = a.start.x, a.start.y
    rx, ry = a.end.x - px, a.end.y - py
    qx, qy = b.start.x, b.start.y
    sx, sy = b.end.x - qx, b.end.y - qy
    la, lb = a.length, b.length
    denom = _cross(rx, ry, sx, sy)
    wx, wy = qx - px, qy - py
    if abs(denom) > 1e-12 * la * lb:
        t = _cross(wx, wy, sx, sy) / denom
        u = _cross(wx, wy, rx, ry) / denom
        et, eu = tol / la, tol / lb
        if -et <= t <= 1.0 + et and -eu <= u <= 1.0 + eu:
            t = min(max(t, 0.0), 1.0)
            return Point(px + t * rx, py + t * ry)
        return None
    # parallel: only collinear overlaps count
    if abs(_cross(wx, wy, rx, ry)) / la > tol:
        return None
    rr = la * la
    t0 = (wx * rx + wy * ry) / rr
    t1 = ((wx + sx) * rx + (wy + sy) * ry) / rr
    lo, hi = max(0.0, min(t0, t1)), min(1.0, max(t0, t1))
    if lo > hi + tol / la:
        return None
    lo = min(lo, 1.0)
    return Point(px + lo * rx, py + lo * ry)


def first_intersection(p0, p1, starts: np.ndarray, ends: np.ndarray, tol: float = 1e-9):
    """First contact along the segment ``p0 -> p1`` with any of many segments.

    Returns ``(index, t)`` with ``t`` the fraction along ``p0 -> p1``, or
    ``None`` when nothing is touched.
    """
    if len(starts) == 0:
        return None
    px, py = p0
    rx, ry = p1[0] - px, p1[1] - py
    la = math.hypot(rx, ry)
    sx = ends[:, 0] - starts[:, 0]
    sy = ends[:, 1] - starts[:, 1]
    lb = np.hypot(sx, sy)
    wx = starts[:, 0] - px
    wy = starts[:, 1] - py
    denom = rx * sy - ry * sx
    nonpar = np.abs(denom) > 1e-12 * la * lb
    t = np.full(len(starts), np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        tt = (wx * sy - wy * sx) / denom
        uu = (wx * ry - wy * rx) / denom
        et, eu = tol / la, tol / lb
        hit = nonpar & (tt >= -et) & (tt <= 1.0 + et) & (uu >= -eu) & (uu <= 1.0 + eu)
    t[hit] = np.clip(tt[hit], 0.0, 1.0)
    par = ~nonpar
    if par.any():
        coll = par & (np.abs(wx * ry - wy * rx) / la <= tol)
        if coll.any():
            rr = la * la
            t0 = (wx * rx + wy * ry) / rr
            t1 = ((wx + sx) * rx + (wy + sy) * ry) / rr
            lo = np.maximum(0.0, np.minimum(t0, t1))
            hi = np.minimum(1.0, np.maximum(t0, t1))
            ok = coll & (lo <= hi + tol / la)
            t[ok] = np.minimum(lo[ok], 1.0)
    if not np.isfinite(t).any():
        return None
    i = int(np.argmin(t))
    return i, float(t[i])


def point_segment_distance(p, starts: np.ndarray, ends: np.ndarray, return_closest: bool = False):
    """Euclidean distance from point ``p`` to each segment in the arrays."""
    px, py = p
    d = ends - starts
    dd = np.einsum("ij,ij->i", d, d)
    t = ((px - starts[:, 0]) * d[:, 0] + (py - starts[:, 1]) * d[:, 1]) / np.where(dd > 0, dd, 1.0)
    t = np.clip(t, 0.0, 1.0)
    cx = starts[:, 0] + t * d[:, 0]
    cy = starts[:, 1] + t * d[:, 1]
    dist = np.hypot(cx - px, cy - py)
    if return_closest:
        return dist, np.column_stack([cx, cy])
    return dist


class SpatialIndex:
    """Segment store with a uniform-grid bucket index.

    Each segment gets an integer id (insertion order) and a key, normally
    ``(trace id, segment index)``. A segment is registered in every cell its
    bounding box overlaps.
    """

    def __init__(self, cell_size: float, capacity: int = 256):
        if not cell_size > 0:
            raise ValueError("cell_size must be positive")
        self.cell_size = float(cell_size)
        self._starts = np.empty((capacity, 2))
        self._ends = np.empty((capacity, 2))
        self._n = 0
        self.keys: list[tuple[int, int]] = []
        self._cells: dict[tuple[int, int], list[int]] = {}

    def __len__(self):
        return self._n

    @property
    def starts(self) -> np.ndarray:
        return self._starts[: self._n]

    @property
    def ends(self) -> np.ndarray:
        return self._ends[: self._n]

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.starts + self.ends)

    def _cell_range(self, xmin, ymin, xmax, ymax):
        c = self.cell_size
        return (math.floor(xmin / c), math.floor(ymin / c), math.floor(xmax / c), math.floor(ymax / c))

    def insert(self, key: tuple[int, int], seg: Segment) -> int:
        if self._n == len(self._starts):
            self._starts = np.concatenate([self._starts, np.empty_like(self._starts)])
            self._ends = np.concatenate([self._ends, np.empty_like(self._ends)])
        sid = self._n
        self._starts[sid] = (seg.start.x, seg.start.y)
        self._ends[sid] = (seg.end.x, seg.end.y)
        self._n += 1
        self.keys.append(key)
        i0, j0, i1, j1 = self._cell_range(
            min(seg.start.x, seg.end.x), min(seg.start.y, seg.end.y),
            max(seg.start.x, seg.end.x), max(seg.start.y, seg.end.y),
        )
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                self._cells.setdefault((i, j), []).append(sid)
        return sid

    def query_box(self, xmin, ymin, xmax, ymax) -> np.ndarray:
        """Candidate ids whose cells overlap the box (a superset, sorted)."""
        i0, j0, i1, j1 = self._cell_range(xmin, ymin, xmax, ymax)
        if (i1 - i0 + 1) * (j1 - j0 + 1) > 4 * len(self._cells) + 16:
            return np.arange(self._n)
        found: set[int] = set()
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                ids = self._cells.get((i, j))
                if ids:
                    found.update(ids)
        return np.array(sorted(found), dtype=int)

    def query_radius(self, p: Point, r: float) -> np.ndarray:
        """Ids of segments within distance ``r`` of ``p``."""
        cand = self.query_box(p.x - r, p.y - r, p.x + r, p.y + r)
        if len(cand) == 0:
            return cand
        d = point_segment_distance((p.x, p.y), self._starts[cand], self._ends[cand])
        return cand[d <= r]

    def query_sector(self, s: Sector) -> np.ndarray:
        """Ids of segments whose midpoint lies inside the sector."""
        cand = self.query_box(s.apex.x - s.radius, s.apex.y - s.radius,
                              s.apex.x + s.radius, s.apex.y + s.radius)
        if len(cand) == 0:
            return cand
        mid = 0.5 * (self._starts[cand] + self._ends[cand])
        return cand[points_in_sector(mid, s)]


def nearest_segment(p: Point, items: Iterable, exclude: int | None = None):
    """Nearest segment to ``p`` among ``(trace_id, seg_index, Segment)`` items.

    Segments of trace ``exclude`` are skipped. Ties go to the lowest
    ``(trace_id, seg_index)``. Returns ``(trace_id, seg_index, distance)``
    or None.
    """
    items = [it for it in items if it[0] != exclude]
    if not items:
        return None
    starts = np.array([[s.start.x, s.start.y] for _, _, s in items])
    ends = np.array([[s.end.x, s.end.y] for _, _, s in items])
    d = point_segment_distance((p.x, p.y), starts, ends)
    best = min(range(len(items)), key=lambda i: (d[i], items[i][0], items[i][1]))
    return items[best][0], items[best][1], float(d[best])


def polygon_area(poly: Sequence[Sequence[float]]) -> float:
    xy = np.asarray(poly, dtype=float)
    x, y = xy[:, 0], xy[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def points_in_polygon(xy: np.ndarray, poly: Sequence[Sequence[float]]) -> np.ndarray:
    """Even-odd ray casting test for an (n, 2) array of points."""
    xy = np.atleast_2d(np.asarray(xy, dtype=float))
    v = np.asarray(poly, dtype=float)
    x, y = xy[:, 0], xy[:, 1]
    inside = np.zeros(len(xy), dtype=bool)
    x0, y0 = v[-1]
    for x1, y1 in v:
        crosses = (y1 > y) != (y0 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = (x0 - x1) * (y - y1) / (y0 - y1) + x1
        inside ^= crosses & (x < xint)
        x0, y0 = x1, y1
    return inside


def segment_hits_polygon(seg: Segment, poly: Sequence[Sequence[float]]) -> bool:
    """True if the segment has an endpoint inside or crosses an edge of the polygon."""
    ends = np.array([[seg.start.x, seg.start.y], [seg.end.x, seg.end.y]])
    if points_in_polygon(ends, poly).any():
        return True
    v = np.asarray(poly, dtype=float)
    res = first_intersection((seg.start.x, seg.start.y), (seg.end.x, seg.end.y), v, np.roll(v, -1, axis=0))
    return res is not None
