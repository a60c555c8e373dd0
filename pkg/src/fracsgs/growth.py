"""
Growth-based sequential Gaussian simulation of fracture traces.

Every simulated trace grows from a seed in both directions. In each sweep
every active tip draws a new orientation, from the unconditional angle
distribution when its search sector is empty and otherwise from the local
Gaussian given by kriging the orientations of nearby segments, and adds
one segment. A tip stops when its new segment touches another segment,
leaves the domain, or (optionally) the trace exceeds a length limit.

A sweep has two phases. Orientation draws for all tips read the network as
it stood at the start of the sweep and use their own random substream, so
they may run in parallel. Segments are then placed one tip at a time in
``(trace id, side)`` order against the live network.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from collections import Counter, deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kriging
from .geometry import (
    Point,
    Sector,
    Segment,
    SpatialIndex,
    Trace,
    TraceKind,
    angular_difference,
    first_intersection,
    point_segment_distance,
    points_in_polygon,
    polygon_area,
    segment_hits_polygon,
)
from .transform import NormalScoreTable, build_table, circular_stats, fold_azimuth, gap_origin
from .variogram import SphericalModel, empirical_variogram, fit_spherical

logger = logging.getLogger(__name__)

SIDE_A, SIDE_B = 0, 1

# substream tags for np.random.SeedSequence spawn keys
_STREAM_SEEDS = 1
_STREAM_GROWTH = 2

SEED_MODES = ("poisson", "fixed_count", "user_points", "hidden_midpoints")


class ConfigError(ValueError):
    pass


@dataclass
class SimConfig:
    """Everything needed to reproduce one run.

    Optional values left as ``None`` are derived from the known traces by
    :func:`resolve_config`: segment length from the mean segment length,
    angle mean/std from the folded circular statistics, and the sector
    radius from the variogram range.
    """

    domain: tuple[float, float, float, float]
    units: str = "m"
    known_traces: str | None = None
    hidden_region: list | None = None
    long_fracture_quantile: float = 0.9
    replay_known: bool = False
    seed_mode: str = "poisson"
    count: int | None = None
    intensity: float | None = None
    user_points: list | None = None
    region: list | None = None
    segment_length: float | None = None
    angle_mean: float | None = None
    angle_std: float | None = None
    sector_radius: float | None = None
    max_trace_length: float | None = None
    max_iterations: int = 500
    max_neighbors: int = 16
    rng_seed: int = 0
    transform: str = "raw"
    kriging: str = "simple"
    variogram: SphericalModel | str = "fit"

    def validate(self) -> "SimConfig":
        xmin, ymin, xmax, ymax = self.domain
        if not (xmax > xmin and ymax > ymin):
            raise ConfigError("domain: need xmax > xmin and ymax > ymin")
        if self.seed_mode not in SEED_MODES:
            raise ConfigError(f"seeding.mode: expected one of {SEED_MODES}, got {self.seed_mode!r}")
        if self.transform not in ("raw", "nscore"):
            raise ConfigError(f"growth.transform: expected raw|nscore, got {self.transform!r}")
        if self.kriging not in ("simple", "ordinary"):
            raise ConfigError(f"growth.kriging: expected simple|ordinary, got {self.kriging!r}")
        if self.seed_mode == "fixed_count" and (self.count is None or self.count < 0):
            raise ConfigError("seeding.count: fixed_count mode needs count >= 0")
        if self.seed_mode == "poisson" and self.count is None and self.intensity is None:
            raise ConfigError("seeding: poisson mode needs intensity or count")
        if self.count is not None and self.count < 0:
            raise ConfigError("seeding.count must be >= 0")
        if self.intensity is not None and not self.intensity >= 0:
            raise ConfigError("seeding.intensity must be >= 0")
        if self.seed_mode == "user_points" and not self.user_points:
            raise ConfigError("seeding.points: user_points mode needs a list of [x, y, azimuth]")
        for p in self.user_points or []:
            if len(p) != 3:
                raise ConfigError("seeding.points: each point is [x, y, azimuth]")
        if self.seed_mode == "hidden_midpoints" and self.hidden_region is None:
            raise ConfigError("seeding: hidden_midpoints mode needs data.hidden_region")
        for name in ("segment_length", "angle_std", "sector_radius", "max_trace_length"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v > 0):
                raise ConfigError(f"growth.{name} must be positive, got {v}")
        if self.angle_std is not None and not self.angle_std < 90:
            raise ConfigError("growth.angle_std must be < 90 (it is the sector half-angle)")
        if self.angle_mean is not None and not math.isfinite(self.angle_mean):
            raise ConfigError("growth.angle_mean must be finite")
        if self.max_iterations < 0:
            raise ConfigError("growth.max_iterations must be >= 0")
        if self.max_neighbors < 1:
            raise ConfigError("growth.max_neighbors must be >= 1")
        if not 0.0 <= self.long_fracture_quantile <= 1.0:
            raise ConfigError("data.long_fracture_quantile must be in [0, 1]")
        if not 0 <= self.rng_seed < 2**64:
            raise ConfigError("rng_seed must be an unsigned 64-bit integer")
        if not (isinstance(self.variogram, SphericalModel) or self.variogram == "fit"):
            raise ConfigError("variogram must be a spherical model or 'fit'")
        for poly in region_polygons(self.region):
            xy = np.asarray(poly, dtype=float)
            if xy.ndim != 2 or xy.shape[1] != 2 or len(xy) < 3:
                raise ConfigError("seeding.region: polygons need >= 3 [x, y] vertices")
            if (xy[:, 0].min() < xmin or xy[:, 0].max() > xmax
                    or xy[:, 1].min() < ymin or xy[:, 1].max() > ymax):
                raise ConfigError("seeding.region must lie within the domain")
        return self

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["domain"] = list(self.domain)
        if isinstance(self.variogram, SphericalModel):
            d["variogram"] = {"nugget": self.variogram.nugget, "sill": self.variogram.sill,
                              "range": self.variogram.range}
        return d


def region_polygons(region) -> list:
    """Normalise a polygon or list of polygons to a list of polygons."""
    if region is None:
        return []
    arr = region
    if len(arr) and len(arr[0]) and isinstance(arr[0][0], (int, float)):
        return [arr]
    return list(arr)


@dataclass
class GrowthTip:
    trace_id: int
    side: int
    position: Point
    azimuth: float  # direction of travel, unfolded
    accumulated_length: float = 0.0
    active: bool = True
    reason: str | None = None
    script: deque | None = None  # replay: segments to re-emit verbatim


class FractureNetwork:
    """Traces plus a spatial index over all their segments.

    The conditioning cloud is the set of visible segment midpoints with their
    folded azimuths. Known traces replayed from their midpoints are
    registered up front but stay hidden until re-emitted; hidden segments
    still block growth.
    """

    def __init__(self, domain, cell_size: float, tol: float | None = None):
        self.domain = tuple(float(v) for v in domain)
        xmin, ymin, xmax, ymax = self.domain
        self.tol = tol if tol is not None else 1e-9 * math.hypot(xmax - xmin, ymax - ymin)
        self.traces: list[Trace] = []
        self.index = SpatialIndex(cell_size)
        self.seg_trace: list[int] = []
        self.seg_side: list[int] = []
        self._folded = np.empty(256)
        self._visible = np.zeros(256, dtype=bool)
        self._n_visible = 0
        # segment id per (trace, side) in chain order
        self._chain_ids: list[tuple[list[int], list[int]]] = []

    def __len__(self):
        return self._n_visible

    @property
    def n_segments(self) -> int:
        return self._n_visible

    @property
    def visible(self) -> np.ndarray:
        return self._visible[: len(self.index)]

    @property
    def folded(self) -> np.ndarray:
        return self._folded[: len(self.index)]

    def _register(self, trace_id: int, side: int, seg: Segment, visible: bool) -> int:
        key = (trace_id, len(self.seg_trace))
        sid = self.index.insert(key, seg)
        if sid >= len(self._folded):
            self._folded = np.concatenate([self._folded, np.empty_like(self._folded)])
            self._visible = np.concatenate([self._visible, np.zeros_like(self._visible)])
        self._folded[sid] = seg.folded_azimuth
        self._visible[sid] = visible
        self._n_visible += bool(visible)
        self.seg_trace.append(trace_id)
        self.seg_side.append(side)
        self._chain_ids[trace_id][side].append(sid)
        return sid

    def add_trace(self, trace: Trace, pending: bool = False) -> int:
        """Register a trace and its current segments.

        With ``pending`` the segments are indexed as hidden and the trace's
        chains are emptied; :meth:`reveal_next` re-emits them.
        """
        tid = len(self.traces)
        self._chain_ids.append(([], []))
        own = dataclasses.replace(trace, sides=([], []), terminations=list(trace.terminations))
        self.traces.append(own)
        for side in (SIDE_A, SIDE_B):
            for seg in trace.sides[side]:
                self._register(tid, side, seg, visible=not pending)
                if not pending:
                    own.sides[side].append(seg)
        return tid

    def append(self, trace_id: int, side: int, seg: Segment) -> int:
        self.traces[trace_id].sides[side].append(seg)
        return self._register(trace_id, side, seg, visible=True)

    def reveal_next(self, trace_id: int, side: int) -> Segment:
        trace = self.traces[trace_id]
        k = len(trace.sides[side])
        sid = self._chain_ids[trace_id][side][k]
        seg = Segment(Point(*self.index.starts[sid]), Point(*self.index.ends[sid]))
        trace.sides[side].append(seg)
        self._visible[sid] = True
        self._n_visible += 1
        return seg

    def chain_ids(self, trace_id: int, side: int) -> list[int]:
        return self._chain_ids[trace_id][side]

    def segment_items(self):
        """``(trace id, segment id, Segment)`` for every visible segment."""
        out = []
        for sid in np.flatnonzero(self.visible):
            out.append((self.seg_trace[sid], int(sid),
                        Segment(Point(*self.index.starts[sid]), Point(*self.index.ends[sid]))))
        return out

    def nearest_segment(self, p: Point, exclude: int | None = None, mask: np.ndarray | None = None):
        """Nearest visible segment not on trace ``exclude``.

        Returns ``(trace id, segment id, distance, closest point)`` or None.
        Ties go to the lowest ``(trace id, segment id)``.
        """
        n = len(self.index)
        ok = self.visible.copy() if mask is None else mask[:n].copy()
        if exclude is not None:
            ok &= np.asarray(self.seg_trace[:n]) != exclude
        ids = np.flatnonzero(ok)
        if len(ids) == 0:
            return None
        d, closest = point_segment_distance((p.x, p.y), self.index.starts[ids], self.index.ends[ids],
                                            return_closest=True)
        tied = np.flatnonzero(d == d.min())
        best = min(tied, key=lambda i: (self.seg_trace[ids[i]], ids[i]))
        return self.seg_trace[ids[best]], int(ids[best]), float(d[best]), Point(*closest[best])


@dataclass
class GrowthContext:
    """Resolved parameters shared by all grow steps of a run."""

    segment_length: float
    angle_mean: float
    angle_std: float
    sector_radius: float
    model: SphericalModel
    transform: str = "raw"
    kriging: str = "simple"
    max_neighbors: int = 16
    max_trace_length: float | None = None
    table: NormalScoreTable | None = None

    @classmethod
    def from_config(cls, cfg: SimConfig, table: NormalScoreTable | None = None) -> "GrowthContext":
        return cls(
            segment_length=cfg.segment_length, angle_mean=cfg.angle_mean, angle_std=cfg.angle_std,
            sector_radius=cfg.sector_radius, model=cfg.variogram, transform=cfg.transform,
            kriging=cfg.kriging, max_neighbors=cfg.max_neighbors,
            max_trace_length=cfg.max_trace_length, table=table,
        )


@dataclass
class RunReport:
    iterations: int = 0
    n_segments: int = 0
    terminations: dict = field(default_factory=dict)
    contacts: list = field(default_factory=list)
    counters: Counter = field(default_factory=Counter)
    config: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "n_segments": self.n_segments,
            "terminations": {str(k): v for k, v in sorted(self.terminations.items())},
            "contacts": self.contacts,
            "counters": dict(sorted(self.counters.items())),
            "config": self.config,
        }


# -- seeding -----------------------------------------------------------------

def _uniform_in_polygons(polys, n, rng):
    areas = np.array([polygon_area(p) for p in polys])
    pts = []
    which = rng.choice(len(polys), size=n, p=areas / areas.sum()) if len(polys) > 1 else np.zeros(n, int)
    for k, poly in enumerate(polys):
        m = int((which == k).sum())
        xy = np.asarray(poly, dtype=float)
        lo, hi = xy.min(axis=0), xy.max(axis=0)
        got = np.empty((0, 2))
        while len(got) < m:
            cand = lo + (hi - lo) * rng.random((2 * (m - len(got)) + 8, 2))
            got = np.vstack([got, cand[points_in_polygon(cand, poly)]])
        pts.append(got[:m])
    # restore draw order so seeds are interleaved as drawn
    out = np.empty((n, 2))
    for k in range(len(polys)):
        out[which == k] = pts[k]
    return out


def seed_poisson(region, rng: np.random.Generator, *, count: int | None = None,
                 intensity: float | None = None, azimuth_sampler=None) -> list[tuple[Point, float]]:
    """Uniform seeds in the region, either exactly ``count`` or Poisson(intensity * area) many.

    ``azimuth_sampler(rng)`` returns a folded orientation; a uniformly random
    sign picks one of its two travel directions.
    """
    polys = region_polygons(region)
    area = sum(polygon_area(p) for p in polys)
    if not area > 0:
        raise ValueError("seeding region is empty")
    if count is None:
        if intensity is None:
            raise ValueError("give count or intensity")
        count = int(rng.poisson(intensity * area))
    if count == 0:
        return []
    xy = _uniform_in_polygons(polys, count, rng)
    seeds = []
    for x, y in xy:
        az = azimuth_sampler(rng) if azimuth_sampler is not None else 180.0 * rng.random()
        az = fold_azimuth(az) + (180.0 if rng.random() < 0.5 else 0.0)
        seeds.append((Point(float(x), float(y)), az))
    return seeds


def seed_from_known_midpoints(known: Sequence[Trace], first_id: int = 0, replay: bool = True) -> list[GrowthTip]:
    """Two tips per trace at its arc-length midpoint.

    With ``replay`` each tip carries the original chain and re-emits it
    segment by segment; otherwise the tips start from the midpoint along
    the original directions and grow stochastically.
    """
    tips = []
    for k, tr in enumerate(known):
        tid = first_id + k
        for side in (SIDE_A, SIDE_B):
            chain = tr.sides[side]
            if chain:
                az = chain[0].azimuth
            else:
                other = tr.sides[1 - side]
                az = (other[0].azimuth + 180.0) % 360.0
            tips.append(GrowthTip(tid, side, tr.origin, az,
                                  script=deque(chain) if replay else None))
    return tips


def hide_region(traces: Sequence[Trace], polygon, long_fracture_quantile: float = 0.9):
    """Split traces into (kept, hidden) for a hidden-region test.

    A trace touching the polygon is hidden, unless it is long (length at or
    above the given quantile of all trace lengths) and its midpoint lies
    outside the polygon; such traces stay as conditioning data.
    """
    if not traces:
        return [], []
    lengths = np.array([t.length for t in traces])
    long_cut = np.quantile(lengths, long_fracture_quantile)
    kept, hidden = [], []
    for t, length in zip(traces, lengths):
        touches = any(segment_hits_polygon(s, polygon) for s in t.polyline_segments())
        if not touches:
            kept.append(t)
            continue
        mid_inside = bool(points_in_polygon(np.array([[t.origin.x, t.origin.y]]), polygon)[0])
        if length >= long_cut and not mid_inside:
            kept.append(t)
        else:
            hidden.append(t)
    return kept, hidden


# -- one step ------------------------------------------------------------------

def _recent_ids(net: FractureNetwork, tip: GrowthTip, k: int = 2) -> list[int]:
    own = net.chain_ids(tip.trace_id, tip.side)[: len(net.traces[tip.trace_id].sides[tip.side])]
    ids = own[-k:]
    if len(own) < k:
        # near the origin the other chain's first segment shares the hinge
        other = net.chain_ids(tip.trace_id, 1 - tip.side)[: len(net.traces[tip.trace_id].sides[1 - tip.side])]
        ids = ids + other[:1]
    return ids


def gather_neighbors(tip: GrowthTip, net: FractureNetwork, ctx: GrowthContext,
                     visible: np.ndarray | None = None) -> list[tuple[Point, float]]:
    """Conditioning points for a tip: cloud points in its search sector plus one virtual point.

    The virtual point sits halfway between the tip and the closest point of
    the nearest segment of another trace and carries that segment's folded
    azimuth. It is only added when the sector holds at least one point.
    ``visible`` restricts the search to a snapshot of the network.
    """
    vis = net.visible if visible is None else visible
    sector = Sector(tip.position, tip.azimuth, ctx.angle_std, ctx.sector_radius)
    ids = net.index.query_sector(sector)
    if len(ids):
        ids = ids[ids < len(vis)]
        ids = ids[vis[ids]]
        recent = _recent_ids(net, tip)
        if recent:
            ids = ids[~np.isin(ids, recent)]
    if len(ids) == 0:
        return []
    mids = 0.5 * (net.index.starts[ids] + net.index.ends[ids])
    pts = [(Point(float(x), float(y)), float(net.folded[i])) for (x, y), i in zip(mids, ids)]
    near = net.nearest_segment(tip.position, exclude=tip.trace_id, mask=vis)
    if near is not None:
        _, sid, _, c = near
        vp = Point(0.5 * (tip.position.x + c.x), 0.5 * (tip.position.y + c.y))
        pts.append((vp, float(net.folded[sid])))
    if len(pts) > ctx.max_neighbors:
        d = [tip.position.distance(p) for p, _ in pts]
        order = sorted(range(len(pts)), key=lambda i: d[i])[: ctx.max_neighbors]
        pts = [pts[i] for i in sorted(order)]
    return pts


def _unwrap(values, reference):
    """Shift folded angles by multiples of 180 to lie within 90 degrees of ``reference``."""
    return reference + np.mod(np.asarray(values) - reference + 90.0, 180.0) - 90.0


def draw_orientation(tip: GrowthTip, neighbors, ctx: GrowthContext, rng: np.random.Generator,
                     counters: Counter | None = None) -> float:
    """Folded orientation for the next segment of ``tip``."""
    counters = counters if counters is not None else Counter()
    if len(neighbors) <= 1:
        counters["unconditional"] += 1
        return _unconditional(ctx, rng)
    xy = np.array([[p.x, p.y] for p, _ in neighbors])
    vals = np.array([v for _, v in neighbors])
    scale2 = 1.0 / ctx.model.total_sill  # model used as a correlation structure
    if ctx.transform == "nscore":
        y = ctx.table.to_normal(vals)
        mean = 0.0
    else:
        ref = fold_azimuth(tip.azimuth)
        y = _unwrap(vals, ref)
        mean = float(_unwrap(ctx.angle_mean, ref))
        scale2 *= ctx.angle_std**2
    try:
        res = kriging.solve(xy, y, (tip.position.x, tip.position.y), ctx.model, mean=mean, mode=ctx.kriging)
    except kriging.SingularSystemError:
        logger.warning("singular kriging system at %s; unconditional draw", tip.position)
        counters["fallback"] += 1
        return _unconditional(ctx, rng)
    counters["kriged"] += 1
    counters["clamped"] += int(res.clamped)
    draw = kriging.local_gaussian_draw(dataclasses.replace(res, variance=res.variance * scale2), rng)
    if ctx.transform == "nscore":
        return ctx.table.from_normal(draw)
    return fold_azimuth(draw)


def _unconditional(ctx: GrowthContext, rng) -> float:
    z = rng.standard_normal()
    if ctx.transform == "nscore":
        return ctx.table.from_normal(z)
    return fold_azimuth(ctx.angle_mean + ctx.angle_std * z)


def unfold(folded: float, travel: float) -> float:
    """Pick the travel direction of a folded orientation within 90 degrees of ``travel``."""
    a = folded % 180.0
    if angular_difference(a, travel) <= 90.0:
        return a
    return a + 180.0


def _clip_to_domain(p: Point, q: Point, domain) -> tuple[Point, bool]:
    xmin, ymin, xmax, ymax = domain
    t = 1.0
    dx, dy = q.x - p.x, q.y - p.y
    if dx > 0 and q.x > xmax:
        t = min(t, (xmax - p.x) / dx)
    if dx < 0 and q.x < xmin:
        t = min(t, (xmin - p.x) / dx)
    if dy > 0 and q.y > ymax:
        t = min(t, (ymax - p.y) / dy)
    if dy < 0 and q.y < ymin:
        t = min(t, (ymin - p.y) / dy)
    if t >= 1.0:
        return q, False
    t = max(t, 0.0)
    return Point(p.x + t * dx, p.y + t * dy), True


def place_segment(tip: GrowthTip, azimuth: float, length: float, net: FractureNetwork,
                  ctx: GrowthContext | None = None, report: RunReport | None = None) -> str:
    """Try to extend ``tip`` by one segment; returns 'extended' or a termination reason."""
    p = tip.position
    q, clipped = _clip_to_domain(p, p.offset(azimuth, length), net.domain)
    tol = net.tol
    n = len(net.index)
    cand = net.index.query_box(min(p.x, q.x) - tol, min(p.y, q.y) - tol,
                               max(p.x, q.x) + tol, max(p.y, q.y) + tol)
    cand = cand[cand < n]
    recent = _recent_ids(net, tip)
    if recent and len(cand):
        cand = cand[~np.isin(cand, recent)]
    hit = first_intersection((p.x, p.y), (q.x, q.y), net.index.starts[cand], net.index.ends[cand], tol) \
        if len(cand) else None
    trace = net.traces[tip.trace_id]
    if hit is not None:
        k, t = hit
        end = Point(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y))
        if p.distance(end) > tol:
            net.append(tip.trace_id, tip.side, Segment(p, end))
            tip.accumulated_length += p.distance(end)
            tip.position = end
        if report is not None:
            other = int(cand[k])
            report.contacts.append([tip.trace_id, tip.side, end.x, end.y, net.seg_trace[other]])
        return _terminate(tip, trace, "intersection")
    max_len = ctx.max_trace_length if ctx is not None else None
    if max_len is not None and trace.length + p.distance(q) > max_len:
        return _terminate(tip, trace, "length")
    if p.distance(q) > tol:
        net.append(tip.trace_id, tip.side, Segment(p, q))
        tip.accumulated_length += p.distance(q)
        tip.position = q
        tip.azimuth = azimuth % 360.0
    if clipped:
        return _terminate(tip, trace, "boundary")
    return "extended"


def _terminate(tip: GrowthTip, trace: Trace, reason: str) -> str:
    tip.active = False
    tip.reason = reason
    trace.terminations[tip.side] = reason
    return reason


def grow_step(tip: GrowthTip, net: FractureNetwork, ctx: GrowthContext, rng: np.random.Generator,
              report: RunReport | None = None) -> str:
    """Draw an orientation for ``tip`` and place the next segment."""
    if not tip.active:
        raise ValueError("tip is terminated")
    counters = report.counters if report is not None else None
    folded = draw_orientation(tip, gather_neighbors(tip, net, ctx), ctx, rng, counters)
    return place_segment(tip, unfold(folded, tip.azimuth), ctx.segment_length, net, ctx, report)


# -- whole run -----------------------------------------------------------------

def _tip_rng(seed: int, tip: GrowthTip, iteration: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(_STREAM_GROWTH, tip.trace_id, tip.side, iteration))
    return np.random.default_rng(ss)


def known_statistics(traces: Sequence[Trace]):
    """Polyline segment midpoints, folded azimuths and lengths of a trace set."""
    segs = [s for t in traces for s in t.polyline_segments()]
    mids = np.array([[s.midpoint.x, s.midpoint.y] for s in segs]).reshape(-1, 2)
    folded = np.array([s.folded_azimuth for s in segs])
    lengths = np.array([s.length for s in segs])
    return mids, folded, lengths


def resolve_config(cfg: SimConfig, known: Sequence[Trace]) -> tuple[SimConfig, NormalScoreTable | None]:
    """Fill derived parameters from the known traces; returns the effective config."""
    cfg = dataclasses.replace(cfg)
    mids, folded, lengths = known_statistics(known)
    if cfg.segment_length is None:
        if not len(lengths):
            raise ConfigError("growth.segment_length: no known traces to derive it from")
        cfg.segment_length = float(lengths.mean())
    if cfg.angle_mean is None or cfg.angle_std is None:
        if len(folded) < 2:
            raise ConfigError("growth.angle_mean/angle_std: not enough known segments to derive them")
        m, s = circular_stats(folded, 180.0)
        cfg.angle_mean = m if cfg.angle_mean is None else cfg.angle_mean
        cfg.angle_std = s if cfg.angle_std is None else cfg.angle_std
    table = None
    if cfg.transform == "nscore":
        if len(folded) < 2:
            raise ConfigError("growth.transform = nscore needs known traces")
        table = build_table(folded, origin=gap_origin(folded))
    if cfg.variogram == "fit":
        if len(folded) < 3:
            raise ConfigError("variogram = fit needs known traces")
        vals = table.to_normal(folded) if table is not None else _unwrap(folded, cfg.angle_mean)
        xmin, ymin, xmax, ymax = cfg.domain
        max_lag = 0.5 * math.hypot(xmax - xmin, ymax - ymin)
        ev = empirical_variogram(mids, vals, bin_width=max_lag / 15.0, max_lag=max_lag)
        cfg.variogram = fit_spherical(ev)
    if cfg.sector_radius is None:
        cfg.sector_radius = float(cfg.variogram.range)
    return cfg.validate(), table


def run_simulation(cfg: SimConfig, known: Sequence[Trace] | None = None,
                   workers: int = 1) -> tuple[FractureNetwork, RunReport]:
    """Simulate one realization.

    ``known`` overrides the trace file named in the config. ``workers`` sets
    the thread count for the orientation draws; it never changes the output.
    """
    cfg.validate()
    if known is None:
        known = []
        if cfg.known_traces:
            from .io import load_traces
            known = load_traces(cfg.known_traces)
    hidden: list[Trace] = []
    if cfg.hidden_region is not None:
        known, hidden = hide_region(known, cfg.hidden_region, cfg.long_fracture_quantile)
    cfg, table = resolve_config(cfg, known)
    ctx = GrowthContext.from_config(cfg, table)
    report = RunReport(config=cfg.as_dict())

    net = FractureNetwork(cfg.domain, cell_size=cfg.sector_radius)
    tips: list[GrowthTip] = []
    for tr in known:
        net.add_trace(tr, pending=cfg.replay_known)
    if cfg.replay_known:
        tips.extend(seed_from_known_midpoints(known, 0, replay=True))

    seed_rng = np.random.default_rng(np.random.SeedSequence(cfg.rng_seed, spawn_key=(_STREAM_SEEDS,)))
    first = len(net.traces)
    if cfg.seed_mode == "hidden_midpoints":
        for tr in hidden:
            net.add_trace(Trace(origin=tr.origin, kind=TraceKind.SIMULATED))
        tips.extend(seed_from_known_midpoints(hidden, first, replay=False))
    else:
        seeds = make_seeds(cfg, ctx, seed_rng)
        for pt, az in seeds:
            tid = net.add_trace(Trace(origin=pt, kind=TraceKind.SIMULATED, split_origin=True))
            for side, a in ((SIDE_A, az), (SIDE_B, (az + 180.0) % 360.0)):
                tip = GrowthTip(tid, side, pt, a)
                if place_segment(tip, a, 0.5 * ctx.segment_length, net, ctx, report) == "extended":
                    tips.append(tip)
    tips.sort(key=lambda t: (t.trace_id, t.side))

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    it = 0
    try:
        while it < cfg.max_iterations and any(t.active for t in tips):
            active = [t for t in tips if t.active]
            snapshot = net.visible.copy()
            stoch = [t for t in active if t.script is None]

            def draw(tip, _it=it):
                c = Counter()
                nb = gather_neighbors(tip, net, ctx, visible=snapshot)
                return draw_orientation(tip, nb, ctx, _tip_rng(cfg.rng_seed, tip, _it), c), c

            results = list(pool.map(draw, stoch)) if pool else [draw(t) for t in stoch]
            drawn = {id(t): r for t, r in zip(stoch, results)}
            for tip in active:
                if tip.script is not None:
                    _replay_step(tip, net)
                    continue
                folded, c = drawn[id(tip)]
                report.counters.update(c)
                place_segment(tip, unfold(folded, tip.azimuth), ctx.segment_length, net, ctx, report)
            it += 1
    finally:
        if pool:
            pool.shutdown()

    for tip in tips:
        if tip.active:
            tip.active = False
            tip.reason = "replayed" if tip.script is not None and not tip.script else "iterations"
            net.traces[tip.trace_id].terminations[tip.side] = tip.reason
    report.iterations = it
    report.n_segments = net.n_segments
    report.terminations = {i: list(t.terminations) for i, t in enumerate(net.traces)}
    report.counters["seeds"] = len(net.traces) - first
    return net, report


def _replay_step(tip: GrowthTip, net: FractureNetwork) -> None:
    if not tip.script:
        tip.active = False
        tip.reason = "replayed"
        net.traces[tip.trace_id].terminations[tip.side] = "replayed"
        return
    seg = tip.script.popleft()
    net.reveal_next(tip.trace_id, tip.side)
    tip.position = seg.end
    tip.azimuth = seg.azimuth
    tip.accumulated_length += seg.length
    if not tip.script:
        tip.active = False
        tip.reason = "replayed"
        net.traces[tip.trace_id].terminations[tip.side] = "replayed"


def preview_seeds(cfg: SimConfig, known: Sequence[Trace] | None = None) -> list[tuple[Point, float]]:
    """Seed points and azimuths exactly as :func:`run_simulation` would place them."""
    cfg.validate()
    if known is None:
        known = []
        if cfg.known_traces:
            from .io import load_traces
            known = load_traces(cfg.known_traces)
    hidden: list[Trace] = []
    if cfg.hidden_region is not None:
        known, hidden = hide_region(known, cfg.hidden_region, cfg.long_fracture_quantile)
    if cfg.seed_mode == "hidden_midpoints":
        return [(t.origin, t.sides[SIDE_A][0].azimuth if t.sides[SIDE_A] else 0.0) for t in hidden]
    cfg, table = resolve_config(cfg, known)
    ctx = GrowthContext.from_config(cfg, table)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.rng_seed, spawn_key=(_STREAM_SEEDS,)))
    return make_seeds(cfg, ctx, rng)


def make_seeds(cfg: SimConfig, ctx: GrowthContext, rng) -> list[tuple[Point, float]]:
    if cfg.seed_mode == "user_points":
        return [(Point(float(x), float(y)), float(az) % 360.0) for x, y, az in cfg.user_points]
    xmin, ymin, xmax, ymax = cfg.domain
    region = cfg.region or cfg.hidden_region or [[xmin, ymin], [xmax, ymin], [xmax, ymax], [xmin, ymax]]
    count = cfg.count if cfg.seed_mode == "fixed_count" or cfg.intensity is None else None
    return seed_poisson(region, rng, count=count, intensity=cfg.intensity,
                        azimuth_sampler=lambda r: _unconditional(ctx, r))
