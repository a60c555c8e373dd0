"""
Synthetic example trace sets.

No field coordinates ship with the package. These generators produce
clearly synthetic trace sets with the statistics the examples rely on:

* ``example1`` -- one family, mean orientation 70, std 12, segments of 10,
  observed on the right half of a 300 x 300 domain.
* ``example2`` -- a fault map with dominant orientation 120 and mean segment
  length exactly 2289.27 m.
* ``example3`` -- an outcrop-style map (6900 x 5700 ft) whose segment
  azimuth histogram has four modes near 20, 110, 185 and 290.

All generators are deterministic in ``seed``.
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import Point, Trace, TraceKind, first_intersection

EXAMPLE2_MEAN_SEGMENT_LENGTH = 2289.27


def random_walk_traces(n_traces, domain, start_region, direction_sampler, seg_len_sampler,
                       n_seg_range, turn_std, rng, avoid_crossing=True):
    """Grow independent random-walk polylines, stopping at the domain edge or at contact.

    ``direction_sampler(rng)`` gives the travel azimuth of a new trace and
    ``seg_len_sampler(rng)`` the length of each segment; each segment turns
    by N(0, turn_std) degrees around the trace's initial direction.
    """
    xmin, ymin, xmax, ymax = domain
    rx0, ry0, rx1, ry1 = start_region
    starts = np.empty((0, 2))
    ends = np.empty((0, 2))
    traces = []
    while len(traces) < n_traces:
        p = (rx0 + (rx1 - rx0) * rng.random(), ry0 + (ry1 - ry0) * rng.random())
        az0 = direction_sampler(rng)
        nseg = int(rng.integers(n_seg_range[0], n_seg_range[1] + 1))
        verts = [p]
        new_s, new_e = [], []
        for _ in range(nseg):
            az = az0 + turn_std * rng.standard_normal()
            length = seg_len_sampler(rng)
            q = (p[0] + length * math.sin(math.radians(az)), p[1] + length * math.cos(math.radians(az)))
            if not (xmin <= q[0] <= xmax and ymin <= q[1] <= ymax):
                break
            if avoid_crossing and len(starts):
                hit = first_intersection(p, q, starts, ends)
                if hit is not None:
                    break
            new_s.append(p)
            new_e.append(q)
            verts.append(q)
            p = q
        if len(verts) < 2:
            continue
        starts = np.vstack([starts, new_s])
        ends = np.vstack([ends, new_e])
        traces.append(Trace.from_polyline([Point(*v) for v in verts], kind=TraceKind.KNOWN))
    return traces


def example1(seed: int = 1):
    """Known traces on the right half of a 300 x 300 domain; returns (traces, domain)."""
    rng = np.random.default_rng(seed)
    domain = (0.0, 0.0, 300.0, 300.0)
    traces = random_walk_traces(
        40, domain, (150.0, 0.0, 300.0, 300.0),
        direction_sampler=lambda r: 70.0 + 12.0 * r.standard_normal() + (180.0 if r.random() < 0.5 else 0.0),
        seg_len_sampler=lambda r: 10.0, n_seg_range=(4, 14), turn_std=3.0, rng=rng,
    )
    traces = [_clip_x(t, 150.0) for t in traces]
    return [t for t in traces if t is not None], domain


def _clip_x(trace, xcut):
    verts = [v for v in trace.polyline() if v.x >= xcut]
    if len(verts) < 2:
        return None
    return Trace.from_polyline(verts, kind=trace.kind)


def example2(seed: int = 2):
    """Fault map, dominant folded orientation 120; returns (traces, domain)."""
    rng = np.random.default_rng(seed)
    side = 84_000.0
    domain = (0.0, 0.0, side, side)

    def direction(r):
        base = 120.0 if r.random() < 0.8 else 35.0
        return base + 10.0 * r.standard_normal() + (180.0 if r.random() < 0.5 else 0.0)

    traces = random_walk_traces(
        70, domain, domain, direction_sampler=direction,
        seg_len_sampler=lambda r: float(r.lognormal(math.log(2000.0), 0.4)),
        n_seg_range=(2, 12), turn_std=6.0, rng=rng,
    )
    return _rescale_to_mean_length(traces, domain, EXAMPLE2_MEAN_SEGMENT_LENGTH)


def _rescale_to_mean_length(traces, domain, target):
    lengths = [s.length for t in traces for s in t.polyline_segments()]
    k = target / float(np.mean(lengths))
    out = [Trace.from_polyline([Point(v.x * k, v.y * k) for v in t.polyline()], kind=t.kind) for t in traces]
    return out, tuple(c * k for c in domain)


EXAMPLE3_PEAKS = (20.0, 110.0, 185.0, 290.0)
EXAMPLE3_DOMAIN = (0.0, 0.0, 6900.0, 5700.0)
EXAMPLE3_HIDDEN = [[2300.0, 1900.0], [4600.0, 1900.0], [4600.0, 3800.0], [2300.0, 3800.0]]


def example3(seed: int = 3, n_traces: int = 420):
    """Outcrop-style map with four azimuth modes; returns (traces, domain).

    Each trace travels along one of the four modal azimuths, so digitizing
    direction is part of the data, as in the 360-degree histograms.
    """
    rng = np.random.default_rng(seed)
    domain = EXAMPLE3_DOMAIN

    def direction(r):
        return float(r.choice(EXAMPLE3_PEAKS)) + 6.0 * r.standard_normal()

    traces = random_walk_traces(
        n_traces, domain, domain, direction_sampler=direction,
        seg_len_sampler=lambda r: float(r.uniform(80.0, 160.0)),
        n_seg_range=(3, 12), turn_std=5.0, rng=rng,
    )
    return traces, domain
