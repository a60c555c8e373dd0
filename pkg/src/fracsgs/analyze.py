"""
Trace-set quantification in the style of FracPaQ: length and orientation
statistics, circular histograms and their peaks, and network comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks as _scipy_find_peaks

from .geometry import Segment, Trace, angular_difference, points_in_polygon
from .transform import circular_stats
from .variogram import EmpiricalVariogram, empirical_variogram


@dataclass(frozen=True)
class AngleHistogram:
    edges: np.ndarray
    counts: np.ndarray
    period: float

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def width(self) -> float:
        return self.period / len(self.counts)

    def to_csv(self) -> str:
        rows = ["bin_start,bin_end,count"]
        rows += [f"{a!r},{b!r},{int(c)}" for a, b, c in zip(self.edges[:-1], self.edges[1:], self.counts)]
        return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class Peak:
    angle: float
    prominence: float
    count: int


@dataclass
class TraceStats:
    n_traces: int
    n_segments: int
    segment_length: dict
    trace_length: dict
    folded_mean: float
    folded_std: float
    azimuths: np.ndarray = field(repr=False)
    segment_lengths: np.ndarray = field(repr=False)
    trace_lengths: np.ndarray = field(repr=False)
    angle_hist: AngleHistogram = field(repr=False)
    folded_hist: AngleHistogram = field(repr=False)
    segment_length_hist: tuple = field(repr=False)
    trace_length_hist: tuple = field(repr=False)

    @property
    def folded(self) -> np.ndarray:
        return np.mod(self.azimuths, 180.0)

    def as_dict(self) -> dict:
        return {
            "n_traces": self.n_traces,
            "n_segments": self.n_segments,
            "segment_length": self.segment_length,
            "trace_length": self.trace_length,
            "folded_azimuth": {"circular_mean": self.folded_mean, "circular_std": self.folded_std},
            "peaks": [p.__dict__ for p in find_peaks(self.angle_hist)],
            "folded_peaks": [p.__dict__ for p in find_peaks(self.folded_hist)],
        }


def segments_of(traces, region=None) -> list[Segment]:
    """Polyline segments of the traces, optionally only those with midpoint in ``region``."""
    segs = [s for t in traces for s in t.polyline_segments()]
    if region is not None and segs:
        mids = np.array([[s.midpoint.x, s.midpoint.y] for s in segs])
        inside = points_in_polygon(mids, region)
        segs = [s for s, ok in zip(segs, inside) if ok]
    return segs


def angle_histogram(angles, nbins: int = 36, period: float = 360.0) -> AngleHistogram:
    a = np.mod(np.asarray(angles, dtype=float), period)
    counts, edges = np.histogram(a, bins=nbins, range=(0.0, period))
    return AngleHistogram(edges, counts, float(period))


def _summary(x) -> dict:
    return {"mean": float(np.mean(x)), "min": float(np.min(x)), "max": float(np.max(x))}


def compute_stats(traces, nbins: int = 36) -> TraceStats:
    if not traces:
        raise ValueError("no traces")
    segs = segments_of(traces)
    if not segs:
        raise ValueError("traces have no segments")
    az = np.array([s.azimuth for s in segs])
    seg_len = np.array([s.length for s in segs])
    tr_len = np.array([sum(s.length for s in t.polyline_segments()) for t in traces])
    fm, fs = circular_stats(np.mod(az, 180.0), 180.0)
    return TraceStats(
        n_traces=len(traces),
        n_segments=len(segs),
        segment_length=_summary(seg_len),
        trace_length=_summary(tr_len),
        folded_mean=fm,
        folded_std=fs,
        azimuths=az,
        segment_lengths=seg_len,
        trace_lengths=tr_len,
        angle_hist=angle_histogram(az, nbins, 360.0),
        folded_hist=angle_histogram(az, nbins // 2, 180.0),
        segment_length_hist=np.histogram(seg_len, bins="sturges"),
        trace_length_hist=np.histogram(tr_len, bins="sturges"),
    )


def segment_variogram(traces, attribute: str = "length", bin_width: float | None = None,
                      max_lag: float | None = None) -> EmpiricalVariogram:
    """Variogram of a per-segment attribute over segment midpoints.

    ``attribute`` is ``"length"`` or ``"folded"`` (folded azimuth).
    """
    segs = segments_of(traces)
    mids = np.array([[s.midpoint.x, s.midpoint.y] for s in segs])
    if attribute == "length":
        vals = np.array([s.length for s in segs])
    elif attribute == "folded":
        vals = np.array([s.folded_azimuth for s in segs])
    else:
        raise ValueError(f"unknown attribute {attribute!r}")
    if max_lag is None:
        span = mids.max(axis=0) - mids.min(axis=0)
        max_lag = 0.5 * float(np.hypot(*span))
    if bin_width is None:
        bin_width = max_lag / 15.0
    return empirical_variogram(mids, vals, bin_width, max_lag)


def find_peaks(hist: AngleHistogram, min_prominence: float | None = None) -> list[Peak]:
    """Local maxima of a circular histogram.

    The default prominence threshold is 10% of the histogram's max - min
    range. A peak's angle is the centroid of its bin and the two adjacent
    bins, weighted by count above the histogram minimum.
    """
    h = np.asarray(hist.counts, dtype=float)
    n = len(h)
    span = h.max() - h.min()
    if span <= 0:
        return []
    if min_prominence is None:
        min_prominence = 0.1 * span
    tiled = np.concatenate([h, h, h])
    idx, props = _scipy_find_peaks(tiled, prominence=(min_prominence, None))
    centers = hist.centers
    peaks = []
    for i, prom in zip(idx, props["prominences"]):
        if not n <= i < 2 * n:
            continue
        k = i - n
        nb = [(k - 1) % n, k, (k + 1) % n]
        w = h[nb] - h.min()
        ang = np.radians(centers[nb] * 360.0 / hist.period)
        c = float(np.sum(w * np.cos(ang)))
        s = float(np.sum(w * np.sin(ang)))
        angle = (np.degrees(np.arctan2(s, c)) * hist.period / 360.0) % hist.period
        peaks.append(Peak(float(angle), float(prom), int(h[k])))
    return sorted(peaks, key=lambda p: p.angle)


def match_peaks(a, b, period: float = 360.0) -> list[tuple[float, float, float]]:
    """Greedy pairing of two angle lists by circular distance.

    Returns ``(angle_a, angle_b, deviation)`` ordered as the angles of ``a``.
    """
    pairs = sorted(
        ((angular_difference(x, y, period), i, j) for i, x in enumerate(a) for j, y in enumerate(b)),
    )
    used_a, used_b, out = set(), set(), []
    for d, i, j in pairs:
        if i in used_a or j in used_b:
            continue
        used_a.add(i)
        used_b.add(j)
        out.append((i, (float(a[i]), float(b[j]), float(d))))
    return [m for _, m in sorted(out)]


@dataclass
class ComparisonReport:
    hist_a: AngleHistogram
    hist_b: AngleHistogram
    peaks_a: list
    peaks_b: list
    matches: list
    unmatched_a: list
    mean_a: float
    mean_b: float
    std_a: float
    std_b: float

    @property
    def max_deviation(self) -> float:
        return max((m[2] for m in self.matches), default=float("nan"))

    def as_dict(self) -> dict:
        return {
            "period": self.hist_a.period,
            "peaks_a": [p.angle for p in self.peaks_a],
            "peaks_b": [p.angle for p in self.peaks_b],
            "matches": [{"a": a, "b": b, "deviation": d} for a, b, d in self.matches],
            "unmatched_a": self.unmatched_a,
            "max_deviation": self.max_deviation,
            "circular_mean": {"a": self.mean_a, "b": self.mean_b,
                              "delta": angular_difference(self.mean_a, self.mean_b, 180.0)},
            "circular_std": {"a": self.std_a, "b": self.std_b, "delta": self.std_b - self.std_a},
            "hist_a": self.hist_a.counts.tolist(),
            "hist_b": self.hist_b.counts.tolist(),
        }


def compare_networks(a, b, region=None, period: float = 360.0, nbins: int = 36,
                     min_prominence: float | None = None) -> ComparisonReport:
    """Compare the segment orientation distributions of two trace sets.

    With ``region`` only segments whose midpoint lies inside it are used.
    ``period=180`` compares folded orientations.
    """
    sa = segments_of(a, region)
    sb = segments_of(b, region)
    if not sa or not sb:
        raise ValueError("both networks need segments in the compared region")
    az_a = np.array([s.azimuth for s in sa])
    az_b = np.array([s.azimuth for s in sb])
    ha = angle_histogram(az_a, nbins if period == 360.0 else nbins // 2, period)
    hb = angle_histogram(az_b, len(ha.counts), period)
    pa = find_peaks(ha, min_prominence)
    pb = find_peaks(hb, min_prominence)
    matches = match_peaks([p.angle for p in pa], [p.angle for p in pb], period)
    matched = {m[0] for m in matches}
    ma, sda = circular_stats(np.mod(az_a, 180.0), 180.0)
    mb, sdb = circular_stats(np.mod(az_b, 180.0), 180.0)
    return ComparisonReport(ha, hb, pa, pb, matches, [p.angle for p in pa if p.angle not in matched],
                            ma, mb, sda, sdb)
