"""
Minimal dependency-free SVG plots for run artifacts.

Each function returns the SVG document as a string.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

W, H = 480, 360
PAD = 40
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def _doc(body, width=W, height=H, title=""):
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">\n')
    if title:
        head += f'<text x="{width / 2:.1f}" y="16" text-anchor="middle" font-size="13">{escape(title)}</text>\n'
    return head + "\n".join(body) + "\n</svg>\n"


class _Axes:
    def __init__(self, xlim, ylim, x0=PAD, y0=PAD, w=W - 2 * PAD, h=H - 2 * PAD):
        self.xlim, self.ylim = xlim, ylim
        self.x0, self.y0, self.w, self.h = x0, y0, w, h

    def x(self, v):
        a, b = self.xlim
        return self.x0 + (v - a) / ((b - a) or 1.0) * self.w

    def y(self, v):
        a, b = self.ylim
        return self.y0 + self.h - (v - a) / ((b - a) or 1.0) * self.h

    def frame(self, xlabel="", ylabel=""):
        out = [f'<rect x="{self.x0}" y="{self.y0}" width="{self.w}" height="{self.h}" fill="none" stroke="#444"/>']
        for v in np.linspace(*self.xlim, 5):
            out.append(f'<text x="{self.x(v):.1f}" y="{self.y0 + self.h + 14}" text-anchor="middle">{v:.4g}</text>')
        for v in np.linspace(*self.ylim, 5):
            out.append(f'<text x="{self.x0 - 4}" y="{self.y(v) + 4:.1f}" text-anchor="end">{v:.3g}</text>')
        if xlabel:
            out.append(f'<text x="{self.x0 + self.w / 2}" y="{self.y0 + self.h + 30}" '
                       f'text-anchor="middle">{escape(xlabel)}</text>')
        if ylabel:
            out.append(f'<text x="12" y="{self.y0 + self.h / 2}" text-anchor="middle" '
                       f'transform="rotate(-90 12 {self.y0 + self.h / 2})">{escape(ylabel)}</text>')
        return out


def _polyline(xy, color, width=1.5):
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in xy)
    return f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"/>'


def rose(hist, title="orientation") -> str:
    """Rose diagram of an :class:`~fracsgs.analyze.AngleHistogram` (azimuth clockwise from north)."""
    cx, cy, r = W / 2, H / 2 + 8, min(W, H) / 2 - PAD
    counts = np.asarray(hist.counts, dtype=float)
    top = counts.max() or 1.0
    scale = 360.0 / hist.period
    body = [f'<circle cx="{cx}" cy="{cy}" r="{r}" fill="none" stroke="#bbb"/>']
    for a0, a1, c in zip(hist.edges[:-1], hist.edges[1:], counts):
        for rep in range(int(scale)):
            rr = r * math.sqrt(c / top)
            t0 = math.radians(a0 + rep * hist.period)
            t1 = math.radians(a1 + rep * hist.period)
            p0 = (cx + rr * math.sin(t0), cy - rr * math.cos(t0))
            p1 = (cx + rr * math.sin(t1), cy - rr * math.cos(t1))
            body.append(f'<path d="M{cx:.2f},{cy:.2f} L{p0[0]:.2f},{p0[1]:.2f} '
                        f'A{rr:.2f},{rr:.2f} 0 0 1 {p1[0]:.2f},{p1[1]:.2f} Z" '
                        f'fill="{COLORS[0]}" fill-opacity="0.6" stroke="#fff" stroke-width="0.5"/>')
    body.append(f'<text x="{cx}" y="{cy - r - 4}" text-anchor="middle">N</text>')
    return _doc(body, title=title)


def histograms(hist_a, hist_b, labels=("original", "simulated"), title="azimuth histogram") -> str:
    """Two angle histograms as grouped bars, normalized to frequencies."""
    fa = hist_a.counts / max(hist_a.counts.sum(), 1)
    fb = hist_b.counts / max(hist_b.counts.sum(), 1)
    ax = _Axes((0.0, hist_a.period), (0.0, float(max(fa.max(), fb.max())) * 1.1 or 1.0))
    body = ax.frame("azimuth (deg)", "frequency")
    bw = ax.w / len(fa) / 2
    for k, (a, b) in enumerate(zip(fa, fb)):
        x = ax.x(hist_a.edges[k])
        for off, v, col in ((0, a, COLORS[0]), (bw, b, COLORS[1])):
            body.append(f'<rect x="{x + off:.2f}" y="{ax.y(v):.2f}" width="{bw:.2f}" '
                        f'height="{ax.y(0) - ax.y(v):.2f}" fill="{col}"/>')
    for i, lab in enumerate(labels):
        body.append(f'<text x="{W - PAD - 4}" y="{PAD + 14 + 14 * i}" text-anchor="end" '
                    f'fill="{COLORS[i]}">{escape(lab)}</text>')
    return _doc(body, title=title)


def network(traces, domain, region=None, title="fracture network") -> str:
    """Traces coloured by kind; ``region`` is an optional polygon outline."""
    xmin, ymin, xmax, ymax = domain
    aspect = (ymax - ymin) / (xmax - xmin)
    w = W - 2 * PAD
    h = w * aspect
    ax = _Axes((xmin, xmax), (ymin, ymax), w=w, h=h)
    body = [f'<rect x="{ax.x0}" y="{ax.y0}" width="{w:.2f}" height="{h:.2f}" fill="none" stroke="#444"/>']
    for t in traces:
        col = COLORS[0] if t.kind.value == "known" else COLORS[1]
        body.append(_polyline([(ax.x(v.x), ax.y(v.y)) for v in t.polyline()], col, 1.0))
    if region is not None:
        for poly in ([region] if np.ndim(region[0]) == 1 else region):
            pts = " ".join(f"{ax.x(x):.2f},{ax.y(y):.2f}" for x, y in poly)
            body.append(f'<polygon points="{pts}" fill="none" stroke="#2ca02c" stroke-dasharray="4 3"/>')
    return _doc(body, W, int(h + 2 * PAD), title)


def breakthrough(curves: dict, title="breakthrough") -> str:
    """Concentration versus time at the producer, one line per named curve."""
    tmax = max(float(c.t[-1]) for c in curves.values())
    ax = _Axes((0.0, tmax), (0.0, 1.0))
    body = ax.frame("time", "concentration")
    for i, (name, c) in enumerate(curves.items()):
        col = COLORS[i % len(COLORS)]
        body.append(_polyline([(ax.x(t), ax.y(v)) for t, v in zip(c.t, c.c)], col))
        body.append(f'<text x="{W - PAD - 4}" y="{PAD + 14 + 14 * i}" text-anchor="end" '
                    f'fill="{col}">{escape(name)}</text>')
    return _doc(body, title=title)


def variogram(ev, model=None, title="semivariogram") -> str:
    """Empirical points and, if given, the fitted model curve."""
    ok = ev.npairs > 0
    gmax = float(ev.gamma[ok].max()) if ok.any() else 1.0
    if model is not None:
        gmax = max(gmax, model.total_sill)
    ax = _Axes((0.0, ev.max_lag), (0.0, gmax * 1.1 or 1.0))
    body = ax.frame("lag", "gamma")
    for h, g in zip(ev.lags[ok], ev.gamma[ok]):
        body.append(f'<circle cx="{ax.x(h):.2f}" cy="{ax.y(g):.2f}" r="3" fill="{COLORS[0]}"/>')
    if model is not None:
        hs = np.linspace(1e-9, ev.max_lag, 100)
        body.append(_polyline([(ax.x(h), ax.y(g)) for h, g in zip(hs, model.gamma(hs))], COLORS[1]))
    return _doc(body, title=title)
