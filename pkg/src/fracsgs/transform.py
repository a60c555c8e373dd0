"""Normal-score transform of folded azimuths and circular statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri
from scipy.stats import rankdata


class DegenerateDataError(ValueError):
    pass


def fold_azimuth(a):
    """Map azimuths onto [0, 180): a line and its reverse share one orientation."""
    f = np.mod(a, 180.0)
    f = np.where(f >= 180.0, 0.0, f)
    if np.ndim(a) == 0:
        return float(f)
    return f


def circular_stats(angles, period: float = 180.0) -> tuple[float, float]:
    """Circular mean and standard deviation (degrees) by the resultant-vector method.

    With ``period=180`` the angles are treated as axial data: they are
    doubled, averaged on the circle and halved again.
    """
    a = np.asarray(angles, dtype=float).ravel()
    if a.size == 0:
        raise ValueError("circular_stats of an empty sample")
    k = 360.0 / period
    rad = np.radians(a * k)
    c, s = np.cos(rad).mean(), np.sin(rad).mean()
    r = min(math.hypot(c, s), 1.0)
    mean = (math.degrees(math.atan2(s, c)) / k) % period
    if mean >= period:
        mean = 0.0
    std = math.degrees(math.sqrt(abs(-2.0 * math.log(r)))) / k if r > 0 else math.inf
    return mean, std


def gap_origin(values, nbins: int = 36) -> float:
    """Start of the emptiest stretch of the folded-angle circle.

    Cutting the [0, 180) circle there keeps every orientation family in one
    piece, so an angle family straddling 0/180 is not split in two.
    """
    f = fold_azimuth(np.asarray(values, dtype=float))
    counts, edges = np.histogram(f, bins=nbins, range=(0.0, 180.0))
    # smooth circularly with a 3-bin window before picking the minimum
    smooth = counts + np.roll(counts, 1) + np.roll(counts, -1)
    k = int(np.argmin(smooth))
    return float(0.5 * (edges[k] + edges[k + 1]))


@dataclass(frozen=True)
class NormalScoreTable:
    """Knots of the piecewise-linear map between folded angles and normal scores.

    Angles are measured from ``origin``: the table works on
    ``fold(angle - origin)`` so the cut of the orientation circle can be
    placed where the data are sparse.
    """

    values: np.ndarray
    scores: np.ndarray
    origin: float = 0.0
    n: int = 0

    def to_normal(self, z):
        zr = fold_azimuth(np.asarray(z, dtype=float) - self.origin)
        y = _interp_extrap(zr, self.values, self.scores)
        return float(y) if np.ndim(z) == 0 else y

    def from_normal(self, y):
        zr = _interp_extrap(np.asarray(y, dtype=float), self.scores, self.values)
        zr = np.clip(zr, 0.0, 180.0)
        z = fold_azimuth(zr + self.origin)
        return float(z) if np.ndim(y) == 0 else z


def _interp_extrap(x, xp, fp):
    """Linear interpolation through knots with linear extrapolation from the end pairs."""
    y = np.interp(x, xp, fp)
    lo = x < xp[0]
    hi = x > xp[-1]
    if np.any(lo):
        slope = (fp[1] - fp[0]) / (xp[1] - xp[0])
        y = np.where(lo, fp[0] + slope * (x - xp[0]), y)
    if np.any(hi):
        slope = (fp[-1] - fp[-2]) / (xp[-1] - xp[-2])
        y = np.where(hi, fp[-1] + slope * (x - xp[-1]), y)
    return y


def build_table(values, origin: float = 0.0) -> NormalScoreTable:
    """Normal-score table with Hazen plotting positions ``(k - 0.5) / n``.

    Tied values share the score of their average rank, so both knot
    sequences are strictly increasing.
    """
    z = fold_azimuth(np.asarray(values, dtype=float).ravel() - origin)
    if z.size < 2 or not np.all(np.isfinite(z)):
        raise DegenerateDataError("need at least 2 finite values")
    ranks = rankdata(z, method="average")
    y = ndtri((ranks - 0.5) / z.size)
    knots, idx = np.unique(z, return_index=True)
    if knots.size < 2:
        raise DegenerateDataError("need at least 2 distinct values")
    return NormalScoreTable(values=knots, scores=y[idx], origin=float(origin), n=int(z.size))
