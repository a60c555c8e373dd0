"""Omnidirectional semivariogram estimation and the nugget + spherical model."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares
from scipy.spatial.distance import pdist

logger = logging.getLogger(__name__)


class VariogramError(ValueError):
    pass


class FitError(RuntimeError):
    """Raised when the model fit fails; carries the empirical variogram."""

    def __init__(self, msg, empirical):
        super().__init__(msg)
        self.empirical = empirical


@dataclass(frozen=True)
class EmpiricalVariogram:
    lags: np.ndarray
    gamma: np.ndarray
    npairs: np.ndarray
    max_lag: float

    def to_csv(self) -> str:
        rows = ["h,gamma,npairs"]
        rows += [f"{h!r},{g!r},{int(n)}" for h, g, n in zip(self.lags, self.gamma, self.npairs)]
        return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class SphericalModel:
    nugget: float
    sill: float  # partial sill of the spherical structure
    range: float

    def __post_init__(self):
        if self.nugget < 0 or self.sill < 0:
            raise VariogramError("nugget and partial sill must be nonnegative")
        if not self.range > 0:
            raise VariogramError("range must be positive")
        if not self.nugget + self.sill > 0:
            raise VariogramError("total sill must be positive")

    @property
    def total_sill(self) -> float:
        return self.nugget + self.sill

    def gamma(self, h):
        return spherical_gamma(self, h)

    def covariance(self, h):
        return covariance(self, h)

    def to_toml(self) -> str:
        return (
            "[variogram]\n"
            "model = \"spherical\"\n"
            f"nugget = {self.nugget!r}\n"
            f"sill = {self.sill!r}\n"
            f"range = {self.range!r}\n"
        )


def _spherical_structure(h, a):
    r = np.minimum(np.asarray(h, dtype=float) / a, 1.0)
    return 1.5 * r - 0.5 * r**3


def spherical_gamma(m: SphericalModel, h):
    h = np.asarray(h, dtype=float)
    g = np.where(h > 0, m.nugget + m.sill * _spherical_structure(h, m.range), 0.0)
    return float(g) if g.ndim == 0 else g


def covariance(m: SphericalModel, h):
    """C(h) = total sill - gamma(h); the nugget sits entirely at h = 0."""
    h = np.asarray(h, dtype=float)
    c = m.total_sill - spherical_gamma(m, h)
    return float(c) if np.ndim(c) == 0 else c


def empirical_variogram(points, values, bin_width: float, max_lag: float | None = None) -> EmpiricalVariogram:
    """Classical (Matheron) estimator over pairs binned by separation.

    Bin ``k`` covers ``[k * bin_width, (k + 1) * bin_width)``; the reported
    lag is the mean separation of the pairs in the bin. Empty bins are
    dropped.
    """
    xy = np.asarray(points, dtype=float)
    v = np.asarray(values, dtype=float)
    if len(xy) < 2:
        raise VariogramError("need at least 2 points")
    if not bin_width > 0:
        raise VariogramError("bin_width must be positive")
    d = pdist(xy)
    sq = pdist(v[:, None], metric="sqeuclidean")
    if max_lag is None:
        max_lag = 0.5 * d.max()
    keep = d <= max_lag
    if not keep.any():
        raise VariogramError("no pairs within max_lag")
    d, sq = d[keep], sq[keep]
    k = np.floor(d / bin_width).astype(int)
    nb = k.max() + 1
    n = np.bincount(k, minlength=nb)
    ssum = np.bincount(k, weights=sq, minlength=nb)
    hsum = np.bincount(k, weights=d, minlength=nb)
    ok = n > 0
    return EmpiricalVariogram(
        lags=hsum[ok] / n[ok],
        gamma=0.5 * ssum[ok] / n[ok],
        npairs=n[ok],
        max_lag=float(max_lag),
    )


def fit_spherical(ev: EmpiricalVariogram) -> SphericalModel:
    """Weighted least squares fit with weights ``n_k / h_k**2``."""
    h, g, n = ev.lags, ev.gamma, ev.npairs
    if len(h) < 3:
        raise FitError("need at least 3 populated lag bins", ev)
    w = np.sqrt(n / np.maximum(h, 1e-12 * h.max()) ** 2)
    gmax = max(float(g.max()), 1e-12)
    amax = float(ev.max_lag)

    def resid(p):
        c0, c, a = p
        return w * (c0 + c * _spherical_structure(h, a) - g)

    best = None
    # a few starting ranges; the objective is not convex in the range
    for a0 in (0.25 * amax, 0.5 * amax, 0.75 * amax):
        x0 = [0.1 * gmax, 0.9 * gmax, a0]
        try:
            res = least_squares(
                resid, x0,
                bounds=([0.0, 0.0, 1e-6 * amax], [np.inf, np.inf, amax]),
                x_scale=[gmax, gmax, amax], xtol=1e-14, ftol=1e-14, gtol=1e-14,
            )
        except (ValueError, np.linalg.LinAlgError) as exc:
            logger.debug("spherical fit start %g failed: %s", a0, exc)
            continue
        if res.success and (best is None or res.cost < best.cost):
            best = res
    if best is None:
        raise FitError("spherical fit did not converge", ev)
    c0, c, a = best.x
    if a <= h.min():
        # structure shorter than the first lag is indistinguishable from nugget
        c0, c = c0 + c, 0.0
    if c0 + c <= 0:
        raise FitError("fitted total sill is zero", ev)
    return SphericalModel(float(c0), float(c), float(a))
