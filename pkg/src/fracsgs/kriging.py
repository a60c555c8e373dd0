"""Simple and ordinary kriging of a single target from a small neighbourhood."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as spl
from scipy.spatial.distance import cdist

from .variogram import SphericalModel, covariance

#: relative diagonal jitter, in units of C(0)
JITTER = 1e-10
#: points closer than this fraction of the range count as coincident
DUPLICATE_FRACTION = 1e-6


class SingularSystemError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class KrigingResult:
    estimate: float
    variance: float
    weights: np.ndarray
    residual: float = 0.0
    clamped: bool = False
    lagrange: float = 0.0


def covariance_matrix(points, model: SphericalModel, jitter: float = JITTER) -> np.ndarray:
    xy = np.asarray(points, dtype=float)
    c = covariance(model, cdist(xy, xy))
    c[np.diag_indices_from(c)] += jitter * model.total_sill
    return c


def _drop_duplicates(xy, target, tol):
    """Indices to keep: among near-coincident points keep the one nearest the target."""
    dt = np.hypot(xy[:, 0] - target[0], xy[:, 1] - target[1])
    order = np.argsort(dt, kind="stable")
    kept: list[int] = []
    for i in order:
        if all(np.hypot(*(xy[i] - xy[j])) >= tol for j in kept):
            kept.append(int(i))
    return np.array(sorted(kept), dtype=int), dt


def solve(points, values, target, model: SphericalModel, mean: float = 0.0,
          mode: str = "simple") -> KrigingResult:
    """Krige ``values`` observed at ``points`` onto ``target``.

    ``mode="simple"`` solves ``C lam = c0`` with a known ``mean``; the
    estimate is ``mean + sum(lam * (y - mean))`` and the variance
    ``C(0) - lam . c0``. ``mode="ordinary"`` adds the unbiasedness
    constraint ``sum(lam) = 1`` with a Lagrange multiplier and ignores
    ``mean``. Weights are returned in input order, zero for dropped
    duplicates.
    """
    xy = np.atleast_2d(np.asarray(points, dtype=float))
    y = np.asarray(values, dtype=float).ravel()
    x0 = np.asarray(target, dtype=float).ravel()
    n = len(xy)
    if n == 0:
        raise ValueError("kriging needs at least one conditioning point")
    if len(y) != n:
        raise ValueError("points and values differ in length")
    if mode not in ("simple", "ordinary"):
        raise ValueError(f"unknown kriging mode {mode!r}")

    c00 = model.total_sill
    tol = DUPLICATE_FRACTION * model.range
    keep, dt = _drop_duplicates(xy, x0, tol)
    weights = np.zeros(n)

    # exact match: the target coincides with a datum
    if dt[keep].min() < tol:
        i = keep[np.argmin(dt[keep])]
        weights[i] = 1.0
        return KrigingResult(float(y[i]), 0.0, weights)

    xk, yk = xy[keep], y[keep]
    m = len(keep)
    cmat = covariance(model, cdist(xk, xk))
    c0 = covariance(model, dt[keep])
    cj = cmat + JITTER * c00 * np.eye(m)

    if mode == "simple":
        lam = _spd_solve(cj, c0)
        # refine against the unjittered matrix
        for _ in range(2):
            lam = lam + _spd_solve(cj, c0 - cmat @ lam)
        mu = 0.0
        resid = float(np.max(np.abs(cmat @ lam - c0)))
        est = mean + float(lam @ (yk - mean))
        var = c00 - float(lam @ c0)
    else:
        a = np.zeros((m + 1, m + 1))
        a[:m, :m] = cmat
        a[:m, m] = a[m, :m] = 1.0
        rhs = np.append(c0, 1.0)
        aj = a.copy()
        aj[:m, :m] = cj
        sol = _sym_solve(aj, rhs)
        for _ in range(2):
            sol = sol + _sym_solve(aj, rhs - a @ sol)
        lam, mu = sol[:m], float(sol[m])
        resid = float(np.max(np.abs(a @ sol - rhs)))
        est = float(lam @ yk)
        var = c00 - float(lam @ c0) - mu

    if not (np.all(np.isfinite(lam)) and np.isfinite(var)):
        raise SingularSystemError("kriging system is singular")
    clamped = not (0.0 <= var <= c00)
    var = min(max(var, 0.0), c00)
    weights[keep] = lam
    return KrigingResult(est, var, weights, residual=resid, clamped=clamped, lagrange=mu)


def _spd_solve(a, b):
    try:
        return spl.cho_solve(spl.cho_factor(a, lower=True, check_finite=False), b, check_finite=False)
    except spl.LinAlgError:
        return _sym_solve(a, b)


def _sym_solve(a, b):
    try:
        return spl.solve(a, b, assume_a="sym", check_finite=False)
    except (spl.LinAlgError, ValueError) as exc:
        raise SingularSystemError(str(exc)) from exc


def local_gaussian_draw(res: KrigingResult, rng: np.random.Generator) -> float:
    """One draw from N(estimate, variance)."""
    z = rng.standard_normal()
    if res.variance == 0.0:
        return res.estimate
    return res.estimate + float(np.sqrt(res.variance)) * z
