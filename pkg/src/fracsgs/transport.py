"""
Desk-scale tracer test on a rasterized fracture network.

Fracture cells are a high-permeability continuum. Pressure comes from a
two-point flux finite-volume solve with no-flow boundaries and one
injector/producer pair; the tracer is then advected with explicit
first-order upwinding plus central diffusion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

BREAKTHROUGH_THRESHOLD = 0.01


class FlowSolverError(RuntimeError):
    pass


@dataclass
class FlowConfig:
    nx: int = 138
    ny: int = 114
    dx: float = 50.0
    dy: float = 50.0
    origin: tuple = (0.0, 0.0)
    porosity: float = 0.2
    k_matrix: float = 1.0
    perm_ratio: float = 200.0
    diffusion: float = 1e-4
    rate: float = 561.46  # 100 stb/day in ft3/day
    thickness: float = 1.0
    dt: float = 5.0
    t_end: float = 20000.0
    injector: tuple | None = None  # (i, j); default bottom-left cell
    producer: tuple | None = None  # default top-right cell
    upscale: int = 1

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid needs nx, ny >= 1")
        for name in ("dx", "dy", "porosity", "k_matrix", "perm_ratio", "rate", "thickness", "dt", "t_end"):
            if not getattr(self, name) > 0:
                raise ValueError(f"flow.{name} must be positive")
        if self.diffusion < 0:
            raise ValueError("flow.diffusion must be >= 0")
        if self.upscale < 1:
            raise ValueError("flow.upscale must be >= 1")


@dataclass
class PermeabilityGrid:
    nx: int
    ny: int
    dx: float
    dy: float
    perm: np.ndarray  # (ny, nx), row j = 0 at the bottom
    porosity: float
    fracture: np.ndarray  # (ny, nx) bool
    origin: tuple = (0.0, 0.0)
    thickness: float = 1.0

    @property
    def cell_volume(self) -> float:
        return self.dx * self.dy * self.thickness


@dataclass
class FlowField:
    pressure: np.ndarray  # (ny, nx)
    fx: np.ndarray  # (ny, nx + 1) volumetric flux across x-faces, positive to +x
    fy: np.ndarray  # (ny + 1, nx) positive to +y
    source: np.ndarray  # (ny, nx) well rates, + injection
    balance_residual: float = 0.0


@dataclass
class BreakthroughCurve:
    t: np.ndarray
    c: np.ndarray
    injected: float = 0.0
    produced: float = 0.0
    in_place: float = 0.0
    max_c: float = 0.0
    min_c: float = 0.0
    substeps: int = 1
    extra: dict = field(default_factory=dict)

    @property
    def mass_error(self) -> float:
        """Relative tracer mass imbalance: |in place + produced - injected| / injected."""
        if self.injected == 0:
            return abs(self.in_place + self.produced)
        return abs(self.in_place + self.produced - self.injected) / self.injected

    def breakthrough_time(self, threshold: float = BREAKTHROUGH_THRESHOLD):
        hit = np.flatnonzero(self.c >= threshold)
        return float(self.t[hit[0]]) if len(hit) else None

    def to_csv(self) -> str:
        rows = ["t,c"] + [f"{t!r},{c!r}" for t, c in zip(self.t, self.c)]
        return "\n".join(rows) + "\n"


def cells_crossed(p, q, nx, ny, dx, dy, origin=(0.0, 0.0)) -> set[tuple[int, int]]:
    """Cells ``(i, j)`` whose interior the segment ``p -> q`` passes through.

    The segment is cut at every grid line it crosses; each piece of positive
    length lies in exactly one cell.
    """
    x0, y0 = (p[0] - origin[0]) / dx, (p[1] - origin[1]) / dy
    x1, y1 = (q[0] - origin[0]) / dx, (q[1] - origin[1]) / dy
    ts = [0.0, 1.0]
    if x1 != x0:
        lo, hi = sorted((x0, x1))
        for g in range(math.ceil(lo), math.floor(hi) + 1):
            ts.append((g - x0) / (x1 - x0))
    if y1 != y0:
        lo, hi = sorted((y0, y1))
        for g in range(math.ceil(lo), math.floor(hi) + 1):
            ts.append((g - y0) / (y1 - y0))
    ts = sorted(t for t in ts if 0.0 <= t <= 1.0)
    out = set()
    for ta, tb in zip(ts[:-1], ts[1:]):
        if tb - ta <= 1e-12:
            continue
        tm = 0.5 * (ta + tb)
        i = math.floor(x0 + tm * (x1 - x0))
        j = math.floor(y0 + tm * (y1 - y0))
        if 0 <= i < nx and 0 <= j < ny:
            out.add((i, j))
    return out


def rasterize(traces, cfg: FlowConfig) -> PermeabilityGrid:
    """Mark every cell crossed by a trace segment as fracture (k = ratio * k_matrix)."""
    frac = np.zeros((cfg.ny, cfg.nx), dtype=bool)
    for t in traces:
        for s in t.segments:
            for i, j in cells_crossed((s.start.x, s.start.y), (s.end.x, s.end.y),
                                      cfg.nx, cfg.ny, cfg.dx, cfg.dy, cfg.origin):
                frac[j, i] = True
    perm = np.where(frac, cfg.k_matrix * cfg.perm_ratio, cfg.k_matrix)
    grid = PermeabilityGrid(cfg.nx, cfg.ny, cfg.dx, cfg.dy, perm, cfg.porosity, frac,
                            tuple(cfg.origin), cfg.thickness)
    if cfg.upscale > 1:
        grid = upscale(grid, cfg.upscale)
    return grid


def upscale(grid: PermeabilityGrid, factor: int) -> PermeabilityGrid:
    """Arithmetic-mean coarsening over ``factor x factor`` blocks (trailing cells dropped)."""
    ny, nx = grid.ny // factor, grid.nx // factor
    if nx < 1 or ny < 1:
        raise ValueError("upscale factor larger than the grid")
    k = grid.perm[: ny * factor, : nx * factor].reshape(ny, factor, nx, factor).mean(axis=(1, 3))
    f = grid.fracture[: ny * factor, : nx * factor].reshape(ny, factor, nx, factor).any(axis=(1, 3))
    return PermeabilityGrid(nx, ny, grid.dx * factor, grid.dy * factor, k, grid.porosity, f,
                            grid.origin, grid.thickness)


def _face_transmissibility(grid: PermeabilityGrid):
    k = grid.perm
    h = grid.thickness
    tx = 2.0 * grid.dy * h / (grid.dx * (1.0 / k[:, :-1] + 1.0 / k[:, 1:]))
    ty = 2.0 * grid.dx * h / (grid.dy * (1.0 / k[:-1, :] + 1.0 / k[1:, :]))
    return tx, ty


def _neighbour_matrix(nx, ny, tx, ty):
    """Symmetric Laplacian-type matrix from x- and y-face coefficients."""
    idx = np.arange(nx * ny).reshape(ny, nx)
    rows = np.concatenate([idx[:, :-1].ravel(), idx[:-1, :].ravel()])
    cols = np.concatenate([idx[:, 1:].ravel(), idx[1:, :].ravel()])
    vals = np.concatenate([tx.ravel(), ty.ravel()])
    off = sp.coo_matrix((vals, (rows, cols)), shape=(nx * ny, nx * ny))
    off = off + off.T
    diag = np.asarray(off.sum(axis=1)).ravel()
    return (sp.diags(diag) - off).tocsr()


def _well_cells(grid, injector, producer):
    inj = tuple(injector) if injector is not None else (0, 0)
    prod = tuple(producer) if producer is not None else (grid.nx - 1, grid.ny - 1)
    for i, j in (inj, prod):
        if not (0 <= i < grid.nx and 0 <= j < grid.ny):
            raise ValueError(f"well cell {(i, j)} outside the grid")
    if inj == prod:
        raise ValueError("injector and producer share a cell")
    return inj, prod


def solve_flow(grid: PermeabilityGrid, rate: float, injector=None, producer=None) -> FlowField:
    """Incompressible pressure solve with a rate-specified injector/producer pair.

    Unit viscosity; pressure is pinned to zero at the producer.
    """
    nx, ny = grid.nx, grid.ny
    inj, prod = _well_cells(grid, injector, producer)
    tx, ty = _face_transmissibility(grid)
    a = _neighbour_matrix(nx, ny, tx, ty).tolil()
    src = np.zeros((ny, nx))
    src[inj[1], inj[0]] = rate
    src[prod[1], prod[0]] = -rate
    b = src.ravel().copy()
    pid = prod[1] * nx + prod[0]
    a.rows[pid] = [pid]
    a.data[pid] = [1.0]
    b[pid] = 0.0
    p = spla.spsolve(a.tocsc(), b)
    if not np.all(np.isfinite(p)):
        raise FlowSolverError("pressure solve failed")
    p = p.reshape(ny, nx)
    fx = np.zeros((ny, nx + 1))
    fy = np.zeros((ny + 1, nx))
    fx[:, 1:-1] = tx * (p[:, :-1] - p[:, 1:])
    fy[1:-1, :] = ty * (p[:-1, :] - p[1:, :])
    out = fx[:, 1:] - fx[:, :-1] + fy[1:, :] - fy[:-1, :]
    resid = float(np.max(np.abs(out - src))) / rate
    return FlowField(p, fx, fy, src, resid)


def _transport_operator(grid: PermeabilityGrid, flow: FlowField, diffusion: float):
    """Sparse M with d(pore mass)/dt = M c + s, and the per-cell outflow rate."""
    nx, ny = grid.nx, grid.ny
    n = nx * ny
    idx = np.arange(n).reshape(ny, nx)
    rows, cols, vals = [], [], []
    outflow = np.zeros(n)

    def faces(left, right, flux, dcoef):
        left, right, flux = left.ravel(), right.ravel(), flux.ravel()
        pos = np.maximum(flux, 0.0)  # left -> right, carries c_left
        neg = np.maximum(-flux, 0.0)  # right -> left, carries c_right
        d = np.full_like(flux, dcoef)
        # upwind advection
        rows.extend([left, right, right, left])
        cols.extend([left, left, right, right])
        vals.extend([-pos, pos, -neg, neg])
        # central diffusion
        rows.extend([left, left, right, right])
        cols.extend([left, right, right, left])
        vals.extend([-d, d, -d, d])
        np.add.at(outflow, left, pos + d)
        np.add.at(outflow, right, neg + d)

    h = grid.thickness
    dph = diffusion * grid.porosity * h
    faces(idx[:, :-1], idx[:, 1:], flow.fx[:, 1:-1], dph * grid.dy / grid.dx)
    faces(idx[:-1, :], idx[1:, :], flow.fy[1:-1, :], dph * grid.dx / grid.dy)
    sink = np.maximum(-flow.source.ravel(), 0.0)
    rows.append(np.arange(n))
    cols.append(np.arange(n))
    vals.append(-sink)
    outflow += sink
    m = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    return m.tocsr(), outflow


def advect_tracer(flow: FlowField, grid: PermeabilityGrid, dt: float, t_end: float,
                  diffusion: float = 0.0, producer=None, c_inject: float = 1.0) -> BreakthroughCurve:
    """Explicit upwind transport; samples the producer concentration every ``dt``.

    ``dt`` is split into equal sub-steps when it exceeds the stability limit
    ``pore volume / total outflow`` of any cell.
    """
    nx, ny = grid.nx, grid.ny
    pv = grid.porosity * grid.cell_volume
    m, outflow = _transport_operator(grid, flow, diffusion)
    max_rate = float(outflow.max()) / pv
    nsub = max(1, math.ceil(dt * max_rate * (1.0 + 1e-12)))
    h = dt / nsub
    inj_rate = np.maximum(flow.source.ravel(), 0.0)
    s = c_inject * inj_rate
    if producer is None:
        prod_flat = int(np.argmin(flow.source.ravel())) if flow.source.min() < 0 else nx * ny - 1
    else:
        prod_flat = producer[1] * nx + producer[0]
    sink_rate = max(-float(flow.source.ravel()[prod_flat]), 0.0)
    # c <- c + h/pv (M c + s) as one operator
    step = (sp.identity(nx * ny, format="csr") + (h / pv) * m).tocsr()
    shift = (h / pv) * s
    c = np.zeros(nx * ny)
    nsteps = int(math.floor(t_end / dt + 1e-9))
    ts = np.arange(1, nsteps + 1) * dt
    cs = np.empty(nsteps)
    produced = 0.0
    cmax, cmin = 0.0, 0.0
    for k in range(nsteps):
        for _ in range(nsub):
            produced += h * sink_rate * c[prod_flat]
            c = step @ c + shift
        cs[k] = c[prod_flat]
        cmax = max(cmax, float(c.max()))
        cmin = min(cmin, float(c.min()))
    injected = c_inject * float(inj_rate.sum()) * nsteps * dt
    return BreakthroughCurve(ts, cs, injected=injected, produced=produced, in_place=float(c.sum() * pv),
                             max_c=cmax, min_c=cmin, substeps=nsub)


def compare_breakthrough(a: BreakthroughCurve, b: BreakthroughCurve,
                         threshold: float = BREAKTHROUGH_THRESHOLD) -> dict:
    """Breakthrough times, their difference, and the RMS difference of the curves.

    ``b`` is resampled linearly onto the times of ``a`` within their common span.
    """
    ta, tb = a.breakthrough_time(threshold), b.breakthrough_time(threshold)
    lo, hi = max(a.t[0], b.t[0]), min(a.t[-1], b.t[-1])
    sel = (a.t >= lo) & (a.t <= hi)
    cb = np.interp(a.t[sel], b.t, b.c)
    l2 = float(np.sqrt(np.mean((a.c[sel] - cb) ** 2))) if sel.any() else float("nan")
    out = {
        "threshold": threshold,
        "breakthrough_a": ta,
        "breakthrough_b": tb,
        "delta": None if ta is None or tb is None else abs(ta - tb),
        "relative_delta": None if ta is None or tb is None else abs(ta - tb) / ta,
        "l2": l2,
    }
    if ta is None or tb is None:
        out["status"] = "no-breakthrough"
    else:
        out["status"] = "ok"
    return out


def run_tracer_test(traces, cfg: FlowConfig):
    """Rasterize, solve flow and transport; returns (grid, flow, curve)."""
    grid = rasterize(traces, cfg)
    inj = cfg.injector
    prod = cfg.producer
    if cfg.upscale > 1:
        inj = None if inj is None else (inj[0] // cfg.upscale, inj[1] // cfg.upscale)
        prod = None if prod is None else (prod[0] // cfg.upscale, prod[1] // cfg.upscale)
    flow = solve_flow(grid, cfg.rate, inj, prod)
    curve = advect_tracer(flow, grid, cfg.dt, cfg.t_end, cfg.diffusion)
    return grid, flow, curve
