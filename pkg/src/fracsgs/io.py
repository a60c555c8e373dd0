"""
Trace, network and configuration files.

Trace files are plain text, one polyline per line as ``x y`` pairs
separated by semicolons, after a versioned header. Network files are JSON
written by a canonical emitter so that load -> save reproduces the same
bytes. Configurations are TOML. See ``docs/formats.md``.
"""

from __future__ import annotations

import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .geometry import Point, Segment, Trace, TraceKind
from .growth import SEED_MODES, ConfigError, SimConfig
from .variogram import SphericalModel

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger(__name__)

TRACE_MAGIC = "FRACSGS-TRACES"
TRACE_VERSION = 1
NETWORK_FORMAT = "fracsgs-network"
NETWORK_VERSION = 1


class FormatError(ValueError):
    """Malformed or unsupported file; ``str()`` names the file and line."""


@dataclass
class TraceFile:
    traces: list
    units: str = "m"
    domain: tuple | None = None


def _num(tok: str, where: str) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise FormatError(f"{where}: not a number: {tok!r}") from None
    if not math.isfinite(v):
        raise FormatError(f"{where}: non-finite coordinate {tok!r}")
    return v


def read_trace_file(path) -> TraceFile:
    path = Path(path)
    lines = path.read_text().splitlines()
    header_seen = False
    units, domain = "m", None
    traces = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        where = f"{path}:{lineno}"
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            parts = line.split()
            if len(parts) != 2 or parts[0] != TRACE_MAGIC:
                raise FormatError(f"{where}: expected header '{TRACE_MAGIC} {TRACE_VERSION}'")
            if parts[1] != str(TRACE_VERSION):
                raise FormatError(f"{where}: unsupported trace format version {parts[1]}")
            header_seen = True
            continue
        if line.startswith("units "):
            units = line.split(None, 1)[1].strip()
            continue
        if line.startswith("domain "):
            toks = line.split()[1:]
            if len(toks) != 4:
                raise FormatError(f"{where}: domain needs xmin ymin xmax ymax")
            domain = tuple(_num(t, where) for t in toks)
            continue
        verts = []
        for pair in line.split(";"):
            toks = pair.split()
            if len(toks) != 2:
                raise FormatError(f"{where}: malformed vertex {pair.strip()!r}")
            verts.append(Point(_num(toks[0], where), _num(toks[1], where)))
        if len(verts) < 2:
            raise FormatError(f"{where}: a polyline needs at least 2 vertices")
        try:
            traces.append(Trace.from_polyline(verts, kind=TraceKind.KNOWN))
        except ValueError as exc:
            raise FormatError(f"{where}: {exc}") from None
    if not header_seen:
        raise FormatError(f"{path}: empty trace file")
    if domain is not None:
        xmin, ymin, xmax, ymax = domain
        for t in traces:
            if any(not (xmin <= v.x <= xmax and ymin <= v.y <= ymax) for v in t.polyline()):
                logger.warning("%s: trace vertices outside the declared domain", path)
                break
    return TraceFile(traces, units, domain)


def load_traces(path) -> list[Trace]:
    return read_trace_file(path).traces


def dumps_traces(traces, units: str = "m", domain=None, comment: str | None = None) -> str:
    out = [f"{TRACE_MAGIC} {TRACE_VERSION}"]
    if comment:
        out += [f"# {line}".rstrip() for line in comment.splitlines()]
    out.append(f"units {units}")
    if domain is not None:
        out.append("domain " + " ".join(repr(float(v)) for v in domain))
    for t in traces:
        out.append("; ".join(f"{v.x!r} {v.y!r}" for v in t.polyline()))
    return "\n".join(out) + "\n"


def save_traces(traces, path, units: str = "m", domain=None, comment: str | None = None) -> None:
    Path(path).write_text(dumps_traces(traces, units, domain, comment))


def load_vertex_csv(path) -> list[Trace]:
    """Two-column ``x,y`` vertex CSV; blank lines, ``>`` lines or NaN rows end a polyline."""
    path = Path(path)
    traces, verts = [], []

    def flush(lineno):
        if len(verts) == 1:
            raise FormatError(f"{path}:{lineno}: a polyline needs at least 2 vertices")
        if verts:
            traces.append(Trace.from_polyline(list(verts), kind=TraceKind.KNOWN))
        verts.clear()

    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.strip()
        if line.startswith("#"):
            continue
        if not line or line.startswith(">"):
            flush(lineno)
            continue
        toks = [t.strip() for t in line.split(",")]
        if len(toks) != 2:
            raise FormatError(f"{path}:{lineno}: expected 2 columns")
        try:
            x, y = float(toks[0]), float(toks[1])
        except ValueError:
            if lineno == 1:
                continue  # column header
            raise FormatError(f"{path}:{lineno}: not a number") from None
        if math.isnan(x) or math.isnan(y):
            flush(lineno)
            continue
        verts.append(Point(x, y))
    flush("end")
    if not traces:
        raise FormatError(f"{path}: no polylines")
    return traces


# -- network files -------------------------------------------------------------

@dataclass
class NetworkFile:
    traces: list
    units: str = "m"
    domain: tuple | None = None
    rng_seed: int | None = None
    config: dict = field(default_factory=dict)


def network_file(net, report=None, units: str | None = None) -> NetworkFile:
    cfg = report.config if report is not None else {}
    traces = [t for t in net.traces if t.n_segments > 0]
    return NetworkFile(traces=traces, units=units or cfg.get("units", "m"),
                       domain=tuple(net.domain), rng_seed=cfg.get("rng_seed"), config=cfg)


def _trace_record(i, t: Trace) -> dict:
    return {
        "id": i,
        "kind": t.kind.value,
        "origin": [t.origin.x, t.origin.y],
        "split_origin": t.split_origin,
        "side_a": [[s.end.x, s.end.y] for s in t.sides[0]],
        "side_b": [[s.end.x, s.end.y] for s in t.sides[1]],
        "termination": list(t.terminations),
    }


def dumps_network(nf: NetworkFile) -> str:
    def j(v):
        return json.dumps(v, separators=(", ", ": "), allow_nan=False)

    head = {
        "format": NETWORK_FORMAT,
        "version": NETWORK_VERSION,
        "units": nf.units,
        "domain": list(nf.domain) if nf.domain is not None else None,
        "rng_seed": nf.rng_seed,
        "config": nf.config,
    }
    lines = ["{"]
    lines += [f" {j(k)}: {j(v)}," for k, v in head.items()]
    recs = [_trace_record(i, t) for i, t in enumerate(nf.traces)]
    lines.append(' "traces": [')
    lines += [f"  {j(r)}" + ("," if k < len(recs) - 1 else "") for k, r in enumerate(recs)]
    lines.append(" ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_network(nf: NetworkFile, path) -> None:
    Path(path).write_text(dumps_network(nf))


def _chain(origin: Point, verts):
    segs, prev = [], origin
    for x, y in verts:
        q = Point(float(x), float(y))
        segs.append(Segment(prev, q))
        prev = q
    return segs


def loads_network(text: str, where: str = "<network>") -> NetworkFile:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{where}:{exc.lineno}: {exc.msg}") from None
    if d.get("format") != NETWORK_FORMAT:
        raise FormatError(f"{where}: not a {NETWORK_FORMAT} file")
    if d.get("version") != NETWORK_VERSION:
        raise FormatError(f"{where}: unsupported network version {d.get('version')}")
    traces = []
    for k, rec in enumerate(d.get("traces", [])):
        try:
            o = Point(*map(float, rec["origin"]))
            t = Trace(origin=o, kind=TraceKind(rec["kind"]),
                      sides=(_chain(o, rec["side_a"]), _chain(o, rec["side_b"])),
                      split_origin=bool(rec["split_origin"]), terminations=list(rec["termination"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{where}: trace record {k}: {exc!r}") from None
        traces.append(t)
    dom = tuple(d["domain"]) if d.get("domain") is not None else None
    return NetworkFile(traces, d.get("units", "m"), dom, d.get("rng_seed"), d.get("config", {}))


def load_network(path) -> NetworkFile:
    path = Path(path)
    return loads_network(path.read_text(), str(path))


def load_any_traces(path) -> tuple[list[Trace], tuple | None]:
    """Traces from a network file, a trace file or a vertex CSV, by content."""
    path = Path(path)
    text = path.read_text()
    head = text.lstrip()[:1]
    if head == "{":
        nf = loads_network(text, str(path))
        return nf.traces, nf.domain
    if path.suffix.lower() == ".csv":
        return load_vertex_csv(path), None
    tf = read_trace_file(path)
    return tf.traces, tf.domain


# -- configuration -------------------------------------------------------------

_SCHEMA = {
    "": {"rng_seed": "int"},
    "domain": {"xmin": "num", "ymin": "num", "xmax": "num", "ymax": "num", "units": "str"},
    "data": {"known_traces": "str", "hidden_region": "poly", "long_fracture_quantile": "num",
             "replay_known": "bool"},
    "seeding": {"mode": "str", "count": "int", "intensity": "num", "points": "list", "region": "poly"},
    "growth": {"segment_length": "num", "angle_mean": "num", "angle_std": "num", "sector_radius": "num",
               "max_trace_length": "num", "max_iterations": "int", "max_neighbors": "int",
               "transform": "str", "kriging": "str"},
    "variogram": {"model": "str", "nugget": "num", "sill": "num", "range": "num"},
}


def _check_type(kind, v, name):
    ok = {
        "int": isinstance(v, int) and not isinstance(v, bool),
        "num": isinstance(v, (int, float)) and not isinstance(v, bool),
        "str": isinstance(v, str),
        "bool": isinstance(v, bool),
        "list": isinstance(v, list),
        "poly": isinstance(v, list),
    }[kind]
    if not ok:
        raise ConfigError(f"{name}: expected {kind}, got {type(v).__name__}")


def _validate_schema(d: dict, where: str):
    for key, val in d.items():
        if isinstance(val, dict):
            if key not in _SCHEMA or key == "":
                raise ConfigError(f"{where}: unknown section [{key}]")
            for k, v in val.items():
                if k not in _SCHEMA[key]:
                    raise ConfigError(f"{where}: unknown key {key}.{k}")
                _check_type(_SCHEMA[key][k], v, f"{where}: {key}.{k}")
        else:
            if key not in _SCHEMA[""]:
                raise ConfigError(f"{where}: unknown key {key}")
            _check_type(_SCHEMA[""][key], val, f"{where}: {key}")


def parse_override(text: str) -> tuple[str, object]:
    """``section.key=value`` with a TOML value; bare words are taken as strings."""
    if "=" not in text:
        raise ConfigError(f"override {text!r}: expected key=value")
    key, raw = text.split("=", 1)
    key, raw = key.strip(), raw.strip()
    try:
        val = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        val = raw
    return key, val


def apply_overrides(d: dict, overrides) -> dict:
    for key, val in overrides:
        if "." in key:
            sec, k = key.split(".", 1)
            d.setdefault(sec, {})[k] = val
        else:
            d[key] = val
    return d


def config_from_dict(d: dict, base_dir=".", where: str = "<config>") -> SimConfig:
    _validate_schema(d, where)
    dom = d.get("domain")
    if dom is None:
        raise ConfigError(f"{where}: missing section [domain]")
    for k in ("xmin", "ymin", "xmax", "ymax"):
        if k not in dom:
            raise ConfigError(f"{where}: missing key domain.{k}")
    data = d.get("data", {})
    seeding = d.get("seeding", {})
    growth = d.get("growth", {})
    vg = d.get("variogram", {"model": "fit"})
    known = data.get("known_traces")
    if known is not None and not os.path.isabs(known):
        known = str(Path(base_dir) / known)
    model = vg.get("model", "spherical")
    if model == "fit":
        if any(k in vg for k in ("nugget", "sill", "range")):
            raise ConfigError(f"{where}: variogram.model = 'fit' takes no nugget/sill/range")
        variogram = "fit"
    elif model == "spherical":
        missing = [k for k in ("nugget", "sill", "range") if k not in vg]
        if missing:
            raise ConfigError(f"{where}: missing key variogram.{missing[0]}")
        try:
            variogram = SphericalModel(float(vg["nugget"]), float(vg["sill"]), float(vg["range"]))
        except ValueError as exc:
            raise ConfigError(f"{where}: variogram: {exc}") from None
    else:
        raise ConfigError(f"{where}: variogram.model: expected spherical|fit, got {model!r}")
    mode = seeding.get("mode", "poisson")
    if mode not in SEED_MODES:
        raise ConfigError(f"{where}: seeding.mode: expected one of {SEED_MODES}, got {mode!r}")

    def opt_float(sec, k):
        v = sec.get(k)
        return None if v is None else float(v)

    cfg = SimConfig(
        domain=(float(dom["xmin"]), float(dom["ymin"]), float(dom["xmax"]), float(dom["ymax"])),
        units=dom.get("units", "m"),
        known_traces=known,
        hidden_region=data.get("hidden_region"),
        long_fracture_quantile=float(data.get("long_fracture_quantile", 0.9)),
        replay_known=data.get("replay_known", False),
        seed_mode=mode,
        count=seeding.get("count"),
        intensity=opt_float(seeding, "intensity"),
        user_points=seeding.get("points"),
        region=seeding.get("region"),
        segment_length=opt_float(growth, "segment_length"),
        angle_mean=opt_float(growth, "angle_mean"),
        angle_std=opt_float(growth, "angle_std"),
        sector_radius=opt_float(growth, "sector_radius"),
        max_trace_length=opt_float(growth, "max_trace_length"),
        max_iterations=growth.get("max_iterations", 500),
        max_neighbors=growth.get("max_neighbors", 16),
        rng_seed=d.get("rng_seed", 0),
        transform=growth.get("transform", "raw"),
        kriging=growth.get("kriging", "simple"),
        variogram=variogram,
    )
    try:
        return cfg.validate()
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def read_toml(path) -> dict:
    path = Path(path)
    try:
        return tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def load_config(path, overrides=()) -> SimConfig:
    """Parse and fully validate a simulation config; unknown or duplicate keys are errors."""
    path = Path(path)
    d = apply_overrides(read_toml(path), overrides)
    return config_from_dict(d, base_dir=path.parent, where=str(path))


_FLOW_KEYS = {
    "nx": "int", "ny": "int", "dx": "num", "dy": "num", "origin": "list", "porosity": "num",
    "k_matrix": "num", "perm_ratio": "num", "diffusion": "num", "rate": "num", "thickness": "num",
    "dt": "num", "t_end": "num", "injector": "list", "producer": "list", "upscale": "int",
}


def load_flow_config(path, overrides=()):
    """Read a ``[flow]`` TOML table into a :class:`~fracsgs.transport.FlowConfig`."""
    from .transport import FlowConfig

    path = Path(path)
    d = apply_overrides(read_toml(path), overrides)
    extra = set(d) - {"flow"}
    if extra:
        raise ConfigError(f"{path}: unknown section or key {sorted(extra)[0]!r}")
    flow = d.get("flow", {})
    if not isinstance(flow, dict):
        raise ConfigError(f"{path}: [flow] must be a table")
    for k, v in flow.items():
        if k not in _FLOW_KEYS:
            raise ConfigError(f"{path}: unknown key flow.{k}")
        _check_type(_FLOW_KEYS[k], v, f"{path}: flow.{k}")
    for k in ("origin", "injector", "producer"):
        if k in flow:
            if len(flow[k]) != 2:
                raise ConfigError(f"{path}: flow.{k} needs two values")
            flow[k] = tuple(flow[k])
    try:
        return FlowConfig(**flow)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
