"""
Command line entry point: ``fracsgs {analyze,simulate,compare,verify,seed-preview}``.

Exit status is 0 on success, 1 for invalid input (bad flags, configs or
files) and 2 for failures during a run. Every subcommand writes its
artifacts and a ``manifest.json`` under ``--out-dir``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, analyze, io, svg, transport
from .growth import ConfigError, preview_seeds, run_simulation
from .variogram import FitError, VariogramError, fit_spherical

logger = logging.getLogger("fracsgs")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


class _Run:
    """Collects inputs and outputs of one invocation for the manifest."""

    def __init__(self, args):
        self.out = Path(args.out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.command = args.command
        self.argv = list(args.argv)
        self.inputs: dict[str, str] = {}
        self.outputs: list[str] = []
        self.extra: dict = {}

    def input(self, path) -> Path:
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"{path}: no such file")
        self.inputs[str(path)] = _sha256(path)
        return path

    def write(self, name: str, text: str) -> Path:
        p = self.out / name
        p.write_text(text)
        self.outputs.append(name)
        return p

    def write_json(self, name: str, obj) -> Path:
        return self.write(name, json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")

    def finish(self):
        manifest = {
            "tool": "fracsgs",
            "version": __version__,
            "command": self.command,
            "argv": self.argv,
            "inputs": [{"path": k, "sha256": v} for k, v in sorted(self.inputs.items())],
            "outputs": sorted(self.outputs),
            **self.extra,
        }
        (self.out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True,
                                                           default=_jsonable) + "\n")


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (set, tuple)):
        return list(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _sim_overrides(args) -> list:
    ov = [io.parse_override(s) for s in args.set or []]
    if args.seed is not None:
        ov.append(("rng_seed", args.seed))
    if args.transform:
        ov.append(("growth.transform", args.transform))
    if args.kriging:
        ov.append(("growth.kriging", args.kriging))
    if args.replay_known:
        ov.append(("data.replay_known", True))
    return ov


def _load_sim_config(run: _Run, args):
    cfg = io.load_config(run.input(args.config), _sim_overrides(args))
    if cfg.known_traces:
        run.input(cfg.known_traces)
    return cfg


def _hist_csv(counts_edges) -> str:
    counts, edges = counts_edges
    rows = ["bin_start,bin_end,count"] + [f"{a!r},{b!r},{int(c)}" for a, b, c in zip(edges[:-1], edges[1:], counts)]
    return "\n".join(rows) + "\n"


def cmd_analyze(args, run: _Run):
    traces, domain = io.load_any_traces(run.input(args.traces))
    stats = analyze.compute_stats(traces, nbins=args.nbins)
    report = stats.as_dict()
    run.write("angle_hist.csv", stats.angle_hist.to_csv())
    run.write("folded_hist.csv", stats.folded_hist.to_csv())
    run.write("segment_length_hist.csv", _hist_csv(stats.segment_length_hist))
    run.write("trace_length_hist.csv", _hist_csv(stats.trace_length_hist))
    run.write("rose.svg", svg.rose(stats.angle_hist, "segment azimuth"))
    run.write("folded_rose.svg", svg.rose(stats.folded_hist, "folded azimuth"))
    run.write("histogram.svg", svg.histograms(stats.angle_hist, stats.angle_hist, ("azimuth", ""), "segment azimuth"))
    ev = analyze.segment_variogram(traces, attribute=args.attribute)
    run.write("variogram.csv", ev.to_csv())
    model = None
    try:
        model = fit_spherical(ev)
        run.write("variogram.toml", model.to_toml())
        report["variogram"] = {"nugget": model.nugget, "sill": model.sill, "range": model.range}
    except (FitError, VariogramError) as exc:
        logger.warning("variogram fit failed: %s", exc)
        report["variogram"] = None
    run.write("variogram.svg", svg.variogram(ev, model, f"semivariogram of {args.attribute}"))
    report["domain"] = domain
    run.write_json("stats.json", report)
    print(f"{stats.n_traces} traces, {stats.n_segments} segments, "
          f"mean segment length {stats.segment_length['mean']:.2f}")


def cmd_simulate(args, run: _Run):
    cfg = _load_sim_config(run, args)
    net, report = run_simulation(cfg, workers=args.threads)
    nf = io.network_file(net, report)
    run.write("network.json", io.dumps_network(nf))
    run.write_json("report.json", report.as_dict())
    run.write("network.svg", svg.network(nf.traces, cfg.domain, cfg.hidden_region or cfg.region))
    run.extra["seed"] = cfg.rng_seed
    run.extra["effective_config"] = report.config
    print(f"{len(nf.traces)} traces, {report.n_segments} segments after {report.iterations} sweeps")


def cmd_seed_preview(args, run: _Run):
    cfg = _load_sim_config(run, args)
    seeds = preview_seeds(cfg)
    rows = ["x,y,azimuth"] + [f"{p.x!r},{p.y!r},{az!r}" for p, az in seeds]
    run.write("seeds.csv", "\n".join(rows) + "\n")
    known = io.load_traces(cfg.known_traces) if cfg.known_traces else []
    doc = svg.network(known, cfg.domain, cfg.hidden_region or cfg.region, "seed placement")
    xmin, ymin, xmax, ymax = cfg.domain
    w = svg.W - 2 * svg.PAD
    sx = w / (xmax - xmin)
    h = w * (ymax - ymin) / (xmax - xmin)
    dots = "".join(f'<circle cx="{svg.PAD + (p.x - xmin) * sx:.2f}" cy="{svg.PAD + h - (p.y - ymin) * sx:.2f}" '
                   f'r="2.5" fill="#ff7f0e"/>\n' for p, _ in seeds)
    run.write("seeds.svg", doc.replace("</svg>", dots + "</svg>"))
    run.extra["seed"] = cfg.rng_seed
    run.extra["effective_config"] = cfg.as_dict()
    print(f"{len(seeds)} seeds")


def cmd_compare(args, run: _Run):
    a, _ = io.load_any_traces(run.input(args.a))
    b, _ = io.load_any_traces(run.input(args.b))
    if args.simulated_only:
        b = [t for t in b if t.kind.value == "simulated"]
    region = None
    if args.config:
        region = io.load_config(run.input(args.config)).hidden_region
    rep = analyze.compare_networks(a, b, region=region, period=args.period, nbins=args.nbins)
    out = rep.as_dict()
    out["region"] = region
    run.write_json("comparison.json", out)
    run.write("histograms.svg", svg.histograms(rep.hist_a, rep.hist_b, (Path(args.a).name, Path(args.b).name)))
    for ma, mb, d in rep.matches:
        print(f"peak {ma:7.2f} -> {mb:7.2f}  deviation {d:6.2f}")
    for u in rep.unmatched_a:
        print(f"peak {u:7.2f} unmatched")


def cmd_verify(args, run: _Run):
    if len(args.network) != 2:
        raise UsageError("verify: give --network exactly twice")
    fc = io.load_flow_config(run.input(args.flow_config))
    curves = {}
    summary = {"flow_config": vars(fc)}
    for tag, path in zip("ab", args.network):
        traces, _ = io.load_any_traces(run.input(path))
        grid, flow, curve = transport.run_tracer_test(traces, fc)
        curves[Path(path).name if Path(args.network[0]).name != Path(args.network[1]).name else tag] = curve
        run.write(f"breakthrough_{tag}.csv", curve.to_csv())
        summary[tag] = {"path": path, "flow_balance_residual": flow.balance_residual,
                        "tracer_mass_error": curve.mass_error, "fracture_cells": int(grid.fracture.sum()),
                        "substeps": curve.substeps, "max_c": curve.max_c, "min_c": curve.min_c}
    ca, cb = curves.values()
    summary["comparison"] = transport.compare_breakthrough(ca, cb)
    run.write_json("comparison.json", summary)
    run.write("breakthrough.svg", svg.breakthrough(curves))
    c = summary["comparison"]
    print(f"breakthrough {c['breakthrough_a']} vs {c['breakthrough_b']} ({c['status']}), L2 {c['l2']:.4g}")


def _add_sim_flags(p):
    p.add_argument("-c", "--config", required=True, help="simulation config (TOML)")
    p.add_argument("--seed", type=_u64, help="RNG seed, overrides rng_seed")
    p.add_argument("--transform", choices=("raw", "nscore"))
    p.add_argument("--kriging", choices=("simple", "ordinary"))
    p.add_argument("--replay-known", action="store_true", help="regrow known traces from their midpoints")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config field, e.g. growth.angle_std=10")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="fracsgs", description="Growth-based sequential Gaussian simulation of fracture traces.")
    top.add_argument("--version", action="version", version=f"fracsgs {__version__}")
    top.add_argument("-v", "--verbose", action="count", default=0)
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--out-dir", default="out", help="directory for artifacts (default: out)")

    p = sub.add_parser("analyze", help="trace statistics, histograms and variogram")
    p.add_argument("traces")
    p.add_argument("--nbins", type=int, default=36)
    p.add_argument("--attribute", choices=("folded", "length"), default="folded",
                   help="segment attribute for the variogram")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="simulate one realization")
    _add_sim_flags(p)
    p.add_argument("--threads", type=int, default=1,
                   help="threads for orientation draws, 0 for all cores (output unchanged)")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("seed-preview", help="place seeds without growing them")
    _add_sim_flags(p)
    common(p)
    p.set_defaults(func=cmd_seed_preview)

    p = sub.add_parser("compare", help="compare azimuth histograms and peaks of two trace sets")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("-c", "--config", help="take the comparison region from this config's hidden_region")
    p.add_argument("--period", type=float, choices=(180.0, 360.0), default=360.0)
    p.add_argument("--nbins", type=int, default=36)
    p.add_argument("--simulated-only", action="store_true", help="use only simulated traces of b")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify", help="tracer breakthrough comparison of two networks")
    p.add_argument("--network", action="append", required=True)
    p.add_argument("--flow-config", required=True)
    common(p)
    p.set_defaults(func=cmd_verify)
    return top


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    args.argv = argv
    if getattr(args, "threads", 1) < 1:
        args.threads = os.cpu_count() or 1
    try:
        run = _Run(args)
        args.func(args, run)
        run.finish()
    except (UsageError, ConfigError, io.FormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        logger.debug("run failed", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
