from importlib.resources import files

import numpy as np
import pytest

from fracsgs import io
from fracsgs.geometry import Point, Trace, TraceKind
from fracsgs.growth import ConfigError
from oracles import example1_run, example3_run

DATA = files("fracsgs") / "data"
TRACE_FILES = ["example1_traces.txt", "example2_traces.txt", "example3_traces.txt"]


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


# -- trace files -------------------------------------------------------------------

def test_two_vertex_polyline(tmp_path):
    p = write(tmp_path, "t.txt", "FRACSGS-TRACES 1\nunits m\n0 0; 0 10\n")
    (t,) = io.load_traces(p)
    (s,) = t.polyline_segments()
    assert s.azimuth == 0.0 and s.length == 10.0


@pytest.mark.parametrize("name", TRACE_FILES)
def test_fixture_round_trip(name, tmp_path):
    tf = io.read_trace_file(DATA / name)
    text = io.dumps_traces(tf.traces, tf.units, tf.domain)
    p = write(tmp_path, "a.txt", text)
    again = io.read_trace_file(p)
    assert io.dumps_traces(again.traces, again.units, again.domain) == text
    for a, b in zip(tf.traces, again.traces):
        va = np.array([[v.x, v.y] for v in a.polyline()])
        vb = np.array([[v.x, v.y] for v in b.polyline()])
        assert np.max(np.abs(va - vb)) <= 1e-9


def test_example1_segment_count_identity():
    text = (DATA / "example1_traces.txt").read_text()
    rows = [ln for ln in text.splitlines()[1:] if ln and not ln.startswith(("#", "units", "domain"))]
    n_vertices = sum(len(r.split(";")) for r in rows)
    traces = io.load_traces(DATA / "example1_traces.txt")
    assert sum(len(t.polyline_segments()) for t in traces) == n_vertices - len(rows)


def test_fixtures_are_labelled_synthetic():
    for name in TRACE_FILES:
        assert "SYNTHETIC" in (DATA / name).read_text().splitlines()[1]


@pytest.mark.parametrize("text,msg", [
    ("", "empty"),
    ("# only a comment\n", "empty"),
    ("FRACSGS-TRACES 2\n0 0; 1 1\n", "version"),
    ("NOT-A-HEADER 1\n", "header"),
    ("FRACSGS-TRACES 1\n0 0; 1 1\n0 0; 1\n", ":3:"),
    ("FRACSGS-TRACES 1\n0 0\n", ":2:"),
    ("FRACSGS-TRACES 1\n0 0; x 1\n", ":2:"),
    ("FRACSGS-TRACES 1\ndomain 0 0 1\n", ":2:"),
])
def test_trace_file_errors(tmp_path, text, msg):
    with pytest.raises(io.FormatError, match=msg):
        io.load_traces(write(tmp_path, "bad.txt", text))


def test_vertices_outside_domain_warn(tmp_path, caplog):
    p = write(tmp_path, "t.txt", "FRACSGS-TRACES 1\ndomain 0 0 5 5\n0 0; 9 9\n")
    assert len(io.load_traces(p)) == 1
    assert "outside" in caplog.text


def test_vertex_csv(tmp_path):
    p = write(tmp_path, "v.csv", "x,y\n0,0\n0,10\n0,20\n>\n5,5\n6,6\nnan,nan\n1,1\n2,2\n")
    traces = io.load_vertex_csv(p)
    assert [len(t.polyline()) for t in traces] == [3, 2, 2]
    with pytest.raises(io.FormatError):
        io.load_vertex_csv(write(tmp_path, "w.csv", "0,0\n>\n1,1\n"))


# -- network files -----------------------------------------------------------------

@pytest.mark.parametrize("run", [lambda: example1_run(42), lambda: example3_run(0)], ids=["ex1", "ex3"])
def test_network_save_load_save_identical(run, tmp_path):
    nf = io.network_file(*run())
    p = tmp_path / "n.json"
    io.save_network(nf, p)
    first = p.read_bytes()
    io.save_network(io.load_network(p), p)
    assert p.read_bytes() == first


def test_network_records_kind_and_termination(tmp_path):
    nf = io.network_file(*example1_run(42))
    back = io.loads_network(io.dumps_network(nf))
    assert [t.kind for t in back.traces] == [t.kind for t in nf.traces]
    assert [t.terminations for t in back.traces] == [t.terminations for t in nf.traces]
    assert back.rng_seed == 42 and back.config["angle_mean"] == 70.0
    assert {t.kind for t in back.traces} == {TraceKind.KNOWN, TraceKind.SIMULATED}


def test_network_format_errors():
    with pytest.raises(io.FormatError):
        io.loads_network("{not json")
    with pytest.raises(io.FormatError, match="version"):
        io.loads_network('{"format": "fracsgs-network", "version": 99}')
    with pytest.raises(io.FormatError):
        io.loads_network('{"format": "other", "version": 1}')
    with pytest.raises(io.FormatError, match="record 0"):
        io.loads_network('{"format": "fracsgs-network", "version": 1, "traces": [{"id": 0}]}')


def test_load_any_traces_dispatch(tmp_path):
    t = Trace.from_polyline([Point(0, 0), Point(1, 1)])
    p = tmp_path / "x.txt"
    io.save_traces([t], p)
    assert len(io.load_any_traces(p)[0]) == 1
    net, rep = example1_run(42)
    q = tmp_path / "n.json"
    io.save_network(io.network_file(net, rep), q)
    assert len(io.load_any_traces(q)[0]) == len(io.network_file(net, rep).traces)


# -- configs -----------------------------------------------------------------------

def test_example1_config():
    cfg = io.load_config(DATA / "example1.toml")
    m = cfg.variogram
    assert (cfg.angle_mean, cfg.angle_std, m.nugget, m.sill, m.range, cfg.sector_radius, cfg.segment_length) \
        == (70.0, 12.0, 1.0, 2.0, 50.0, 50.0, 10.0)
    assert cfg.known_traces.endswith("example1_traces.txt")


MINIMAL = "[domain]\nxmin = 0\nymin = 0\nxmax = 10\nymax = 10\n[seeding]\nmode = \"fixed_count\"\ncount = 1\n"


@pytest.mark.parametrize("extra,msg", [
    ("[growth]\nsegment_length = -1.0\n", "segment_length"),
    ("[growth]\nsegment_length = 1.0\nsegment_length = 2.0\n", "overwrite"),
    ("[growth]\nsegment_lenght = 1.0\n", "unknown key growth.segment_lenght"),
    ("[bogus]\nx = 1\n", "unknown section"),
    ("[growth]\nangle_std = \"wide\"\n", "expected num"),
    ("[growth]\nangle_std = 120.0\n", "angle_std"),
    ("[growth]\ntransform = \"log\"\n", "transform"),
    ("[variogram]\nmodel = \"spherical\"\nnugget = 1.0\n", "missing key variogram.sill"),
    ("[variogram]\nmodel = \"fit\"\nrange = 5.0\n", "fit"),
    ("[variogram]\nmodel = \"gaussian\"\n", "spherical|fit"),
    ("[variogram]\nmodel = \"spherical\"\nnugget = -1.0\nsill = 1.0\nrange = 1.0\n", "variogram"),
    ("[data]\nlong_fracture_quantile = 2.0\n", "quantile"),
    ("rng_seed = -4\n", "rng_seed"),
])
def test_config_errors(tmp_path, extra, msg):
    text = (extra + MINIMAL) if extra.startswith("rng_seed") else (MINIMAL + extra)
    with pytest.raises(ConfigError, match=msg):
        io.load_config(write(tmp_path, "c.toml", text))


def test_config_missing_domain(tmp_path):
    with pytest.raises(ConfigError, match="domain"):
        io.load_config(write(tmp_path, "c.toml", "[growth]\nsegment_length = 1.0\n"))
    with pytest.raises(ConfigError, match="domain.ymax"):
        io.load_config(write(tmp_path, "c.toml", "[domain]\nxmin = 0\nymin = 0\nxmax = 1\n"))


def test_overrides(tmp_path):
    p = write(tmp_path, "c.toml", MINIMAL)
    cfg = io.load_config(p, [io.parse_override("growth.angle_std=7.5"), io.parse_override("rng_seed=9"),
                             io.parse_override("growth.transform=nscore")])
    assert cfg.angle_std == 7.5 and cfg.rng_seed == 9 and cfg.transform == "nscore"
    with pytest.raises(ConfigError):
        io.parse_override("no-equals-sign")


def test_flow_config(tmp_path):
    fc = io.load_flow_config(DATA / "flow.toml")
    assert (fc.nx, fc.ny, fc.porosity, fc.perm_ratio, fc.diffusion, fc.dt) == (138, 114, 0.2, 200.0, 1e-4, 5.0)
    with pytest.raises(ConfigError, match="unknown key"):
        io.load_flow_config(write(tmp_path, "f.toml", "[flow]\nnxx = 3\n"))
    with pytest.raises(ConfigError, match="porosity"):
        io.load_flow_config(write(tmp_path, "f.toml", "[flow]\nporosity = -0.1\n"))


def test_documented_examples_parse(tmp_path):
    import re
    from pathlib import Path

    doc = (Path(__file__).parents[1] / "docs" / "formats.md").read_text()
    blocks = re.findall(r"```(\w*)\n(.*?)```", doc, re.S)
    traces = write(tmp_path, "t.txt", blocks[0][1])
    assert [len(t.polyline()) for t in io.load_traces(traces)] == [2, 3]
    assert len(io.load_vertex_csv(write(tmp_path, "v.csv", blocks[1][1]))) == 2
    net = [b for lang, b in blocks if lang == "json"][0]
    assert io.dumps_network(io.loads_network(net)) == net
    toml = [b for lang, b in blocks if lang == "toml"]
    cfg = write(tmp_path, "c.toml", toml[0])
    write(tmp_path, "example1_traces.txt", (DATA / "example1_traces.txt").read_text())
    assert io.load_config(cfg).angle_mean == 70.0
    assert io.load_flow_config(write(tmp_path, "f.toml", toml[1])).nx == 138


def test_point_coordinates_are_floats():
    p = Point(2, 3)
    assert type(p.x) is float and type(p.y) is float
