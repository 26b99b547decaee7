import json

import numpy as np
import pytest

from conftest import udg_instance
from sparsesens.cli import cli_main, parse_args
from sparsesens.experiments import (
    ConfigError,
    CoverageReport,
    ExperimentAborted,
    ExperimentConfig,
    StretchReport,
    coverage_fit,
    empty_square_counts,
    power_stretch,
    run_coverage,
    run_stretch,
)
from sparsesens.geometry import Window
from sparsesens.reports import emit_report, to_json, to_svg
from sparsesens.subnet import largest_component

QUICK = dict(model="UDG", lam=10.0, window=24, pairs=60, bins=[2.0, 5.0, 10.0, 20.0], check_trials=2000)


@pytest.fixture(scope="module")
def stretch_report():
    return run_stretch(ExperimentConfig(**QUICK))


def test_power_stretch():
    assert power_stretch(1.0, 3.7) == 1.0
    assert power_stretch(2.0, 2.0) == 4.0
    assert power_stretch(1.5, 5.0) == pytest.approx(7.59375)
    for bad in ((1.0, 1.9), (1.0, 5.1), (0.9, 2.0)):
        with pytest.raises(ValueError):
            power_stretch(*bad)


def test_stretch_invariants(stretch_report):
    r = stretch_report
    assert len(r.records) > 0
    geom, pts, base, sub = udg_instance(10.0, 24, 0)
    lc = set(largest_component(sub).members.tolist())
    max_len = sub.edge_lengths().max()
    for u, v, e, w, hops, lat, ratio, b in r.records:
        assert u != v and u in lc and v in lc
        assert ratio >= 1.0 and w >= e
        assert hops >= w / max_len - 1e-9
    assert set(r.power_stretch) == {"2.0", "3.0", "4.0", "5.0"}
    assert r.alpha_hat >= 1.0


def test_adjacent_tile_stretch_bound(stretch_report):
    geom, pts, base, sub = udg_instance(10.0, 24, 0)
    for t in sub.good_tiles()[:50]:
        nb = t.step("r")
        if nb in sub.statuses and sub.statuses[nb].good:
            from sparsesens.graphs import graph_distance
            a, b = sub.rep(t), sub.rep(nb)
            d = float(np.hypot(*(pts.coords[a] - pts.coords[b])))
            w = graph_distance(sub.as_graph(), a, b, weighted=True)
            assert w <= 3.0 and w / d <= 3.0 / d


def test_stretch_aborts_when_subcritical():
    with pytest.raises(ExperimentAborted):
        run_stretch(ExperimentConfig(model="UDG", lam=2.0, window=10, check_trials=1000))


def test_json_round_trip(stretch_report, tmp_path):
    path = emit_report(stretch_report, "JSON", tmp_path / "s.json")
    back = StretchReport.from_dict(json.loads(path.read_text()))
    assert back == stretch_report
    assert json.loads(path.read_text())["schema_version"] == 1


def test_empty_stretch_csv(tmp_path):
    r = StretchReport([], [], float("nan"), {}, float("nan"), [], 0, {})
    path = emit_report(r, "CSV", tmp_path / "e.csv")
    assert path.read_text() == ",".join(StretchReport.COLUMNS) + "\n"


def test_svg_polyline_per_edge(tmp_path):
    geom, pts, base, sub = udg_instance(8.0, 5, 3)
    svg = to_svg(sub, geom)
    assert svg.count("<polyline") == len(sub.edges) > 0
    assert svg.count("<rect") == 25
    emit_report(sub, "SVG", tmp_path / "s.svg", geom=geom)
    with pytest.raises(ValueError):
        emit_report(sub, "SVG", tmp_path / "s.svg")


def test_emit_unwritable(stretch_report, tmp_path):
    with pytest.raises(OSError):
        emit_report(stretch_report, "JSON", tmp_path / "missing" / "x.json")


def test_floats_have_17_digits():
    assert '"x": 0.10000000000000001' in to_json({"x": 0.1})


def test_empty_square_counts_nested_and_zero():
    rng = np.random.default_rng(0)
    xy = rng.uniform(0, 20, (60, 2))
    counts = empty_square_counts(xy, Window(0, 0, 20, 20), [0.0, 1.0, 2.0, 4.0, 8.0], 3000, rng)
    assert counts[0] == 3000
    assert np.all(np.diff(counts) <= 0)


def test_coverage_report_properties():
    cfg = ExperimentConfig(model="UDG", lams=[9.0], window=20, trials=1, squares=1500,
                           ells=[0.0, 0.5, 1.0, 1.5, 2.0], check_trials=1500)
    r = run_coverage(cfg)
    freqs = [row[4] for row in r.rows]
    assert freqs[0] == 1.0
    assert all(b <= a for a, b in zip(freqs, freqs[1:]))
    assert all(0 <= row[5] <= row[4] <= row[6] <= 1 for row in r.rows)
    assert CoverageReport.from_dict(json.loads(to_json(r))) == r


def test_coverage_fit_sentinel():
    f = coverage_fit([2, 4, 6], [0.0, 0.0, 0.0])
    assert f["slope"] == float("-inf") and f["note"]
    g = coverage_fit([1, 2, 3, 4], [np.exp(-1) * 1, np.exp(-2) * 4, np.exp(-3) * 9, np.exp(-4) * 16])
    assert g["slope"] == pytest.approx(-1.0) and g["r2"] == pytest.approx(1.0)


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(model="XYZ")
    with pytest.raises(ConfigError):
        ExperimentConfig(lam=-1.0)
    with pytest.raises(ConfigError):
        ExperimentConfig().geom()


def test_parse_args_sources(tmp_path):
    cfgfile = tmp_path / "c.cfg"
    cfgfile.write_text("# comment\nmodel = NN\nk=100  # trailing\nbracket=150..230\n")
    cmd, cfg = parse_args(["find-threshold", "--config", str(cfgfile), "k=120", "--seed", "4"])
    assert cmd == "find-threshold" and cfg.model == "NN" and cfg.k == 120 and cfg.seed == 4
    assert cfg.bracket == [150.0, 230.0] and cfg.trials == 10_000


def test_cli_errors(tmp_path, capsys):
    assert cli_main(["build-subnet", f"out={tmp_path}"]) == 1
    assert "model" in capsys.readouterr().err
    assert cli_main(["generate", "model=UDG", "colour=red"]) == 1
    assert "colour" in capsys.readouterr().err
    assert cli_main(["generate", "model=UDG", "lam=abc"]) == 1
    assert cli_main(["nope"]) == 1
    assert cli_main(["stretch", "model=UDG", "lam=2", "window=8", "check_trials=500", f"out={tmp_path}"]) == 2
    assert "supercritical" in capsys.readouterr().err


def test_cli_generate_and_route(tmp_path):
    assert cli_main(["generate", "model=NN", "window=2", f"out={tmp_path}"]) == 0
    lines = (tmp_path / "points.csv").read_text().splitlines()
    assert lines[0] == "id,x,y" and len(lines) > 100
    assert cli_main(["route", "n=32", "p=0.7", "src=0,0", "dst=3,3", f"out={tmp_path}"]) in (0, 1)
    assert cli_main(["route", "n=32", "p=0.7", f"out={tmp_path}"]) == 0
    d = json.loads((tmp_path / "route.json").read_text())
    assert d["outcome"] == "Delivered"


def test_cli_route_on_subnet(tmp_path):
    assert cli_main(["route", "model=UDG", "lam=9", "window=12", f"out={tmp_path}"]) == 0
    d = json.loads((tmp_path / "route.json").read_text())
    assert len(d["node_hops"]) == 3 * (len(d["lattice_hops"]) - 1) + 1
