"""Command-line driver: ``sparsesens <subcommand> [--config FILE] [key=value ...] [--key value ...]``.

Exit codes: 0 success, 1 parameter error, 2 experiment aborted.
"""

from __future__ import annotations

import dataclasses
import sys
import typing
from pathlib import Path

import numpy as np

from .experiments import (
    ConfigError,
    ExperimentAborted,
    ExperimentConfig,
    build_instance,
    provenance,
    run_coverage,
    run_stretch,
)
from .geometry import sample_poisson, trial_rng
from .lattice import (
    P_C,
    couple_lattice,
    find_threshold,
    hash_seed,
    label_clusters,
    sample_site_lattice,
    wilson_interval,
)
from .reports import emit_report, fmt_float
from .routing import DELIVERED, expand_route, route
from .subnet import largest_component, tile_window
from .tiling import TileId, write_region_raster

SUBCOMMANDS = ("generate", "build-subnet", "percolation", "find-threshold", "stretch", "coverage",
               "route", "render")
NEEDS_MODEL = {"generate", "build-subnet", "find-threshold", "stretch", "coverage", "render"}
DEFAULT_TRIALS = {"find-threshold": 10_000, "percolation": 100, "coverage": 1, "stretch": 1}

USAGE = f"usage: sparsesens {{{','.join(SUBCOMMANDS)}}} [--config FILE] [key=value ...] [--key value ...]"


def _fields() -> dict:
    hints = typing.get_type_hints(ExperimentConfig)
    return {f.name: hints[f.name] for f in dataclasses.fields(ExperimentConfig)}


def _convert(key: str, raw: str, tp):
    raw = raw.strip()
    try:
        if tp is bool:
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if tp is int:
            return int(raw)
        if tp is float:
            return float(raw)
        if tp is list:
            if not raw:
                return []
            parts = raw.split("..") if ".." in raw else raw.split(",")
            if key in ("src", "dst"):
                return [int(x) for x in parts]
            return [float(x) for x in parts]
        return raw
    except ValueError:
        raise ConfigError(f"bad value for key '{key}': {raw!r}") from None


def read_config_file(path) -> list:
    pairs = []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value")
        k, v = line.split("=", 1)
        pairs.append((k.strip(), v.strip()))
    return pairs


def parse_args(argv: list) -> tuple:
    """``(subcommand, ExperimentConfig)``; file values first, then command-line overrides."""
    if not argv or argv[0] in ("-h", "--help"):
        raise ConfigError(USAGE)
    cmd, rest = argv[0], list(argv[1:])
    if cmd not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand '{cmd}'\n{USAGE}")
    file_pairs, cli_pairs = [], []
    i = 0
    while i < len(rest):
        a = rest[i]
        if a.startswith("--"):
            key = a[2:]
            if "=" in key:
                key, val = key.split("=", 1)
            else:
                if i + 1 >= len(rest):
                    raise ConfigError(f"missing value for key '{key}'")
                i += 1
                val = rest[i]
            key = key.replace("-", "_")
            if key == "config":
                file_pairs += read_config_file(val)
            else:
                cli_pairs.append((key, val))
        elif "=" in a:
            k, v = a.split("=", 1)
            cli_pairs.append((k.strip(), v))
        else:
            raise ConfigError(f"unexpected argument {a!r}; use key=value")
        i += 1
    fields = _fields()
    values = {}
    for key, val in file_pairs + cli_pairs:
        if key not in fields:
            raise ConfigError(f"unknown key '{key}'")
        tp = fields[key]
        if tp == typing.Optional[str]:
            tp = str
        values[key] = _convert(key, val, tp)
    if cmd in NEEDS_MODEL and "model" not in values:
        raise ConfigError("missing required key 'model'")
    if "trials" not in values:
        values["trials"] = DEFAULT_TRIALS.get(cmd, 1)
    return cmd, ExperimentConfig(**values)


def _out(cfg: ExperimentConfig, name: str) -> Path:
    d = Path(cfg.out)
    d.mkdir(parents=True, exist_ok=True)
    return d / name


def _write(path: Path, text: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def cmd_generate(cfg):
    geom = cfg.geom()
    pts = sample_poisson(tile_window(geom, cfg.window), cfg.lam, cfg.seed)
    rows = ["id,x,y"] + [f"{i},{fmt_float(x)},{fmt_float(y)}" for i, (x, y) in enumerate(pts.coords)]
    _write(_out(cfg, "points.csv"), "\n".join(rows) + "\n")
    w = pts.window
    emit_report({"n": pts.n, "window": [w.x_min, w.y_min, w.x_max, w.y_max, w.margin],
                 "provenance": provenance(cfg)}, "JSON", _out(cfg, "generate.json"))
    return f"{pts.n} points"


def cmd_build_subnet(cfg):
    pts, base, sub = build_instance(cfg)
    sub.write_csv(_out(cfg, "nodes.csv"), _out(cfg, "edges.csv"))
    lc = largest_component(sub)
    deg = sub.degrees()
    lat = couple_lattice(sub.statuses)
    lat.write_pbm(_out(cfg, "lattice.pbm"))
    lengths = sub.edge_lengths()
    emit_report({
        "n_points": pts.n, "base_edges": base.n_edges, "subnet_nodes": int(sub.members.size),
        "subnet_edges": int(len(sub.edges)), "tiles": len(sub.statuses), "good_tiles": len(sub.good_tiles()),
        "max_degree": max(deg.values(), default=0),
        "max_edge_length": float(lengths.max()) if lengths.size else 0.0,
        "largest_component": int(lc.members.size),
        "anomalies": [[kind, list(map(int, ids))] for kind, ids in sub.anomalies],
        "provenance": provenance(cfg),
    }, "JSON", _out(cfg, "subnet.json"))
    return f"{len(sub.good_tiles())}/{len(sub.statuses)} good tiles, {len(sub.edges)} edges"


def cmd_percolation(cfg):
    rows, spans, thetas = [], 0, []
    for i in range(cfg.trials):
        lat = sample_site_lattice(cfg.n, cfg.p, hash_seed(cfg.seed, i, cfg.p))
        st = label_clusters(lat)
        if i == 0:
            lat.write_pbm(_out(cfg, "lattice.pbm"))
        spans += st.spanning
        thetas.append(st.theta)
        rows.append([i, st.spanning, st.theta, st.largest, st.n_clusters])
    csv = ["index,spanning,theta,largest,clusters"] + [
        f"{i},{int(s)},{fmt_float(t)},{l},{c}" for i, s, t, l, c in rows]
    _write(_out(cfg, "percolation.csv"), "\n".join(csv) + "\n")
    lo, hi = wilson_interval(spans, cfg.trials)
    emit_report({"n": cfg.n, "p": cfg.p, "trials": cfg.trials, "spanning_fraction": spans / cfg.trials,
                 "spanning_ci": [lo, hi], "theta_mean": float(np.mean(thetas)), "p_c": P_C,
                 "provenance": provenance(cfg)}, "JSON", _out(cfg, "percolation.json"))
    return f"spanning fraction {spans / cfg.trials:.3f}"


def cmd_find_threshold(cfg):
    geom = cfg.geom()
    param = "lam" if cfg.model == "UDG" else "k"
    bracket = cfg.bracket or ([1.0, 16.0] if param == "lam" else [150.0, 230.0])
    if len(bracket) != 2:
        raise ConfigError("bracket needs two values, e.g. bracket=150..230")
    rep = find_threshold(geom, param, bracket, target=cfg.target, tol=cfg.tol, trials=cfg.trials,
                         seed=cfg.seed, lam=cfg.lam, workers=cfg.workers)
    d = rep.to_dict()
    d["provenance"] = provenance(cfg)
    emit_report(d, "JSON", _out(cfg, "threshold.json"))
    return f"{param} threshold {rep.estimate:g} (p = {rep.p_hat:.4f})"


def cmd_stretch(cfg):
    rep = run_stretch(cfg)
    emit_report(rep, "CSV", _out(cfg, "stretch.csv"))
    emit_report(rep, "JSON", _out(cfg, "stretch.json"))
    return f"{len(rep.records)} pairs, alpha_hat {rep.alpha_hat:.4f}"


def cmd_coverage(cfg):
    rep = run_coverage(cfg)
    emit_report(rep, "CSV", _out(cfg, "coverage.csv"))
    emit_report(rep, "JSON", _out(cfg, "coverage.json"))
    return "; ".join(f"lam {f['lam']:g}: slope {f['slope']:.4f}" for f in rep.fits)


def cmd_route(cfg):
    sub = None
    if cfg.model is None:
        lat = sample_site_lattice(cfg.n, cfg.p, cfg.seed)
    else:
        _, _, sub = build_instance(cfg)
        lat = couple_lattice(sub.statuses)
    if cfg.src and cfg.dst:
        if len(cfg.src) != 2 or len(cfg.dst) != 2:
            raise ConfigError("src and dst are tile pairs, e.g. src=0,0")
        src, dst = TileId(*cfg.src), TileId(*cfg.dst)
    else:
        st = label_clusters(lat)
        if st.largest < 2:
            raise ExperimentAborted("no open cluster with two sites to route between")
        big = int(np.argmax(st.sizes)) + 1
        sites = np.argwhere(st.labels == big)
        a, b = trial_rng(cfg.seed, 3).choice(len(sites), size=2, replace=False)
        src, dst = lat.site(*sites[a]), lat.site(*sites[b])
    try:
        trace = route(lat, src, dst)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if sub is not None and trace.outcome == DELIVERED:
        trace.node_hops = expand_route(trace.lattice_hops, sub)
    d = trace.to_dict()
    d["provenance"] = provenance(cfg)
    emit_report(d, "JSON", _out(cfg, "route.json"))
    return f"{trace.outcome}: {trace.hop_count} hops, {trace.probes} probes"


def cmd_render(cfg):
    geom = cfg.geom()
    _, _, sub = build_instance(cfg)
    emit_report(sub, "SVG", _out(cfg, "subnet.svg"), geom=geom)
    write_region_raster(_out(cfg, "regions.csv"), geom, cfg.resolution)
    return f"{len(sub.edges)} edges drawn"


COMMANDS = {
    "generate": cmd_generate, "build-subnet": cmd_build_subnet, "percolation": cmd_percolation,
    "find-threshold": cmd_find_threshold, "stretch": cmd_stretch, "coverage": cmd_coverage,
    "route": cmd_route, "render": cmd_render,
}


def cli_main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cmd, cfg = parse_args(argv)
        msg = COMMANDS[cmd](cfg)
    except ExperimentAborted as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"{cmd}: {msg}")
    return 0


def main() -> None:
    sys.exit(cli_main())

