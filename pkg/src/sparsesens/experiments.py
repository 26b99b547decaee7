"""Stretch, power-stretch and coverage experiments."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy
from scipy import sparse, stats
from scipy.sparse import csgraph
from scipy.spatial import cKDTree

from . import __version__
from .geometry import sample_poisson, trial_rng
from .graphs import build_knn, build_udg
from .lattice import P_C, estimate_good_prob, wilson_interval
from .subnet import Role, SubnetGraph, construct_subnet, largest_component, tile_window
from .tiling import TileGeom


class ExperimentAborted(RuntimeError):
    """The experiment cannot produce a meaningful report (exit code 2)."""


class ConfigError(ValueError):
    """Invalid or unknown configuration (exit code 1)."""


@dataclass
class ExperimentConfig:
    model: Optional[str] = None
    lam: float = 1.0
    k: int = 188
    a: float = 0.893
    r0: float = 0.25
    window: int = 20
    seed: int = 0
    trials: int = 1
    pairs: int = 200
    ells: list = field(default_factory=lambda: [2.0, 4.0, 6.0, 8.0, 10.0, 12.0])
    betas: list = field(default_factory=lambda: [2.0, 3.0, 4.0, 5.0])
    bins: list = field(default_factory=lambda: [10.0, 20.0, 40.0, 80.0])
    lams: list = field(default_factory=list)
    squares: int = 2000
    bracket: list = field(default_factory=list)
    target: float = P_C
    tol: float = 0.01
    n: int = 64
    p: float = 0.65
    src: list = field(default_factory=list)
    dst: list = field(default_factory=list)
    distributed: bool = False
    check_trials: int = 4000
    min_component: int = 50
    resolution: int = 64
    workers: int = 1
    out: str = "."

    def __post_init__(self):
        if self.model is not None:
            self.model = str(self.model).upper()
            if self.model not in ("UDG", "NN"):
                raise ConfigError(f"model must be UDG or NN, got {self.model!r}")
        for name in ("lam", "a", "r0", "tol", "target"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("k", "window", "trials", "pairs", "squares", "n", "resolution", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")

    def geom(self) -> TileGeom:
        if self.model is None:
            raise ConfigError("missing required key 'model'")
        try:
            return TileGeom.udg(self.r0) if self.model == "UDG" else TileGeom.nn(self.a)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def provenance(cfg: ExperimentConfig) -> dict:
    return {
        # the output directory is not part of what was computed
        "config": {k: v for k, v in cfg.to_dict().items() if k != "out"},
        "master_seed": cfg.seed,
        "versions": {"sparsesens": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
    }


def build_instance(cfg: ExperimentConfig, seed: Optional[int] = None, lam: Optional[float] = None):
    """Sample points on the configured window and construct the subnet."""
    geom = cfg.geom()
    lam = cfg.lam if lam is None else lam
    pts = sample_poisson(tile_window(geom, cfg.window), lam, cfg.seed if seed is None else seed)
    if geom.kind == "UDG":
        base = build_udg(pts)
        k = None
    else:
        base = build_knn(pts, cfg.k)
        k = cfg.k
    if cfg.distributed:
        from .distributed import construct_subnet_distributed
        sub = construct_subnet_distributed(pts, base, geom, k)
    else:
        sub = construct_subnet(pts, base, geom, k)
    return pts, base, sub


def require_supercritical(cfg: ExperimentConfig, lam: Optional[float] = None) -> tuple:
    geom = cfg.geom()
    lam = cfg.lam if lam is None else lam
    k = cfg.k if geom.kind == "NN" else None
    p, ci = estimate_good_prob(geom, lam, cfg.check_trials, cfg.seed, k=k, workers=cfg.workers)
    if p <= P_C:
        raise ExperimentAborted(
            f"tile goodness {p:.4f} (95% CI {ci[0]:.4f}-{ci[1]:.4f}) does not exceed {P_C} "
            f"at lam={lam}; parameters are not supercritical")
    return p, ci


def power_stretch(delta: float, beta: float) -> float:
    """Power stretch ``delta ** beta`` for path-loss exponent ``beta`` in [2, 5]."""
    if not (2.0 <= beta <= 5.0):
        raise ValueError(f"beta must lie in [2, 5], got {beta!r}")
    if not delta >= 1.0:
        raise ValueError(f"distance stretch must be >= 1, got {delta!r}")
    return float(delta) ** float(beta)


def _local_graph(sub: SubnetGraph):
    ids = sub.members
    pos = {int(v): i for i, v in enumerate(ids)}
    if len(sub.edges):
        u = np.array([pos[int(x)] for x in sub.edges[:, 0]])
        v = np.array([pos[int(x)] for x in sub.edges[:, 1]])
        w = sub.edge_lengths()
    else:
        u = v = np.empty(0, dtype=np.int64)
        w = np.empty(0)
    m = len(ids)
    g = sparse.coo_matrix((np.r_[w, w], (np.r_[u, v], np.r_[v, u])), shape=(m, m)).tocsr()
    return g, pos


@dataclass
class StretchReport:
    records: list  # [u, v, euclidean, weighted, hops, lattice_distance, ratio, bin]
    bins: list  # per-bin summaries
    alpha_hat: float
    power_stretch: dict
    tail_slope: float
    good_prob: list
    component_size: int
    provenance: dict
    schema_version: int = 1

    COLUMNS = ("u", "v", "euclidean", "weighted", "hops", "lattice_distance", "ratio", "bin")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "StretchReport":
        return cls(**d)

    def csv_rows(self):
        return self.records


def _fit_line(x, y):
    """Least-squares slope, intercept, R^2 and a 95% CI for the slope."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    n = x.size
    res = stats.linregress(x, y)
    r2 = res.rvalue ** 2 if np.isfinite(res.rvalue) else float("nan")
    if n > 2:
        h = stats.t.ppf(0.975, n - 2) * res.stderr
    else:
        h = float("inf")
    return float(res.slope), float(res.intercept), float(r2), (float(res.slope - h), float(res.slope + h))


def run_stretch(cfg: ExperimentConfig) -> StretchReport:
    """Rep-to-rep stretch of the largest component, stratified by Euclidean distance."""
    p, ci = require_supercritical(cfg)
    geom = cfg.geom()
    pts, _, sub = build_instance(cfg)
    lc = largest_component(sub)
    reps = np.array([v for v in lc.members if lc.roles[int(v)] == Role.REPRESENTATIVE], dtype=np.int64)
    if reps.size < cfg.min_component:
        raise ExperimentAborted(f"largest component has {reps.size} representatives, need {cfg.min_component}")
    edges = list(zip(cfg.bins[:-1], cfg.bins[1:]))
    g, pos = _local_graph(lc)
    rng = trial_rng(cfg.seed, 1)
    xy = pts.coords
    tiles = {int(v): lc.provenance[int(v)][0] for v in reps}
    per_source = max(1, cfg.pairs // 25)
    filled = [0] * len(edges)
    records = []
    seen = set()
    for s in rng.permutation(reps):
        if all(f >= cfg.pairs for f in filled):
            break
        d_e = np.hypot(xy[reps, 0] - xy[s, 0], xy[reps, 1] - xy[s, 1])
        chosen = []
        for b, (lo, hi) in enumerate(edges):
            if filled[b] >= cfg.pairs:
                continue
            cand = reps[(d_e >= lo) & (d_e < hi)]
            cand = [int(t) for t in cand if (min(s, t), max(s, t)) not in seen]
            if not cand:
                continue
            take = rng.choice(len(cand), size=min(per_source, len(cand), cfg.pairs - filled[b]), replace=False)
            for i in sorted(take):
                chosen.append((cand[i], b))
            filled[b] += len(take)
        if not chosen:
            continue
        src = pos[int(s)]
        dw = csgraph.dijkstra(g, directed=False, indices=src)
        dh = csgraph.dijkstra(g, directed=False, indices=src, unweighted=True)
        for t, b in chosen:
            seen.add((min(s, t), max(s, t)))
            e = float(math.hypot(*(xy[t] - xy[s])))
            w = float(dw[pos[t]])
            ta, tb = tiles[int(s)], tiles[t]
            lat = abs(ta.i - tb.i) + abs(ta.j - tb.j)
            records.append([int(s), t, e, w, int(dh[pos[t]]), lat, w / e, b])
    ratios = np.array([r[6] for r in records])
    binsum = []
    tail_x, tail_y = [], []
    for b, (lo, hi) in enumerate(edges):
        rb = np.array([r[6] for r in records if r[7] == b])
        if rb.size == 0:
            binsum.append({"lo": lo, "hi": hi, "count": 0})
            continue
        med = float(np.median(rb))
        exceed = int((rb > 1.5 * med).sum())
        frac = (exceed + 0.5) / (rb.size + 1)
        tail_x.append(0.5 * (lo + hi))
        tail_y.append(math.log(frac))
        binsum.append({
            "lo": lo, "hi": hi, "count": int(rb.size), "median": med,
            "p99": float(np.percentile(rb, 99)), "max": float(rb.max()),
            "exceed_1_5_median": exceed, "exceed_fraction": frac,
            "lattice_ratio_p99": float(np.percentile(
                [r[3] / (r[5] * geom.side) for r in records if r[7] == b and r[5] > 0] or [float("nan")], 99)),
        })
    alpha = float(np.percentile(ratios, 99)) if ratios.size else float("nan")
    ps = {str(b): power_stretch(max(alpha, 1.0), b) for b in cfg.betas} if ratios.size else {}
    slope = _fit_line(tail_x, tail_y)[0] if len(tail_x) >= 2 else float("nan")
    return StretchReport(records, binsum, alpha, ps, slope, [p, list(ci)], int(len(lc.members)), provenance(cfg))


@dataclass
class CoverageReport:
    rows: list  # [lam, ell, squares, empty, frequency, ci_lo, ci_hi]
    fits: list  # per-lam {lam, slope, intercept, r2, slope_ci, points, note}
    provenance: dict
    schema_version: int = 1

    COLUMNS = ("lam", "ell", "squares", "empty", "frequency", "ci_lo", "ci_hi")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "CoverageReport":
        return cls(**d)

    def csv_rows(self):
        return self.rows


def empty_square_counts(nodes_xy: np.ndarray, window, ells_units, squares: int, rng) -> np.ndarray:
    """Number of empty squares per side length among ``squares`` random drops.

    Squares of every size share their centres, drawn so the largest square
    lies fully inside the window; a square that is empty at one size is
    therefore empty at every smaller size.
    """
    big = max(ells_units) if len(ells_units) else 0.0
    x0, y0 = window.x_min + big / 2, window.y_min + big / 2
    x1, y1 = window.x_max - big / 2, window.y_max - big / 2
    if x1 < x0 or y1 < y0:
        raise ExperimentAborted("coverage square larger than the analysis window")
    centres = np.column_stack([rng.uniform(x0, x1, squares), rng.uniform(y0, y1, squares)])
    out = np.zeros(len(ells_units), dtype=np.int64)
    if len(nodes_xy) == 0:
        out[:] = squares
        return out
    tree = cKDTree(nodes_xy)
    for i, ell in enumerate(ells_units):
        if ell <= 0:
            out[i] = squares
            continue
        cnt = tree.query_ball_point(centres, r=ell / 2, p=np.inf, return_length=True)
        out[i] = int((np.asarray(cnt) == 0).sum())
    return out


def coverage_fit(ells, freqs):
    """Fit ``log(freq) - 2 log(ell)`` against ``ell`` over the non-zero frequencies."""
    pts = [(l, f) for l, f in zip(ells, freqs) if l > 0 and f > 0]
    if len(pts) < 2:
        note = "fewer than two non-zero frequencies; slope is -inf" if not pts or all(
            f == 0 for f in freqs) else "fewer than two points to fit"
        return {"slope": float("-inf"), "intercept": float("nan"), "r2": float("nan"),
                "slope_ci": [float("-inf"), float("-inf")], "points": len(pts), "note": note}
    x = np.array([p[0] for p in pts])
    y = np.log([p[1] for p in pts]) - 2 * np.log(x)
    slope, icpt, r2, sci = _fit_line(x, y)
    return {"slope": slope, "intercept": icpt, "r2": r2, "slope_ci": list(sci), "points": len(pts), "note": ""}


def run_coverage(cfg: ExperimentConfig, check: bool = True) -> CoverageReport:
    """Frequency of subnet-free squares ``B(ell)`` (``ell`` in tile sides) per density."""
    geom = cfg.geom()
    lams = list(cfg.lams) or [cfg.lam]
    if check:
        for lam in lams:
            require_supercritical(cfg, lam)
    rows, fits = [], []
    window = tile_window(geom, cfg.window)
    ells_units = [float(l) * geom.side for l in cfg.ells]
    for li, lam in enumerate(lams):
        empty = np.zeros(len(cfg.ells), dtype=np.int64)
        total = 0
        for t in range(cfg.trials):
            seed = int(np.random.SeedSequence([cfg.seed, li, t]).generate_state(1, np.uint32)[0])
            pts, _, sub = build_instance(cfg, seed=seed, lam=lam)
            lc = largest_component(sub)
            rng = trial_rng(seed, 7)
            empty += empty_square_counts(pts.coords[lc.members], window, ells_units, cfg.squares, rng)
            total += cfg.squares
        freqs = empty / total
        for ell, e, f in zip(cfg.ells, empty, freqs):
            lo, hi = wilson_interval(int(e), total)
            rows.append([float(lam), float(ell), int(total), int(e), float(f), lo, hi])
        fit = coverage_fit(list(cfg.ells), list(freqs))
        fit["lam"] = float(lam)
        fits.append(fit)
    return CoverageReport(rows, fits, provenance(cfg))
