"""Z^2 site percolation coupled to tiles: clusters, chemical distance, thresholds."""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import ndimage

from .geometry import Window, trial_rng
from .tiling import DIRECTIONS, E_REGION, TileGeom, TileId, neighbour_lens_masks, region_masks, tile_indices

logger = logging.getLogger(__name__)

P_C = 0.593
FOUR_NEIGHBOURS = ((1, 0), (-1, 0), (0, 1), (0, -1))


@dataclass(frozen=True, eq=False)
class LatticeWindow:
    """Open/closed sites; ``open[a, b]`` is site ``(origin.i + a, origin.j + b)``."""

    open: np.ndarray
    origin: TileId = TileId(0, 0)
    provenance: str = "sampled-iid"

    def __post_init__(self):
        arr = np.asarray(self.open, dtype=bool)
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise ValueError("lattice must be a non-empty 2-D array")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "open", arr)
        object.__setattr__(self, "origin", TileId(*self.origin))

    @property
    def shape(self) -> tuple[int, int]:
        return self.open.shape

    def index(self, t) -> tuple[int, int]:
        return (t[0] - self.origin.i, t[1] - self.origin.j)

    def site(self, a: int, b: int) -> TileId:
        return TileId(a + self.origin.i, b + self.origin.j)

    def inside(self, t) -> bool:
        a, b = self.index(t)
        return 0 <= a < self.open.shape[0] and 0 <= b < self.open.shape[1]

    def is_open(self, t) -> bool:
        a, b = self.index(t)
        return self.inside(t) and bool(self.open[a, b])

    def to_pbm(self) -> str:
        """Plain bitmap text: one row of 0/1 per ``j`` (top row = largest ``j``)."""
        rows = self.open.T[::-1].astype(np.uint8)
        return "\n".join("".join(map(str, r)) for r in rows) + "\n"

    def write_pbm(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_pbm())


@dataclass(frozen=True, eq=False)
class ClusterStats:
    labels: np.ndarray  # 0 = closed, clusters numbered 1.. in raster order
    sizes: np.ndarray  # sizes[c - 1] is the size of cluster c
    largest: int
    theta: float
    spanning: bool

    @property
    def n_clusters(self) -> int:
        return int(self.sizes.size)


def couple_lattice(statuses, origin=None) -> LatticeWindow:
    """Site ``(i, j)`` is open iff tile ``(i, j)`` is good.

    ``statuses`` is either a mapping ``TileId -> TileStatus`` covering a full
    rectangle of tiles or a rectangular nested sequence of statuses.
    """
    if isinstance(statuses, dict):
        keys = list(statuses)
        if not keys:
            raise ValueError("no tiles to couple")
        ii = [t[0] for t in keys]
        jj = [t[1] for t in keys]
        i0, j0 = min(ii), min(jj)
        nx, ny = max(ii) - i0 + 1, max(jj) - j0 + 1
        if nx * ny != len(keys):
            raise ValueError("tile statuses do not form a full rectangle")
        arr = np.zeros((nx, ny), dtype=bool)
        for t, st in statuses.items():
            arr[t[0] - i0, t[1] - j0] = st.good
        return LatticeWindow(arr, TileId(i0, j0), "coupled-from-tiles")
    rows = [list(r) for r in statuses]
    if not rows or len({len(r) for r in rows}) != 1 or not rows[0]:
        raise ValueError("ragged or empty tile grid")
    arr = np.array([[st.good for st in r] for r in rows], dtype=bool)
    if origin is None:
        origin = rows[0][0].tile
    return LatticeWindow(arr, TileId(*origin), "coupled-from-tiles")


def sample_site_lattice(n: int, p: float, seed: int, m: Optional[int] = None) -> LatticeWindow:
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    m = n if m is None else m
    rng = trial_rng(seed, 0)
    return LatticeWindow(rng.random((n, m)) < p, TileId(0, 0), f"sampled-iid p={p!r}")


def label_clusters(lat: LatticeWindow) -> ClusterStats:
    """4-neighbour open clusters; ``spanning`` if one cluster meets both ``i`` boundaries."""
    labels, n = ndimage.label(lat.open)
    sizes = np.bincount(labels.ravel(), minlength=n + 1)[1:]
    largest = int(sizes.max()) if n else 0
    left = set(np.unique(labels[0, :])) - {0}
    right = set(np.unique(labels[-1, :])) - {0}
    return ClusterStats(labels, sizes, largest, largest / lat.open.size, bool(left & right))


def _bfs_hops(lat: LatticeWindow, src, dst) -> float:
    start, goal = lat.index(src), lat.index(dst)
    if start == goal:
        return 0.0
    nx, ny = lat.shape
    seen = np.zeros(lat.shape, dtype=bool)
    seen[start] = True
    q = deque([(start, 0)])
    while q:
        (a, b), d = q.popleft()
        for da, db in FOUR_NEIGHBOURS:
            u, v = a + da, b + db
            if 0 <= u < nx and 0 <= v < ny and lat.open[u, v] and not seen[u, v]:
                if (u, v) == goal:
                    return float(d + 1)
                seen[u, v] = True
                q.append(((u, v), d + 1))
    return math.inf


def chemical_distance(lat: LatticeWindow, x, y) -> tuple[float, int]:
    """``(D^p, D)``: hops inside the open cluster (``inf`` if none) and L1 distance."""
    for t in (x, y):
        if not lat.is_open(t):
            raise ValueError(f"site {tuple(t)} is closed or outside the window")
    return _bfs_hops(lat, x, y), abs(x[0] - y[0]) + abs(x[1] - y[1])


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if trials <= 0:
        return (0.0, 1.0)
    p = successes / trials
    den = 1 + z * z / trials
    c = (p + z * z / (2 * trials)) / den
    h = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / den
    return (max(0.0, c - h), min(1.0, c + h))


# --- tile goodness by Monte Carlo -----------------------------------------

def _trial_points(geom: TileGeom, lam: float, seed: int, index: int):
    """Fresh Poisson points on the 3x3 block of tiles around tile (0, 0)."""
    rng = trial_rng(seed, index)
    half = 1.5 * geom.side
    n = rng.poisson(lam * (2 * half) ** 2)
    return rng.uniform(-half, half, size=(n, 2))


@lru_cache(maxsize=64)
def _tile_outcomes(geom: TileGeom, lam: float, seed: int, start: int, stop: int):
    """(count, regions_ok) of the centre tile for trials ``start..stop-1``."""
    ntr = stop - start
    xs, owners = [], []
    for i in range(start, stop):
        xy = _trial_points(geom, lam, seed, i)
        xs.append(xy)
        owners.append(np.full(len(xy), i - start))
    xy = np.concatenate(xs) if xs else np.empty((0, 2))
    trial = np.concatenate(owners) if owners else np.empty(0, dtype=np.int64)
    tix = tile_indices(xy, geom.side)
    centre = (tix[:, 0] == 0) & (tix[:, 1] == 0)
    counts = np.bincount(trial[centre], minlength=ntr)
    masks = region_masks(xy[centre], geom)
    have = np.zeros((ntr, masks.shape[1]), dtype=bool)
    for r in geom.regions:
        have[np.unique(trial[centre][masks[:, r]]), r] = True
    if geom.kind == "NN":
        for d, (di, dj) in DIRECTIONS.items():
            nb = np.flatnonzero((tix[:, 0] == di) & (tix[:, 1] == dj) & ~have[trial, E_REGION[d]])
            hit = neighbour_lens_masks(xy[nb], d, geom)
            have[np.unique(trial[nb[hit]]), E_REGION[d]] = True
    ok = np.all(have[:, list(geom.regions)], axis=1)
    out = np.column_stack([counts, ok]).astype(np.int64)
    out.setflags(write=False)
    return out


def tile_outcomes(geom: TileGeom, lam: float, trials: int, seed: int, workers: int = 1) -> np.ndarray:
    """``(trials, 2)`` array of (centre-tile count, all regions occupied).

    Trial ``i`` always uses substream ``i`` of ``seed``, so the result does
    not depend on ``workers`` and a longer run extends a shorter one.
    """
    blocks = [(lo, min(lo + 4096, trials)) for lo in range(0, trials, 4096)]
    if workers > 1 and len(blocks) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_tile_outcomes, *zip(*[(geom, float(lam), int(seed), lo, hi) for lo, hi in blocks])))
    else:
        parts = [_tile_outcomes(geom, float(lam), int(seed), lo, hi) for lo, hi in blocks]
    return np.concatenate(parts) if parts else np.empty((0, 2), dtype=np.int64)


def estimate_good_prob(geom: TileGeom, lam: float, trials: int, seed: int, k: Optional[int] = None,
                       workers: int = 1) -> tuple[float, tuple[float, float]]:
    """Fraction of independently sampled tiles that are good, with a Wilson 95% CI.

    Each trial draws a fresh Poisson process on the tile and its eight
    neighbours (the NN lenses span two tiles).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if geom.kind == "NN" and k is None:
        raise ValueError("NN goodness needs k")
    out = tile_outcomes(geom, lam, trials, seed, workers)
    good = out[:, 1].astype(bool)
    if geom.kind == "NN":
        good &= 2 * out[:, 0] <= k
    s = int(good.sum())
    return s / trials, wilson_interval(s, trials)


@dataclass
class ThresholdReport:
    parameter: str
    estimate: float
    ci: tuple  # final bracket [last value at or below target, estimate]
    p_hat: float
    p_ci: tuple
    trials: int
    window: str
    target: float = P_C
    evaluations: list = field(default_factory=list)
    schema_version: int = 1

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ci"] = list(self.ci)
        d["p_ci"] = list(self.p_ci)
        d["evaluations"] = [list(e) for e in self.evaluations]
        return d


def bisect_threshold(prob: Callable, bracket, target: float = P_C, tol: float = 0.01,
                     integer: bool = False):
    """Smallest parameter whose probability exceeds ``target``.

    ``prob(x)`` returns ``(p_hat, (lo, hi), trials)`` or a bare float.  The
    search keeps ``prob(lo) <= target < prob(hi)`` and stops once the bracket
    is within ``tol`` (or adjacent integers).  Returns ``(estimate, lo,
    p_at_estimate, evaluations)``.
    """
    def ev(x):
        r = prob(x)
        if isinstance(r, tuple):
            return r
        return (float(r), (float(r), float(r)), 0)

    lo, hi = bracket
    if integer:
        lo, hi = int(lo), int(hi)
    evals = []
    r_lo, r_hi = ev(lo), ev(hi)
    evals += [(lo, r_lo[0]), (hi, r_hi[0])]
    if not (r_lo[0] <= target < r_hi[0]):
        raise ValueError(f"bracket {bracket} does not straddle target {target}: "
                         f"p({lo})={r_lo[0]:.4f}, p({hi})={r_hi[0]:.4f}")
    best = r_hi
    while (hi - lo > 1) if integer else (hi - lo > tol):
        mid = (lo + hi) // 2 if integer else 0.5 * (lo + hi)
        r = ev(mid)
        evals.append((mid, r[0]))
        if r[0] > target:
            hi, best = mid, r
        else:
            lo = mid
    vals = [p for _, p in sorted(evals)]
    if any(b < a - 0.05 for a, b in zip(vals, vals[1:])):
        logger.warning("goodness estimates are not monotone over the bracket: %s", sorted(evals))
    return hi, lo, best, evals


def find_threshold(geom: TileGeom, parameter: str, bracket, target: float = P_C, tol: float = 0.01,
                   trials: int = 10_000, seed: int = 0, lam: float = 1.0, max_trials: int = 100_000,
                   workers: int = 1) -> ThresholdReport:
    """Locate the crossing of tile goodness through ``target`` by bisection.

    ``parameter`` is ``"lam"`` (UDG, real bisection to ``tol``) or ``"k"``
    (NN at density ``lam``, integer bisection).  When the Wilson interval at
    a probe contains the target, its trial count is doubled up to
    ``max_trials``.
    """
    if parameter not in ("lam", "k"):
        raise ValueError(f"parameter must be 'lam' or 'k', got {parameter!r}")
    if parameter == "k" and geom.kind != "NN":
        raise ValueError("k thresholds apply to NN tiles")

    def prob(x):
        t = trials
        while True:
            if parameter == "lam":
                p, ci = estimate_good_prob(geom, float(x), t, seed, workers=workers)
            else:
                p, ci = estimate_good_prob(geom, lam, t, seed, k=int(x), workers=workers)
            if not (ci[0] <= target <= ci[1]) or t >= max_trials:
                return p, ci, t
            t = min(2 * t, max_trials)

    est, lo, best, evals = bisect_threshold(prob, bracket, target, tol, integer=parameter == "k")
    return ThresholdReport(
        parameter=parameter,
        estimate=float(est),
        ci=(float(lo), float(est)),
        p_hat=float(best[0]),
        p_ci=tuple(float(c) for c in best[1]),
        trials=int(best[2]),
        window="single tile with one-tile margin",
        target=target,
        evaluations=[(float(x), float(p)) for x, p in evals],
    )


def theta_curve(n: int, ps, trials: int, seed: int = 0):
    """Mean largest-cluster fraction per ``p`` with its standard error."""
    means, ses = [], []
    for p in ps:
        vals = np.array([label_clusters(sample_site_lattice(n, p, hash_seed(seed, i, p))).theta
                         for i in range(trials)])
        means.append(vals.mean())
        ses.append(vals.std(ddof=1) / math.sqrt(trials) if trials > 1 else 0.0)
    return np.array(means), np.array(ses)


def hash_seed(seed: int, index: int, p: float = 0.0) -> int:
    """Deterministic child seed for lattice ``index`` at occupation ``p``."""
    ss = np.random.SeedSequence([int(seed), int(index), int(round(p * 1_000_000))])
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def coupled_lattice_from_points(xy: np.ndarray, geom: TileGeom, nx: int, ny: int, k: Optional[int] = None) -> LatticeWindow:
    """Goodness lattice of tiles ``(0..nx-1, 0..ny-1)`` without building any graph.

    Only valid when a tile's goodness depends on the points of the tile
    itself (always for UDG; for NN the lens points of neighbour tiles are
    also tested).
    """
    from .subnet import classify_tiles
    from .geometry import PointSet
    s, h = geom.side, geom.side / 2
    w = Window(-h, -h, nx * s - h, ny * s - h, s if geom.kind == "NN" else 0.0)
    sts = classify_tiles(PointSet(xy, 0.0, 0, w), geom, k)
    return couple_lattice(sts)
