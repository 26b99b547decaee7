"""Point-process sampling, windows and exact spatial queries."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np


class Point(NamedTuple):
    x: float
    y: float


def substream_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    """Seed sequence for trial ``index`` of a run seeded with ``master_seed``.

    Trials drawn from distinct substreams are independent, and a trial's
    draws do not depend on how many other trials exist or in which order
    they are executed.
    """
    return np.random.SeedSequence([int(master_seed) & 0xFFFFFFFFFFFFFFFF, int(index)])


def trial_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(substream_seed(master_seed, index))


@dataclass(frozen=True)
class Window:
    """Axis-aligned analysis rectangle plus a sampled-but-ignored margin."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float
    margin: float = 0.0

    def __post_init__(self):
        vals = (self.x_min, self.y_min, self.x_max, self.y_max, self.margin)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("window bounds must be finite")
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError("window must have positive width and height")
        if self.margin < 0:
            raise ValueError("margin must be >= 0")

    @property
    def padded(self) -> tuple[float, float, float, float]:
        m = self.margin
        return (self.x_min - m, self.y_min - m, self.x_max + m, self.y_max + m)

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    @property
    def padded_area(self) -> float:
        x0, y0, x1, y1 = self.padded
        return (x1 - x0) * (y1 - y0)

    def contains(self, xy: np.ndarray, padded: bool = False) -> np.ndarray:
        x0, y0, x1, y1 = self.padded if padded else (self.x_min, self.y_min, self.x_max, self.y_max)
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        return (xy[:, 0] >= x0) & (xy[:, 0] <= x1) & (xy[:, 1] >= y0) & (xy[:, 1] <= y1)


@dataclass(frozen=True, eq=False)
class PointSet:
    """Sampled points; point ``i`` has id ``i`` (generation order)."""

    coords: np.ndarray
    density: float
    seed: int
    window: Window

    def __post_init__(self):
        coords = np.ascontiguousarray(self.coords, dtype=float).reshape(-1, 2)
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        if not np.all(np.isfinite(coords)):
            raise ValueError("point coordinates must be finite")

    def __len__(self) -> int:
        return self.coords.shape[0]

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def ids(self) -> np.ndarray:
        return np.arange(self.n)

    def point(self, i: int) -> Point:
        x, y = self.coords[i]
        return Point(float(x), float(y))

    def __eq__(self, other):
        if not isinstance(other, PointSet):
            return NotImplemented
        return (
            self.density == other.density
            and self.seed == other.seed
            and self.window == other.window
            and np.array_equal(self.coords, other.coords)
        )

    __hash__ = None

    @classmethod
    def from_coords(cls, coords, window: Optional[Window] = None, density: float = 1.0, seed: int = 0):
        coords = np.asarray(coords, dtype=float).reshape(-1, 2)
        if window is None:
            if len(coords):
                lo = coords.min(axis=0)
                hi = coords.max(axis=0)
            else:
                lo = hi = np.zeros(2)
            window = Window(lo[0] - 1.0, lo[1] - 1.0, hi[0] + 1.0, hi[1] + 1.0)
        return cls(coords, density, seed, window)


def sample_poisson(window: Window, lam: float, seed: int) -> PointSet:
    """Homogeneous Poisson process of intensity ``lam`` on the padded window.

    The total count is drawn first, then that many independent uniform
    locations, which is equivalent to independent Poisson counts on
    disjoint sub-regions.
    """
    if not (lam >= 0) or not math.isfinite(lam):
        raise ValueError(f"density must be a finite number >= 0, got {lam!r}")
    rng = np.random.default_rng(substream_seed(seed, 0))
    x0, y0, x1, y1 = window.padded
    n = rng.poisson(lam * window.padded_area) if lam > 0 else 0
    xy = np.empty((n, 2))
    xy[:, 0] = rng.uniform(x0, x1, n)
    xy[:, 1] = rng.uniform(y0, y1, n)
    return PointSet(xy, float(lam), int(seed), window)


@dataclass(frozen=True, eq=False)
class SpatialIndex:
    """Uniform grid over a point set.

    Cell ``(i, j)`` holds the points with ``floor(x / cell_size) == i`` and
    ``floor(y / cell_size) == j``, so a point on a cell's upper edge belongs
    to the next cell.
    """

    points: PointSet
    cell_size: float
    buckets: dict = field(repr=False)

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        return (math.floor(x / self.cell_size), math.floor(y / self.cell_size))

    def __len__(self) -> int:
        return len(self.buckets)

    def _bounds(self):
        if not self.buckets:
            return None
        keys = np.array(list(self.buckets.keys()))
        return keys.min(axis=0), keys.max(axis=0)

    def _gather(self, i0, i1, j0, j1) -> np.ndarray:
        parts = []
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                b = self.buckets.get((i, j))
                if b is not None:
                    parts.append(b)
        if not parts:
            return np.empty(0, dtype=np.int64)
        return np.concatenate(parts)


def build_index(points: PointSet, cell_size: float) -> SpatialIndex:
    if not (cell_size > 0):
        raise ValueError(f"cell_size must be > 0, got {cell_size!r}")
    xy = points.coords
    buckets: dict[tuple[int, int], np.ndarray] = {}
    if len(xy):
        cells = np.floor(xy / cell_size).astype(np.int64)
        order = np.lexsort((np.arange(len(xy)), cells[:, 1], cells[:, 0]))
        sc = cells[order]
        brk = np.flatnonzero(np.any(np.diff(sc, axis=0) != 0, axis=1)) + 1
        for chunk in np.split(order, brk):
            ci, cj = cells[chunk[0]]
            members = np.sort(chunk)
            members.setflags(write=False)
            buckets[(int(ci), int(cj))] = members
    return SpatialIndex(points, float(cell_size), buckets)


def _dist(xy: np.ndarray, ids: np.ndarray, cx: float, cy: float) -> np.ndarray:
    return np.hypot(xy[ids, 0] - cx, xy[ids, 1] - cy)


def range_query(index: SpatialIndex, center, r: float) -> set[int]:
    """Ids within Euclidean distance ``r`` of ``center`` (closed ball)."""
    if not (r >= 0):
        raise ValueError(f"radius must be >= 0, got {r!r}")
    cx, cy = float(center[0]), float(center[1])
    s = index.cell_size
    cand = index._gather(
        math.floor((cx - r) / s), math.floor((cx + r) / s),
        math.floor((cy - r) / s), math.floor((cy + r) / s),
    )
    if cand.size == 0:
        return set()
    d = _dist(index.points.coords, cand, cx, cy)
    return set(int(i) for i in cand[d <= r])


def nearest_k(index: SpatialIndex, q, k: int, exclude: Optional[int] = None) -> list[int]:
    """The ``k`` ids closest to ``q``, nearest first, ties by ascending id.

    Rings of cells around ``q``'s cell are added until the k-th candidate is
    strictly closer than any unexamined cell can be.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k!r}")
    bounds = index._bounds()
    if bounds is None:
        return []
    (bi0, bj0), (bi1, bj1) = bounds
    qx, qy = float(q[0]), float(q[1])
    ci, cj = index.cell_of(qx, qy)
    xy = index.points.coords
    s = index.cell_size
    ring = 0
    while True:
        cand = index._gather(ci - ring, ci + ring, cj - ring, cj + ring)
        if exclude is not None:
            cand = cand[cand != exclude]
        covers_all = ci - ring <= bi0 and ci + ring >= bi1 and cj - ring <= bj0 and cj + ring >= bj1
        if cand.size >= k or covers_all:
            d = _dist(xy, cand, qx, qy)
            order = np.lexsort((cand, d))
            if covers_all or d[order[k - 1]] < ring * s:
                return [int(i) for i in cand[order[:k]]]
        ring += 1
