"""Tiling of the plane and classification of points into tile regions.

UDG tiles (side 4/3) carry a representative disk ``C0`` of radius ``r0``
and four relay regions ``E_d``: the points of the tile at distance in
``(r0, 1 - r0]`` from the centre and within 1/2 of the midpoint of the
edge shared with the ``d`` neighbour. Any ``C0`` point is then within 1 of
any ``E_d`` point of the same tile, and ``E_r(t)`` is within 1 of
``E_l(t_r)``.

NN tiles (side ``10a``) carry five disks of radius ``a`` and four lenses.
The lens ``E_r`` is the set of points ``p`` with ``|p - y| <= rmax(y)`` for
every ``y`` in ``C0 ∪ C_r``, where ``rmax(y)`` is the radius of the largest
disk about ``y`` inside the two-tile rectangle ``t ∪ t_r``.  Since
``|p - y|`` is convex in ``y`` and ``rmax`` is a minimum of affine
functions, ``|p - y| - rmax(y)`` is convex and its maximum over each disk
sits on the boundary circle, which is what ``nn_lens_contains`` samples.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class TileId(NamedTuple):
    i: int
    j: int

    def step(self, direction: str) -> "TileId":
        di, dj = DIRECTIONS[direction]
        return TileId(self.i + di, self.j + dj)


class Region(enum.IntEnum):
    C0 = 0
    EL = 1
    ER = 2
    ET = 3
    EB = 4
    CL = 5
    CR = 6
    CT = 7
    CB = 8


DIRECTIONS = {"r": (1, 0), "t": (0, 1), "l": (-1, 0), "b": (0, -1)}
OPPOSITE = {"r": "l", "l": "r", "t": "b", "b": "t"}
E_REGION = {"l": Region.EL, "r": Region.ER, "t": Region.ET, "b": Region.EB}
C_REGION = {"l": Region.CL, "r": Region.CR, "t": Region.CT, "b": Region.CB}
UDG_REGIONS = (Region.C0, Region.EL, Region.ER, Region.ET, Region.EB)
NN_REGIONS = tuple(Region)

UDG_SIDE = 4.0 / 3.0
NN_A = 0.893


@dataclass(frozen=True)
class TileGeom:
    kind: str
    side: float
    r0: float = 0.25
    a: float = NN_A
    lens_samples: int = 720
    lens_eps: float = 1e-9

    def __post_init__(self):
        if self.kind not in ("UDG", "NN"):
            raise ValueError(f"unknown tile kind {self.kind!r}")
        if not self.side > 0:
            raise ValueError("tile side must be > 0")
        if self.kind == "UDG" and not (0 < self.r0 <= 1.0 / 3.0):
            raise ValueError("r0 must lie in (0, 1/3]")
        if self.kind == "NN" and (self.lens_samples < 8 or self.lens_samples % 8):
            raise ValueError("lens_samples must be a positive multiple of 8")

    @classmethod
    def udg(cls, r0: float = 0.25) -> "TileGeom":
        return cls("UDG", UDG_SIDE, r0=r0)

    @classmethod
    def nn(cls, a: float = NN_A, lens_samples: int = 720) -> "TileGeom":
        return cls("NN", 10.0 * a, a=a, lens_samples=lens_samples, lens_eps=1e-9 * a)

    @property
    def regions(self) -> tuple:
        return UDG_REGIONS if self.kind == "UDG" else NN_REGIONS

    def center(self, t) -> np.ndarray:
        return np.array([t[0] * self.side, t[1] * self.side])

    def tile_rect(self, t) -> tuple[float, float, float, float]:
        cx, cy = self.center(t)
        h = self.side / 2
        return (cx - h, cy - h, cx + h, cy + h)


def tile_indices(xy: np.ndarray, side: float) -> np.ndarray:
    """Vectorised ``tile_of``: ``(n, 2)`` integer tile coordinates."""
    xy = np.asarray(xy, dtype=float).reshape(-1, 2)
    return np.floor((xy + side / 2) / side).astype(np.int64)


def tile_of(p, geom: TileGeom) -> TileId:
    s = geom.side
    return TileId(math.floor((p[0] + s / 2) / s), math.floor((p[1] + s / 2) / s))


def to_right_frame(rel: np.ndarray, direction: str) -> np.ndarray:
    """Rotate tile-relative coordinates so that ``direction`` points along +x."""
    x, y = rel[..., 0], rel[..., 1]
    if direction == "r":
        out = (x, y)
    elif direction == "t":
        out = (y, -x)
    elif direction == "l":
        out = (-x, -y)
    elif direction == "b":
        out = (-y, x)
    else:
        raise ValueError(f"invalid direction {direction!r}")
    return np.stack(out, axis=-1)


def inscribed_radius(y, rect) -> float:
    """Distance from ``y`` to the nearest side of ``rect = (x0, y0, x1, y1)``."""
    x0, y0, x1, y1 = rect
    px, py = float(y[0]), float(y[1])
    r = min(px - x0, x1 - px, py - y0, y1 - py)
    if r < 0:
        warnings.warn("point lies outside the rectangle; inscribed radius is 0", stacklevel=2)
        return 0.0
    return r


# --- UDG ------------------------------------------------------------------

def udg_region_masks(rel: np.ndarray, geom: TileGeom) -> np.ndarray:
    """``(n, 9)`` region flags for points given relative to their tile centre."""
    rel = np.asarray(rel, dtype=float).reshape(-1, 2)
    out = np.zeros((len(rel), len(Region)), dtype=bool)
    d = np.hypot(rel[:, 0], rel[:, 1])
    out[:, Region.C0] = d <= geom.r0
    ring = (d > geom.r0) & (d <= 1.0 - geom.r0)
    h = geom.side / 2
    for name, (dx, dy) in DIRECTIONS.items():
        dm = np.hypot(rel[:, 0] - dx * h, rel[:, 1] - dy * h)
        out[:, E_REGION[name]] = ring & (dm <= 0.5)
    return out


def _in_tile(p, t, geom) -> bool:
    # closed rectangle: a point on a shared edge may be labelled against either tile
    x0, y0, x1, y1 = geom.tile_rect(t)
    tol = 1e-12 * geom.side
    return x0 - tol <= p[0] <= x1 + tol and y0 - tol <= p[1] <= y1 + tol


def udg_region_of(p, t, geom: TileGeom) -> frozenset:
    if not _in_tile(p, t, geom):
        raise ValueError(f"point {tuple(p)} is not in tile {tuple(t)}")
    rel = np.asarray(p, dtype=float) - geom.center(t)
    row = udg_region_masks(rel, geom)[0]
    return frozenset(Region(i) for i in np.flatnonzero(row))


# --- NN -------------------------------------------------------------------

def _lens_boundary(geom: TileGeom):
    """Boundary samples of ``C0`` and ``C_r`` and their ``rmax`` in the right frame."""
    a, h, s = geom.a, geom.side / 2, geom.side
    th = 2 * np.pi * np.arange(geom.lens_samples) / geom.lens_samples
    ring = np.column_stack([a * np.cos(th), a * np.sin(th)])
    ys = np.concatenate([ring, ring + [4 * a, 0.0]])
    rect = (-h, -h, h + s, h)
    rmax = np.minimum.reduce([ys[:, 0] - rect[0], rect[2] - ys[:, 0], ys[:, 1] - rect[1], rect[3] - ys[:, 1]])
    return ys, rmax


def lens_mask_right(rel_right: np.ndarray, geom: TileGeom, chunk: int = 4096) -> np.ndarray:
    """Lens membership for points already rotated into the right frame."""
    rel_right = np.asarray(rel_right, dtype=float).reshape(-1, 2)
    ys, rmax = _lens_boundary(geom)
    coarse = slice(None, None, geom.lens_samples // 8)
    ok = np.ones(len(rel_right), dtype=bool)
    # necessary condition on a coarse subset of the samples first
    for lo in range(0, len(rel_right), chunk):
        p = rel_right[lo:lo + chunk]
        d = np.hypot(p[:, None, 0] - ys[None, coarse, 0], p[:, None, 1] - ys[None, coarse, 1])
        ok[lo:lo + chunk] = np.all(d - rmax[coarse] <= -geom.lens_eps, axis=1)
    idx = np.flatnonzero(ok)
    for lo in range(0, idx.size, chunk // 4):
        sub = idx[lo:lo + chunk // 4]
        p = rel_right[sub]
        d = np.hypot(p[:, None, 0] - ys[None, :, 0], p[:, None, 1] - ys[None, :, 1])
        ok[sub] = np.max(d - rmax, axis=1) <= -geom.lens_eps
    return ok


def nn_disk_masks(rel: np.ndarray, geom: TileGeom) -> np.ndarray:
    rel = np.asarray(rel, dtype=float).reshape(-1, 2)
    out = np.zeros((len(rel), len(Region)), dtype=bool)
    a = geom.a
    out[:, Region.C0] = np.hypot(rel[:, 0], rel[:, 1]) <= a
    for name, (dx, dy) in DIRECTIONS.items():
        out[:, C_REGION[name]] = np.hypot(rel[:, 0] - 4 * a * dx, rel[:, 1] - 4 * a * dy) <= a
    return out


def nn_region_masks(rel: np.ndarray, geom: TileGeom) -> np.ndarray:
    """``(n, 9)`` region flags for NN tiles.

    Lens points that fall inside one of the five disks are given the disk's
    label only, so an elected representative or disk relay is never also a
    lens relay.
    """
    out = nn_disk_masks(rel, geom)
    in_disk = out.any(axis=1)
    rel = np.asarray(rel, dtype=float).reshape(-1, 2)
    cand = np.flatnonzero(~in_disk)
    for name in DIRECTIONS:
        if cand.size:
            out[cand, E_REGION[name]] = lens_mask_right(to_right_frame(rel[cand], name), geom)
    return out


def nn_lens_contains(p, t, direction: str, geom: TileGeom) -> bool:
    if direction not in DIRECTIONS:
        raise ValueError(f"invalid direction {direction!r}")
    t = TileId(*t)
    if not (_in_tile(p, t, geom) or _in_tile(p, t.step(direction), geom)):
        raise ValueError(f"point {tuple(p)} is in neither tile {t} nor its {direction!r} neighbour")
    rel = np.asarray(p, dtype=float) - geom.center(t)
    return bool(lens_mask_right(to_right_frame(rel[None, :], direction), geom)[0])


def nn_region_of(p, t, geom: TileGeom) -> frozenset:
    if not _in_tile(p, t, geom):
        raise ValueError(f"point {tuple(p)} is not in tile {tuple(t)}")
    rel = np.asarray(p, dtype=float) - geom.center(t)
    row = nn_region_masks(rel[None, :], geom)[0]
    return frozenset(Region(i) for i in np.flatnonzero(row))


def region_masks(rel: np.ndarray, geom: TileGeom) -> np.ndarray:
    if geom.kind == "UDG":
        return udg_region_masks(rel, geom)
    return nn_region_masks(rel, geom)


def region_of(p, t, geom: TileGeom) -> frozenset:
    return udg_region_of(p, t, geom) if geom.kind == "UDG" else nn_region_of(p, t, geom)


def region_raster(geom: TileGeom, resolution: int, t=(0, 0)):
    """Sample a ``resolution x resolution`` grid of cell centres over tile ``t``.

    Returns ``(xy, masks)`` with ``masks`` as produced by ``region_masks``.
    """
    x0, y0, x1, y1 = geom.tile_rect(t)
    step = (x1 - x0) / resolution
    g = (np.arange(resolution) + 0.5) * step
    gx, gy = np.meshgrid(x0 + g, y0 + g)
    xy = np.column_stack([gx.ravel(), gy.ravel()])
    return xy, region_masks(xy - geom.center(t), geom)


def write_region_raster(path, geom: TileGeom, resolution: int = 64, t=(0, 0)) -> None:
    """CSV with columns ``x,y,labels``; labels are ``|``-joined region names."""
    xy, masks = region_raster(geom, resolution, t)
    with open(path, "w") as fh:
        fh.write("x,y,labels\n")
        for (x, y), row in zip(xy, masks):
            labels = "|".join(Region(i).name for i in np.flatnonzero(row))
            fh.write(f"{x:.17g},{y:.17g},{labels}\n")


def lens_relative_to(t: TileId, direction: str) -> TileId:
    """The tile whose ``direction`` neighbour is ``t``."""
    return t.step(OPPOSITE[direction])


def neighbour_lens_masks(rel_to_owner: np.ndarray, direction: str, geom: TileGeom) -> np.ndarray:
    """Lens flags for points of ``t_d`` tested against ``E_d(t)``.

    ``rel_to_owner`` is relative to the centre of ``t``.  Points inside one of
    ``t``'s disks cannot occur here, since the disks lie within ``t``.
    """
    return lens_mask_right(to_right_frame(np.asarray(rel_to_owner, float).reshape(-1, 2), direction), geom)

