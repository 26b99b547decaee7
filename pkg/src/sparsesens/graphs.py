"""Base interconnection graphs UDG(2, lambda) and NN(2, k)."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.spatial import cKDTree

from .geometry import PointSet


@dataclass(frozen=True, eq=False)
class AdjGraph:
    """Undirected simple graph in CSR form; row ``u`` lists neighbours ascending."""

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    edge_kind: str  # "UDG" | "KNN" | "SUBNET"
    param: float
    coords: Optional[np.ndarray] = None

    @classmethod
    def from_edges(cls, n: int, edges, edge_kind: str, param: float = 0.0, coords=None) -> "AdjGraph":
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        e = e[e[:, 0] != e[:, 1]]
        both = np.concatenate([e, e[:, ::-1]])
        if both.size:
            key = np.unique(both[:, 0] * max(n, 1) + both[:, 1])
            src, dst = key // max(n, 1), key % max(n, 1)
        else:
            src = dst = np.empty(0, dtype=np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        for a in (indptr, dst):
            a.setflags(write=False)
        return cls(n, indptr, dst, edge_kind, param, coords)

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        i = np.searchsorted(row, v)
        return bool(i < row.size and row[i] == v)

    def has_edges(self, pairs) -> np.ndarray:
        """Vectorised ``has_edge`` over an ``(m, 2)`` array of pairs."""
        p = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        keys = self._edge_keys
        if keys.size == 0:
            return np.zeros(len(p), dtype=bool)
        q = p[:, 0] * self.n + p[:, 1]
        i = np.minimum(np.searchsorted(keys, q), keys.size - 1)
        return keys[i] == q

    @cached_property
    def _edge_keys(self) -> np.ndarray:
        rows = np.repeat(np.arange(self.n, dtype=np.int64), self.degree())
        return rows * self.n + self.indices

    def edges(self) -> np.ndarray:
        """``(m, 2)`` array of edges with ``u < v``, lexicographically sorted."""
        rows = np.repeat(np.arange(self.n, dtype=np.int64), self.degree())
        keep = rows < self.indices
        return np.column_stack([rows[keep], self.indices[keep]])

    @property
    def n_edges(self) -> int:
        return int(self.indices.size // 2)

    def to_csr(self, weighted: bool = False) -> sparse.csr_matrix:
        if weighted:
            if self.coords is None:
                raise ValueError("weighted distances need node coordinates")
            rows = np.repeat(np.arange(self.n), self.degree())
            d = self.coords[rows] - self.coords[self.indices]
            data = np.hypot(d[:, 0], d[:, 1])
        else:
            data = np.ones(self.indices.size)
        return sparse.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def write_edge_list(self, path) -> None:
        with open(path, "w") as fh:
            for u, v in self.edges():
                fh.write(f"{u} {v}\n")


def _udg_pairs(xy: np.ndarray, radius: float = 1.0) -> np.ndarray:
    if len(xy) < 2:
        return np.empty((0, 2), dtype=np.int64)
    # tree only proposes candidates; the closed rule dx^2 + dy^2 <= r^2 decides
    pairs = cKDTree(xy).query_pairs(radius * (1 + 1e-9) + 1e-12, output_type="ndarray")
    if pairs.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    d = xy[pairs[:, 0]] - xy[pairs[:, 1]]
    keep = d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1] <= radius * radius
    return pairs[keep].astype(np.int64)


def build_udg(points: PointSet, radius: float = 1.0) -> AdjGraph:
    """Unit disk graph: ``u ~ v`` iff ``|u - v| <= radius`` (default 1)."""
    return AdjGraph.from_edges(points.n, _udg_pairs(points.coords, radius), "UDG", radius, points.coords)


def knn_lists(xy: np.ndarray, k: int) -> np.ndarray:
    """``(n, min(k, n-1))`` array of each point's nearest others, ties by id."""
    n = len(xy)
    kk = min(k, n - 1)
    if kk <= 0:
        return np.empty((n, 0), dtype=np.int64)
    m = min(kk + 2, n)
    dist, idx = cKDTree(xy).query(xy, k=m)
    dist = np.atleast_2d(dist)
    idx = np.atleast_2d(idx)
    # recompute with the same formula as the brute-force definition, then order by (dist, id)
    d = np.hypot(xy[idx, 0] - xy[:, None, 0], xy[idx, 1] - xy[:, None, 1])
    d[idx == np.arange(n)[:, None]] = np.inf
    order = np.lexsort((idx, d), axis=1)
    idx_s = np.take_along_axis(idx, order, axis=1)
    d_s = np.take_along_axis(d, order, axis=1)
    out = idx_s[:, :kk].copy()
    # a tie at the cut may reach past the fetched candidates; resolve those rows exactly
    # (the self entry sorts last as inf, so compare against the farthest real candidate)
    far = np.where(np.isinf(d_s[:, -1]), d_s[:, -2], d_s[:, -1])
    suspect = np.flatnonzero(d_s[:, kk - 1] >= far) if m < n else np.empty(0, int)
    for u in suspect:
        dd = np.hypot(xy[:, 0] - xy[u, 0], xy[:, 1] - xy[u, 1])
        dd[u] = np.inf
        out[u] = np.lexsort((np.arange(n), dd))[:kk]
    return out.astype(np.int64)


def build_knn(points: PointSet, k: int) -> AdjGraph:
    """Undirected k-nearest-neighbour graph: ``u ~ v`` if either is among the other's k nearest."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k!r}")
    n = points.n
    if n < 2:
        warnings.warn("fewer than two points: k-NN graph is empty", stacklevel=2)
        return AdjGraph.from_edges(n, [], "KNN", k, points.coords)
    nbrs = knn_lists(points.coords, k)
    src = np.repeat(np.arange(n, dtype=np.int64), nbrs.shape[1])
    return AdjGraph.from_edges(n, np.column_stack([src, nbrs.ravel()]), "KNN", k, points.coords)


def connected_components(g: AdjGraph):
    """Component labels, sizes and the id of the largest component.

    Components are numbered in order of their smallest node id; the largest
    component wins ties by that same order.
    """
    if g.n == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64), -1
    _, raw = csgraph.connected_components(g.to_csr(), directed=False)
    _, first = np.unique(raw, return_index=True)
    remap = np.empty_like(first)
    remap[np.argsort(first, kind="stable")] = np.arange(first.size)
    labels = remap[raw].astype(np.int64)
    sizes = np.bincount(labels)
    return labels, sizes, int(np.argmax(sizes))


def graph_distance(g: AdjGraph, u: int, v: int, weighted: bool = False) -> float:
    """Shortest-path length from ``u`` to ``v``; ``math.inf`` if unreachable.

    Unweighted distances count hops, weighted ones sum Euclidean edge lengths.
    """
    for x in (u, v):
        if not (0 <= x < g.n):
            raise ValueError(f"node id {x} out of range 0..{g.n - 1}")
    if u == v:
        return 0.0
    d = single_source_distances(g, u, weighted)
    return float(d[v])


def single_source_distances(g: AdjGraph, source, weighted: bool = False) -> np.ndarray:
    return csgraph.dijkstra(g.to_csr(weighted), directed=False, indices=source, unweighted=not weighted)
