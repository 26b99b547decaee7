"""Slow, independent reference implementations used as test oracles.

Nothing here imports the package's algorithms; only plain numpy and Python.
"""

from __future__ import annotations

from collections import deque

import numpy as np


def brute_udg_edges(xy, r=1.0) -> set:
    n = len(xy)
    out = set()
    for u in range(n):
        for v in range(u + 1, n):
            dx, dy = xy[u, 0] - xy[v, 0], xy[u, 1] - xy[v, 1]
            if dx * dx + dy * dy <= r * r:
                out.add((u, v))
    return out


def brute_udg_edges_np(xy, r=1.0) -> set:
    d = ((xy[:, None, :] - xy[None, :, :]) ** 2).sum(-1)
    u, v = np.nonzero(np.triu(d <= r * r, 1))
    return set(zip(u.tolist(), v.tolist()))


def brute_knn_lists(xy, k) -> list:
    n = len(xy)
    out = []
    for u in range(n):
        d = [(float(np.hypot(xy[v, 0] - xy[u, 0], xy[v, 1] - xy[u, 1])), v) for v in range(n) if v != u]
        d.sort()
        out.append([v for _, v in d[:k]])
    return out


def brute_knn_edges(xy, k) -> set:
    out = set()
    for u, nb in enumerate(brute_knn_lists(xy, k)):
        for v in nb:
            out.add((min(u, v), max(u, v)))
    return out


def brute_range(xy, c, r) -> set:
    return {i for i in range(len(xy)) if (xy[i, 0] - c[0]) ** 2 + (xy[i, 1] - c[1]) ** 2 <= r * r}


def brute_nearest(xy, q, k, exclude=None) -> list:
    d = [(float(np.hypot(xy[i, 0] - q[0], xy[i, 1] - q[1])), i) for i in range(len(xy)) if i != exclude]
    d.sort()
    return [i for _, i in d[:k]]


def bfs_components(n, edges) -> list:
    """List of sets of nodes, by repeated BFS."""
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = [False] * n
    comps = []
    for s in range(n):
        if seen[s]:
            continue
        comp, q = {s}, deque([s])
        seen[s] = True
        while q:
            u = q.popleft()
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    comp.add(w)
                    q.append(w)
        comps.append(comp)
    return comps


def quadratic_shortest_path(n, weighted_edges, src) -> list:
    """Array-scan Dijkstra, O(n^2)."""
    w = {}
    for u, v, c in weighted_edges:
        w.setdefault(u, []).append((v, c))
        w.setdefault(v, []).append((u, c))
    dist = [float("inf")] * n
    done = [False] * n
    dist[src] = 0.0
    for _ in range(n):
        best, u = float("inf"), -1
        for i in range(n):
            if not done[i] and dist[i] < best:
                best, u = dist[i], i
        if u < 0:
            break
        done[u] = True
        for v, c in w.get(u, []):
            if dist[u] + c < dist[v]:
                dist[v] = dist[u] + c
    return dist


def flood_fill(open_arr):
    """Cluster label array (0 = closed) by explicit stack flood fill, and spanning flag."""
    a = np.asarray(open_arr, bool)
    lab = np.zeros(a.shape, dtype=np.int64)
    nxt = 0
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            if a[i, j] and lab[i, j] == 0:
                nxt += 1
                stack = [(i, j)]
                lab[i, j] = nxt
                while stack:
                    x, y = stack.pop()
                    for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                        u, v = x + dx, y + dy
                        if 0 <= u < a.shape[0] and 0 <= v < a.shape[1] and a[u, v] and lab[u, v] == 0:
                            lab[u, v] = nxt
                            stack.append((u, v))
    span = bool(set(lab[0, :].tolist()) & set(lab[-1, :].tolist()) - {0})
    return lab, span


def same_partition(lab_a, lab_b) -> bool:
    """Two label arrays describe the same partition of the open sites."""
    pairs = set(zip(lab_a.ravel().tolist(), lab_b.ravel().tolist()))
    fa = {}
    fb = {}
    for x, y in pairs:
        if fa.setdefault(x, y) != y or fb.setdefault(y, x) != x:
            return False
    return True


def lattice_bfs(open_arr, a, b) -> float:
    a, b = tuple(a), tuple(b)
    arr = np.asarray(open_arr, bool)
    if not (arr[a] and arr[b]):
        return float("inf")
    dist = {a: 0}
    q = deque([a])
    while q:
        u = q.popleft()
        if u == b:
            return dist[u]
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            w = (u[0] + dx, u[1] + dy)
            if 0 <= w[0] < arr.shape[0] and 0 <= w[1] < arr.shape[1] and arr[w] and w not in dist:
                dist[w] = dist[u] + 1
                q.append(w)
    return float("inf")


def lens_oracle(p, a, rings=60, per_ring=360) -> bool:
    """Area sampling of ``C0 u C_r`` (centres 0 and 4a, radius a) on a polar grid.

    ``p`` is relative to the tile centre in the right-hand frame.  The tile
    pair spans ``[-5a, 15a] x [-5a, 5a]``.  Every sample ``y`` must satisfy
    ``|p - y| <= dist(y, boundary of the rectangle)``.
    """
    rad = np.linspace(0.0, a, rings)
    ang = np.linspace(0.0, 2 * np.pi, per_ring, endpoint=False)
    rr, tt = np.meshgrid(rad, ang)
    base = np.column_stack([(rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel()])
    for cx in (0.0, 4 * a):
        y = base + np.array([cx, 0.0])
        rmax = np.minimum.reduce([y[:, 0] + 5 * a, 15 * a - y[:, 0], y[:, 1] + 5 * a, 5 * a - y[:, 1]])
        d = np.hypot(p[0] - y[:, 0], p[1] - y[:, 1])
        if np.any(d > rmax):
            return False
    return True


def brute_knn_edges_np(xy, k) -> set:
    """Full distance matrix; a stable sort keeps ascending ids among equal distances."""
    n = len(xy)
    d = np.hypot(xy[:, None, 0] - xy[None, :, 0], xy[:, None, 1] - xy[None, :, 1])
    d[np.arange(n), np.arange(n)] = np.inf
    nb = np.argsort(d, axis=1, kind="stable")[:, :min(k, n - 1)]
    u = np.repeat(np.arange(n), nb.shape[1])
    v = nb.ravel()
    return set(zip(np.minimum(u, v).tolist(), np.maximum(u, v).tolist()))
