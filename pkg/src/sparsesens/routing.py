"""x-y routing on the coupled lattice with BFS detours, and node-level expansion."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

from .lattice import FOUR_NEIGHBOURS, LatticeWindow
from .subnet import SubnetGraph
from .tiling import C_REGION, E_REGION, OPPOSITE, TileId

DELIVERED = "Delivered"
UNREACHABLE = "Unreachable"


class Unreachable(Exception):
    """BFS exhausted the current cluster without reaching the x-y path."""

    def __init__(self, probes: int):
        super().__init__(f"destination unreachable after {probes} probes")
        self.probes = probes


class RouteIntegrityError(RuntimeError):
    pass


@dataclass
class RouteTrace:
    src: TileId
    dst: TileId
    lattice_hops: list = field(default_factory=list)  # sites visited, src first
    node_hops: list = field(default_factory=list)
    probes: int = 0
    bfs_invocations: int = 0
    outcome: str = DELIVERED

    @property
    def hop_count(self) -> int:
        return max(len(self.lattice_hops) - 1, 0)

    def to_dict(self) -> dict:
        return {
            "src": list(self.src),
            "dst": list(self.dst),
            "outcome": self.outcome,
            "lattice_hops": [list(t) for t in self.lattice_hops],
            "node_hops": [int(v) for v in self.node_hops],
            "probes": self.probes,
            "bfs_invocations": self.bfs_invocations,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _sign(x: int) -> int:
    return (x > 0) - (x < 0)


def compute_next(curr, dest) -> TileId:
    """Next site on the x-y path: fix ``i`` first, then ``j``."""
    if tuple(curr) == tuple(dest):
        raise ValueError("already at the destination")
    if curr[0] != dest[0]:
        return TileId(curr[0] + _sign(dest[0] - curr[0]), curr[1])
    return TileId(curr[0], curr[1] + _sign(dest[1] - curr[1]))


def on_xy_path(site, start, dest) -> bool:
    """Whether ``site`` lies on the x-y path from ``start`` to ``dest``."""
    (i, j), (i0, j0), (i1, j1) = site, start, dest
    if j == j0 and min(i0, i1) <= i <= max(i0, i1):
        return True
    return i == i1 and min(j0, j1) <= j <= max(j0, j1)


def dist_bfs(lat: LatticeWindow, curr, dest):
    """BFS over open sites from ``curr`` until a site of the x-y path is dequeued.

    Neighbours are expanded in lexicographic order; every distinct site whose
    status is examined costs one probe.  Returns ``(v, probes, path)`` with
    ``path`` running from ``curr`` to ``v``; raises :class:`Unreachable` if
    the cluster is exhausted first.
    """
    curr, dest = TileId(*map(int, curr)), TileId(*map(int, dest))
    if not lat.is_open(curr):
        raise ValueError(f"BFS start {curr} is not open")
    parent = {curr: None}
    probed = set()
    q = deque([curr])
    while q:
        u = q.popleft()
        if u != curr and on_xy_path(u, curr, dest):
            path = [u]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return u, len(probed), path[::-1]
        for di, dj in sorted(FOUR_NEIGHBOURS):
            w = TileId(u.i + di, u.j + dj)
            if w in probed or w == curr or not lat.inside(w):
                continue
            probed.add(w)
            if lat.is_open(w):
                parent[w] = u
                q.append(w)
    raise Unreachable(len(probed))


def route(lat: LatticeWindow, src, dst) -> RouteTrace:
    """Route from ``src`` to ``dst``: follow the x-y path, detour by BFS when blocked."""
    src, dst = TileId(*map(int, src)), TileId(*map(int, dst))
    for t in (src, dst):
        if not lat.is_open(t):
            raise ValueError(f"endpoint {t} is closed or outside the window")
    trace = RouteTrace(src, dst, [src])
    curr = src
    while curr != dst:
        nxt = compute_next(curr, dst)
        trace.probes += 1
        if lat.is_open(nxt):
            trace.lattice_hops.append(nxt)
            curr = nxt
            continue
        trace.bfs_invocations += 1
        try:
            v, probes, path = dist_bfs(lat, curr, dst)
        except Unreachable as exc:
            trace.probes += exc.probes
            trace.outcome = UNREACHABLE
            return trace
        trace.probes += probes
        trace.lattice_hops.extend(path[1:])
        curr = v
    return trace


def hop_chain(subnet: SubnetGraph, t: TileId, nb: TileId) -> list:
    """Node chain realising the lattice edge ``t -> nb`` (reps at both ends)."""
    d = {(1, 0): "r", (-1, 0): "l", (0, 1): "t", (0, -1): "b"}.get((nb.i - t.i, nb.j - t.j))
    if d is None:
        raise RouteIntegrityError(f"tiles {t} and {nb} are not adjacent")
    a, b = subnet.statuses.get(t), subnet.statuses.get(nb)
    if a is None or b is None or not (a.good and b.good):
        raise RouteIntegrityError(f"hop {t} -> {nb} uses a tile that is not good")
    o = OPPOSITE[d]
    if subnet.kind == "UDG":
        return [a.rep, a.relays[E_REGION[d]], b.relays[E_REGION[o]], b.rep]
    return [a.rep, a.relays[E_REGION[d]], a.relays[C_REGION[d]],
            b.relays[C_REGION[o]], b.relays[E_REGION[o]], b.rep]


def expand_route(lattice_path, subnet: SubnetGraph) -> list:
    """Node path from ``rep(t_0)`` to ``rep(t_end)`` mimicking the lattice path."""
    path = [TileId(*t) for t in lattice_path]
    if not path:
        return []
    first = subnet.rep(path[0])
    if first is None:
        raise RouteIntegrityError(f"tile {path[0]} is not good")
    nodes = [first]
    edges = {(int(u), int(v)) for u, v in subnet.edges}
    for t, nb in zip(path, path[1:]):
        chain = hop_chain(subnet, t, nb)
        for u, v in zip(chain, chain[1:]):
            if (min(u, v), max(u, v)) not in edges:
                raise RouteIntegrityError(f"missing subnet edge {u}-{v} on hop {t} -> {nb}")
        nodes.extend(chain[1:])
    return nodes
