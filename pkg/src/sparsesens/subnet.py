"""Good-tile classification, leader election and wiring of UDG-SENS / NN-SENS."""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .geometry import PointSet, Window
from .graphs import AdjGraph, connected_components
from .tiling import (
    C_REGION,
    DIRECTIONS,
    E_REGION,
    OPPOSITE,
    Region,
    TileGeom,
    TileId,
    neighbour_lens_masks,
    region_masks,
    tile_indices,
)


class Role(str, enum.Enum):
    REPRESENTATIVE = "Representative"
    RELAY = "Relay"
    BOTH = "Both"  # one node elected for two relay regions


@dataclass
class TileStatus:
    tile: TileId
    good: bool
    region_members: dict
    point_count: int
    rep: Optional[int] = None
    relays: dict = field(default_factory=dict)
    anomaly: Optional[str] = None

    def relay(self, region: Region) -> int:
        return self.relays[region]


class ClassificationError(ValueError):
    pass


def analysis_tiles(window: Window, geom: TileGeom) -> list[TileId]:
    """Tiles lying wholly inside the unpadded window, in (i, j) order."""
    s, h = geom.side, geom.side / 2
    eps = 1e-9 * s
    i0 = int(np.ceil((window.x_min + h - eps) / s))
    i1 = int(np.floor((window.x_max - h + eps) / s))
    j0 = int(np.ceil((window.y_min + h - eps) / s))
    j1 = int(np.floor((window.y_max - h + eps) / s))
    return [TileId(i, j) for i in range(i0, i1 + 1) for j in range(j0, j1 + 1)]


def tile_window(geom: TileGeom, nx: int, ny: Optional[int] = None, margin_tiles: float = 2.0) -> Window:
    """Window covering tiles ``(0..nx-1, 0..ny-1)`` exactly, with a margin."""
    ny = nx if ny is None else ny
    s, h = geom.side, geom.side / 2
    return Window(-h, -h, nx * s - h, ny * s - h, margin_tiles * s)


def _tile_covered(window: Window, geom: TileGeom, t) -> bool:
    x0, y0, x1, y1 = geom.tile_rect(t)
    px0, py0, px1, py1 = window.padded
    eps = 1e-9 * geom.side
    return x0 >= px0 - eps and y0 >= py0 - eps and x1 <= px1 + eps and y1 <= py1 + eps


def _good(geom: TileGeom, members: dict, count: int, k: Optional[int]) -> bool:
    if any(len(members[r]) == 0 for r in geom.regions):
        return False
    if geom.kind == "NN":
        return 2 * count <= k
    return True


def classify_tiles(points: PointSet, geom: TileGeom, k: Optional[int] = None,
                   tiles: Optional[Iterable] = None) -> dict:
    """Classify many tiles at once; returns ``{TileId: TileStatus}``."""
    if geom.kind == "NN" and k is None:
        raise ValueError("NN classification needs k")
    tiles = analysis_tiles(points.window, geom) if tiles is None else [TileId(*t) for t in tiles]
    if geom.kind == "NN":
        for t in tiles:
            for d in DIRECTIONS:
                if not _tile_covered(points.window, geom, t.step(d)):
                    raise ClassificationError(f"no point data for the {d!r} neighbour of tile {t}")
    wanted = set(tiles)
    xy = points.coords
    tix = tile_indices(xy, geom.side)
    keys = [TileId(int(i), int(j)) for i, j in tix]
    own = np.array([kk in wanted for kk in keys], dtype=bool)
    sel = np.flatnonzero(own)
    rel = xy[sel] - tix[sel] * geom.side
    masks = region_masks(rel, geom)
    members = {t: {r: [] for r in geom.regions} for t in tiles}
    counts = {t: 0 for t in tiles}
    for row, pid in zip(masks, sel):
        t = keys[pid]
        counts[t] += 1
        for r in np.flatnonzero(row):
            members[t][Region(r)].append(int(pid))
    if geom.kind == "NN":
        # lens E_d(t) is defined over t and t_d; test points of t_d as well
        for d, (di, dj) in DIRECTIONS.items():
            owner = tix - [di, dj]
            cand = np.flatnonzero([TileId(int(i), int(j)) in wanted for i, j in owner])
            if cand.size == 0:
                continue
            rel_o = xy[cand] - owner[cand] * geom.side
            hit = neighbour_lens_masks(rel_o, d, geom)
            for pid in cand[hit]:
                t = TileId(*map(int, owner[pid]))
                members[t][E_REGION[d]].append(int(pid))
    out = {}
    for t in tiles:
        rm = {r: tuple(sorted(set(v))) for r, v in members[t].items()}
        out[t] = TileStatus(t, _good(geom, rm, counts[t], k), rm, counts[t])
    return out


def classify_tile(t, points: PointSet, geom: TileGeom, k: Optional[int] = None) -> TileStatus:
    return classify_tiles(points, geom, k, [t])[TileId(*t)]


def elect_leader(members, base: Optional[AdjGraph] = None, anomalies: Optional[list] = None) -> int:
    """Deterministic election outcome: the smallest id.

    If ``base`` is given, the members are checked for pairwise adjacency and
    a violation is appended to ``anomalies``.
    """
    members = sorted(int(m) for m in members)
    if not members:
        raise ValueError("cannot elect a leader from an empty set")
    if base is not None and len(members) > 1:
        m = np.array(members)
        iu, ju = np.triu_indices(len(m), 1)
        ok = base.has_edges(np.column_stack([m[iu], m[ju]]))
        if not ok.all() and anomalies is not None:
            anomalies.append(("election", tuple(members)))
    return members[0]


def _wiring(statuses: dict, geom: TileGeom, good: set) -> list:
    """Wired pairs as ``(u, v, tile_u, tile_v)`` for the current good set."""
    pairs = []
    for t in sorted(good):
        st = statuses[t]
        for d in DIRECTIONS:
            nb = t.step(d)
            e = st.relays[E_REGION[d]]
            if geom.kind == "UDG":
                pairs.append((st.rep, e, t, t))
                if d in ("r", "t") and nb in good:
                    pairs.append((e, statuses[nb].relays[E_REGION[OPPOSITE[d]]], t, nb))
            elif nb in good:
                c = st.relays[C_REGION[d]]
                pairs.append((st.rep, e, t, t))
                pairs.append((e, c, t, t))
                if d in ("r", "t"):
                    pairs.append((c, statuses[nb].relays[C_REGION[OPPOSITE[d]]], t, nb))
    return pairs


@dataclass(eq=False)
class SubnetGraph:
    """Wired sensing subnetwork over a subset of the point ids."""

    kind: str
    coords: np.ndarray
    members: np.ndarray
    roles: dict
    edges: np.ndarray
    provenance: dict
    statuses: dict
    anomalies: list

    @property
    def n_points(self) -> int:
        return len(self.coords)

    def adjacency(self) -> dict:
        adj = {int(m): [] for m in self.members}
        for u, v in self.edges:
            adj[int(u)].append(int(v))
            adj[int(v)].append(int(u))
        return {u: sorted(vs) for u, vs in adj.items()}

    def degrees(self) -> dict:
        return {u: len(v) for u, v in self.adjacency().items()}

    def as_graph(self) -> AdjGraph:
        return AdjGraph.from_edges(self.n_points, self.edges, "SUBNET", 0.0, self.coords)

    def rep(self, t) -> Optional[int]:
        st = self.statuses.get(TileId(*t))
        return st.rep if st is not None and st.good else None

    def good_tiles(self) -> list:
        return sorted(t for t, st in self.statuses.items() if st.good)

    def edge_lengths(self) -> np.ndarray:
        if len(self.edges) == 0:
            return np.empty(0)
        d = self.coords[self.edges[:, 0]] - self.coords[self.edges[:, 1]]
        return np.hypot(d[:, 0], d[:, 1])

    def nodes_csv(self) -> str:
        buf = io.StringIO()
        buf.write("id,x,y,role,tile_i,tile_j,regions\n")
        for m in self.members:
            m = int(m)
            t, regs = self.provenance[m]
            x, y = self.coords[m]
            buf.write(f"{m},{x:.17g},{y:.17g},{self.roles[m].value},{t.i},{t.j},{'|'.join(regs)}\n")
        return buf.getvalue()

    def edges_csv(self) -> str:
        buf = io.StringIO()
        buf.write("u,v,length\n")
        for (u, v), ln in zip(self.edges, self.edge_lengths()):
            buf.write(f"{u},{v},{ln:.17g}\n")
        return buf.getvalue()

    def to_bytes(self) -> bytes:
        """Canonical serialisation used for equality checks."""
        return (self.nodes_csv() + "\n" + self.edges_csv()).encode()

    def write_csv(self, nodes_path, edges_path) -> None:
        with open(nodes_path, "w") as fh:
            fh.write(self.nodes_csv())
        with open(edges_path, "w") as fh:
            fh.write(self.edges_csv())


def _elect_all(statuses: dict, geom: TileGeom, base: Optional[AdjGraph], anomalies: list) -> None:
    for t in sorted(statuses):
        st = statuses[t]
        if not st.good:
            continue
        st.rep = elect_leader(st.region_members[Region.C0], base, anomalies)
        st.relays = {r: elect_leader(st.region_members[r], base, anomalies)
                     for r in geom.regions if r != Region.C0}


def assemble_subnet(points: PointSet, geom: TileGeom, statuses: dict, pairs: list, anomalies: list) -> SubnetGraph:
    roles_of: dict = {}
    prov: dict = {}
    for t in sorted(statuses):
        st = statuses[t]
        if not st.good:
            continue
        roles_of.setdefault(st.rep, []).append(Region.C0)
        prov[st.rep] = t
        for r, v in sorted(st.relays.items()):
            roles_of.setdefault(v, []).append(r)
            prov[v] = t
    roles = {}
    provenance = {}
    for v, regs in roles_of.items():
        if Region.C0 in regs:
            roles[v] = Role.REPRESENTATIVE if len(regs) == 1 else Role.BOTH
        else:
            roles[v] = Role.RELAY if len(regs) == 1 else Role.BOTH
        provenance[v] = (prov[v], tuple(r.name for r in sorted(regs)))
    e = {(min(u, v), max(u, v)) for u, v, *_ in pairs if u != v}
    edges = np.array(sorted(e), dtype=np.int64).reshape(-1, 2)
    members = np.array(sorted(roles), dtype=np.int64)
    return SubnetGraph(geom.kind, points.coords, members, roles, edges, provenance, statuses, anomalies)


def construct_subnet(points: PointSet, base: AdjGraph, geom: TileGeom, k: Optional[int] = None,
                     tiles: Optional[Iterable] = None) -> SubnetGraph:
    """Build the sensing subnetwork over the analysis tiles of ``points``.

    Every good tile elects a representative from ``C0`` and one relay per
    relay region (smallest id).  UDG tiles wire the representative to its
    four ``E`` relays and ``E_r(t)`` to ``E_l(t_r)`` (likewise vertically)
    when both tiles are good.  NN tiles wire, towards each good neighbour,
    ``rep - E_d - C_d`` and ``C_r(t) - C_l(t_r)``.  A wired pair that is not
    an edge of ``base`` is an anomaly and demotes the tiles it touches.
    """
    if base.n != points.n:
        raise ValueError("base graph and point set disagree on the node count")
    statuses = classify_tiles(points, geom, k, tiles)
    anomalies: list = []
    _elect_all(statuses, geom, base, anomalies)
    good = {t for t, st in statuses.items() if st.good}
    pairs = _wiring(statuses, geom, good)
    if pairs:
        uv = np.array([(u, v) for u, v, *_ in pairs], dtype=np.int64)
        bad = np.flatnonzero(~base.has_edges(uv))
        for b in bad:
            u, v, tu, tv = pairs[b]
            anomalies.append(("wiring", (int(u), int(v))))
            for t in (tu, tv):
                statuses[t].anomaly = "wiring"
        if bad.size:
            for t, st in statuses.items():
                if st.anomaly == "wiring" and st.good:
                    st.good = False
                    st.rep = None
                    st.relays = {}
            good = {t for t, st in statuses.items() if st.good}
            # removing tiles only removes wires, so no new anomalies can appear
            pairs = _wiring(statuses, geom, good)
    return assemble_subnet(points, geom, statuses, pairs, anomalies)


def largest_component(s: SubnetGraph) -> SubnetGraph:
    """Restriction of ``s`` to its largest component (ties: smallest node id)."""
    if s.members.size == 0:
        return s
    idx = {int(m): i for i, m in enumerate(s.members)}
    local = np.array([[idx[int(u)], idx[int(v)]] for u, v in s.edges], dtype=np.int64).reshape(-1, 2)
    g = AdjGraph.from_edges(len(s.members), local, "SUBNET")
    labels, _, big = connected_components(g)
    keep = s.members[labels == big]
    keep_set = set(int(x) for x in keep)
    emask = np.array([int(u) in keep_set for u, _ in s.edges], dtype=bool) if len(s.edges) else np.zeros(0, bool)
    return SubnetGraph(
        s.kind, s.coords, keep, {m: s.roles[m] for m in keep_set}, s.edges[emask].reshape(-1, 2),
        {m: s.provenance[m] for m in keep_set}, s.statuses, s.anomalies,
    )
