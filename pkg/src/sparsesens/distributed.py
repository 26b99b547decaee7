"""Subnet construction under a locality discipline.

Every node starts from its own coordinates and the tile constants, and from
then on may only read the state of its neighbours in the base graph.  The
reads go through :class:`Auditor`, which raises :class:`LocalityViolation`
on any other access.  The protocol runs in synchronous rounds:

1. hello: each node computes its tile and region labels;
2. census: records of tile members are flooded among nodes of the same
   tile until nothing new arrives, after which each node can evaluate its
   tile's goodness and the min-id leaders;
3. summaries: each tile's (good, leaders) summary is flooded to nodes of
   the tile and of its four neighbours;
4. elected nodes work out their wires and test each partner against their
   own adjacency list; a failed wire flags the node's tile as demoted and
   the flags are flooded like the summaries;
5. elected nodes of tiles that are still good report their final wires.
"""

from __future__ import annotations

from typing import Iterable, Optional

import numpy as np

from .geometry import PointSet
from .graphs import AdjGraph
from .subnet import (
    ClassificationError,
    SubnetGraph,
    TileStatus,
    _good,
    _tile_covered,
    _wiring,
    analysis_tiles,
    assemble_subnet,
)
from .tiling import DIRECTIONS, E_REGION, Region, TileGeom, TileId, neighbour_lens_masks, region_masks


class LocalityViolation(AssertionError):
    pass


class Auditor:
    """Mediates every state read; only a node's base-graph neighbours are readable."""

    def __init__(self, base: AdjGraph):
        self.base = base
        self.reads = 0
        self.violations = 0

    def read(self, reader: int, targets, states: list) -> list:
        targets = np.asarray(targets, dtype=np.int64)
        if targets.size:
            ok = np.isin(targets, self.base.neighbors(reader))
            if not ok.all():
                self.violations += int((~ok).sum())
                raise LocalityViolation(f"node {reader} read non-neighbours {targets[~ok].tolist()}")
        self.reads += int(targets.size)
        return [states[t] for t in targets]


def _flood(auditor: Auditor, readers: list, init: list, relevant: list) -> list:
    """Flood ``{key: set(records)}`` maps until no node learns anything new.

    ``readers[v]`` are the neighbours ``v`` listens to and ``relevant[v]``
    the keys it keeps.
    """
    known = [{k: set(s) for k, s in d.items()} for d in init]
    delta = [{k: set(s) for k, s in d.items()} for d in init]
    while any(delta):
        new = [dict() for _ in known]
        for v, nbrs in enumerate(readers):
            if len(nbrs) == 0:
                continue
            for dw in auditor.read(v, nbrs, delta):
                for key, recs in dw.items():
                    if key not in relevant[v]:
                        continue
                    fresh = recs - known[v].get(key, set())
                    if fresh:
                        new[v].setdefault(key, set()).update(fresh)
        for v, nd in enumerate(new):
            for key, recs in nd.items():
                known[v].setdefault(key, set()).update(recs)
        delta = new
    return known


def _status_from_census(t: TileId, recs, geom: TileGeom, k: Optional[int]) -> TileStatus:
    members = {r: [] for r in geom.regions}
    count = 0
    for pid, mask, in_tile in recs:
        count += in_tile
        for r in geom.regions:
            if mask >> int(r) & 1:
                members[r].append(pid)
    rm = {r: tuple(sorted(v)) for r, v in members.items()}
    st = TileStatus(t, _good(geom, rm, count, k), rm, count)
    if st.good:
        st.rep = rm[Region.C0][0]
        st.relays = {r: rm[r][0] for r in geom.regions if r != Region.C0}
    return st


def construct_subnet_distributed(points: PointSet, base: AdjGraph, geom: TileGeom, k: Optional[int] = None,
                                 tiles: Optional[Iterable] = None, auditor: Optional[Auditor] = None) -> SubnetGraph:
    """Same output as :func:`construct_subnet`, computed from local reads only."""
    if geom.kind == "NN" and k is None:
        raise ValueError("NN construction needs k")
    if base.n != points.n:
        raise ValueError("base graph and point set disagree on the node count")
    auditor = Auditor(base) if auditor is None else auditor
    tiles = analysis_tiles(points.window, geom) if tiles is None else [TileId(*t) for t in tiles]
    if geom.kind == "NN":
        for t in tiles:
            for d in DIRECTIONS:
                if not _tile_covered(points.window, geom, t.step(d)):
                    raise ClassificationError(f"no point data for the {d!r} neighbour of tile {t}")
    analysed = set(tiles)
    n = points.n
    xy = points.coords

    # hello: purely local computation from own coordinates
    own_tile = [TileId(int(i), int(j)) for i, j in np.floor((xy + geom.side / 2) / geom.side).astype(np.int64)]
    rel = xy - np.array(own_tile, dtype=float).reshape(-1, 2) * geom.side
    masks = region_masks(rel, geom) if n else np.zeros((0, 9), bool)
    hello = []
    for v in range(n):
        labels = {}
        if own_tile[v] in analysed:
            labels[own_tile[v]] = (int(np.dot(masks[v], 1 << np.arange(masks.shape[1]))), 1)
        if geom.kind == "NN":
            for d, (di, dj) in DIRECTIONS.items():
                owner = TileId(own_tile[v].i - di, own_tile[v].j - dj)
                if owner in analysed and neighbour_lens_masks(xy[v] - geom.center(owner), d, geom)[0]:
                    labels[owner] = (1 << int(E_REGION[d]), 0)
        hello.append((own_tile[v], labels))

    # each node learns its neighbours' hello state (a read of neighbours only)
    assoc = [set(h[1]) for h in hello]
    same, near = [], []
    for v in range(n):
        nbrs = base.neighbors(v)
        hs = auditor.read(v, nbrs, hello)
        mine = assoc[v]
        same.append(np.array([w for w, h in zip(nbrs, hs) if mine & set(h[1])], dtype=np.int64))
        region = {TileId(t.i + di, t.j + dj) for t in mine for di, dj in [(0, 0), *DIRECTIONS.values()]}
        near.append(np.array([w for w, h in zip(nbrs, hs) if h[0] in region or region & set(h[1])],
                             dtype=np.int64))

    # census
    init = [{t: {(v, mask, in_tile)} for t, (mask, in_tile) in hello[v][1].items()} for v in range(n)]
    census = _flood(auditor, same, init, assoc)
    local_status = []
    memo: dict = {}
    for v in range(n):
        sts = {}
        for t, recs in census[v].items():
            key = (t, frozenset(recs))
            if key not in memo:
                memo[key] = _status_from_census(t, recs, geom, k)
            sts[t] = memo[key]
        local_status.append(sts)

    # summaries of own tiles, flooded to the surrounding tiles
    def summary(st: TileStatus, demoted: bool = False):
        relays = tuple(sorted((int(r), v) for r, v in st.relays.items()))
        return (st.good and not demoted, st.rep, relays)

    relevant = []
    for v in range(n):
        relevant.append({TileId(t.i + di, t.j + dj) for t in assoc[v]
                         for di, dj in [(0, 0), *DIRECTIONS.values()]})
    init = [{t: {summary(st)} for t, st in local_status[v].items()} for v in range(n)]
    summaries = _flood(auditor, near, init, relevant)

    def view_statuses(v, known_summaries, demoted=frozenset()):
        out = {}
        for t, s in known_summaries.items():
            good, rep, relays = max(s, key=repr)
            st = TileStatus(t, good and t not in demoted, {}, 0, rep, {Region(r): u for r, u in relays})
            out[t] = st
        return out

    def my_wires(v, statuses):
        good = {t for t, st in statuses.items() if st.good}
        return [(a, b, ta, tb) for a, b, ta, tb in _wiring(statuses, geom, good) if v in (a, b)]

    # anomaly detection on each node's own wires
    flags = []
    anomalies = []
    for v in range(n):
        if not assoc[v]:
            flags.append({})
            continue
        sts = view_statuses(v, summaries[v])
        mine = set()
        nbrs = base.neighbors(v)
        for a, b, ta, tb in my_wires(v, sts):
            partner = b if a == v else a
            i = np.searchsorted(nbrs, partner)
            if not (i < nbrs.size and nbrs[i] == partner):
                mine.add(ta if a == v else tb)
                anomalies.append(("wiring", (min(a, b), max(a, b))))
        flags.append({t: {t in mine} for t in assoc[v]})
    demoted_view = _flood(auditor, near, flags, relevant)

    # final wiring with demoted tiles removed
    pairs = set()
    for v in range(n):
        if not assoc[v]:
            continue
        demoted = frozenset(t for t, fl in demoted_view[v].items() if True in fl)
        sts = view_statuses(v, summaries[v], demoted)
        for a, b, ta, tb in my_wires(v, sts):
            pairs.add((min(a, b), max(a, b), ta, tb))

    # every member reports its view of its own tile; assemble for output
    statuses = dict.fromkeys(tiles)
    for v in range(n):
        for t, st in local_status[v].items():
            if t in statuses and statuses[t] is None:
                statuses[t] = st
    for t in tiles:
        if statuses[t] is None:
            statuses[t] = TileStatus(t, False, {r: () for r in geom.regions}, 0)
    final = {t: TileStatus(st.tile, st.good, dict(st.region_members), st.point_count, st.rep, dict(st.relays))
             for t, st in statuses.items()}
    # election adjacency check, done by each elected node against its own list
    for t in sorted(final):
        st = final[t]
        if not st.good:
            continue
        for r in geom.regions:
            m = st.region_members[r]
            for u in m:
                others = np.array([w for w in m if w != u], dtype=np.int64)
                if others.size and not np.isin(others, base.neighbors(u)).all():
                    anomalies.append(("election", tuple(m)))
                    break
    for v in range(n):
        for t, fl in demoted_view[v].items():
            if True in fl and t in final and final[t].good:
                final[t].good = False
                final[t].rep = None
                final[t].relays = {}
                final[t].anomaly = "wiring"
    anomalies = sorted(set(anomalies), key=repr)
    return assemble_subnet(points, geom, final, sorted(pairs), anomalies)
