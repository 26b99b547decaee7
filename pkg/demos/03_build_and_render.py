"""Build a sparse subnetwork on a UDG instance and draw it.

Every good tile elects a representative and wires relays to its good
neighbours, so the subnet has degree at most four and edges of length at
most one.  The picture is written to ``subnet.svg`` in the current directory.
"""

from pathlib import Path

from sparsesens.geometry import sample_poisson
from sparsesens.graphs import build_udg
from sparsesens.lattice import couple_lattice, label_clusters
from sparsesens.reports import emit_report
from sparsesens.subnet import construct_subnet, largest_component, tile_window
from sparsesens.tiling import TileGeom

geom = TileGeom.udg()
pts = sample_poisson(tile_window(geom, 16), 9.0, seed=4)
base = build_udg(pts)
sub = construct_subnet(pts, base, geom)

deg = sub.degrees()
print(f"{pts.n} points, {base.n_edges} UDG edges")
print(f"{len(sub.good_tiles())}/{len(sub.statuses)} good tiles, {sub.members.size} subnet nodes, "
      f"{len(sub.edges)} subnet edges")
print(f"max degree {max(deg.values())}, longest edge {sub.edge_lengths().max():.3f}")
print(f"largest connected piece: {largest_component(sub).members.size} nodes")

st = label_clusters(couple_lattice(sub.statuses))
print(f"good-tile lattice: {st.n_clusters} clusters, largest {st.largest} sites, spanning {st.spanning}")

out = emit_report(sub, "SVG", Path("subnet.svg"), geom=geom)
print(f"wrote {out}")
