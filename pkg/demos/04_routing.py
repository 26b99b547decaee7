"""Local routing on a percolated lattice.

Packets move greedily along the x-then-y path and fall back to a breadth
first search around closed sites.  The probe count is the number of sites
whose state was looked up; it is compared with the optimal hop count.
"""

import numpy as np

from sparsesens.lattice import chemical_distance, label_clusters, sample_site_lattice
from sparsesens.routing import DELIVERED, route

rng = np.random.default_rng(0)
lat = sample_site_lattice(128, 0.65, seed=1)
st = label_clusters(lat)
big = int(np.argmax(st.sizes)) + 1
sites = np.argwhere(st.labels == big)
print(f"128x128 lattice at p = 0.65: largest cluster holds {st.largest} sites")

print("   D   hops   optimal   probes   BFS calls")
rows = []
for _ in range(12):
    a, b = sites[rng.choice(len(sites), 2, replace=False)]
    tr = route(lat, tuple(a), tuple(b))
    opt, _ = chemical_distance(lat, tuple(a), tuple(b))
    assert tr.outcome == DELIVERED
    D = int(abs(a - b).sum())
    rows.append(tr.probes / opt)
    print(f"{D:4d}  {tr.hop_count:5d}  {int(opt):8d}  {tr.probes:7d}  {tr.bfs_invocations:9d}")
print(f"mean probes per optimal hop: {np.mean(rows):.1f}")

small = np.argwhere((st.labels > 0) & (st.labels != big))[0]
tr = route(lat, tuple(small), tuple(sites[0]))
print(f"\nsource in a small cluster: outcome {tr.outcome} after {tr.probes} probes")
