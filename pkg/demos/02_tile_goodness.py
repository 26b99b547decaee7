"""How likely is one tile to be good, and at what density does that beat p_c?

A tile is good when the right regions of it are occupied; the probability
depends only on the local point process, so it can be estimated tile by
tile.  The threshold search bisects on the density (UDG) or on k (NN) until
the estimate crosses the site percolation threshold.
"""

from sparsesens.lattice import P_C, estimate_good_prob, find_threshold
from sparsesens.tiling import TileGeom

udg = TileGeom.udg()
print(f"UDG tiles: side {udg.side:.4f}")
for lam in (2.0, 4.0, 6.0, 8.0, 10.0):
    p, (lo, hi) = estimate_good_prob(udg, lam, 4000, seed=0)
    print(f"  lam = {lam:5.1f}   P(good) = {p:.3f}  [{lo:.3f}, {hi:.3f}]")

rep = find_threshold(udg, "lam", (6.0, 10.0), tol=0.05, trials=4000, seed=0)
print(f"density where P(good) first exceeds {P_C}: {rep.estimate:.3f} (P = {rep.p_hat:.3f})")

nn = TileGeom.nn()
print(f"\nNN tiles at unit density: side {nn.side:.3f}")
for k in (150, 170, 188, 210):
    p, (lo, hi) = estimate_good_prob(nn, 1.0, 2000, seed=0, k=k)
    print(f"  k = {k}   P(good) = {p:.3f}  [{lo:.3f}, {hi:.3f}]")
