"""Stretch of the subnet and the holes it leaves, just above the threshold.

Stretch compares weighted subnet distance with Euclidean distance between
pairs of subnet nodes, binned by distance.  Coverage throws random squares
and counts how often a square of side ``ell`` tiles holds no subnet node.
"""

from sparsesens.experiments import ExperimentConfig, run_coverage, run_stretch

cfg = ExperimentConfig(model="UDG", lam=10.0, window=30, pairs=300, bins=[4.0, 8.0, 16.0, 32.0],
                       check_trials=3000, seed=2)
rep = run_stretch(cfg)
print(f"P(good) at lam = {cfg.lam}: {rep.good_prob[0]:.3f}")
print("  bin        pairs   median   p99    exceed 1.5x median")
for b in rep.bins:
    print(f"  {b['lo']:4.0f}-{b['hi']:<4.0f}  {b['count']:6d}   {b['median']:.3f}   {b['p99']:.3f}  "
          f"{b['exceed_fraction']:.4f}")

cov = run_coverage(ExperimentConfig(model="UDG", lams=[8.0, 10.0], ells=[0.5, 1.0, 1.5, 2.0],
                                    window=24, squares=3000, check_trials=3000, seed=2))
print("\n  lam   ell (tiles)   empty fraction")
for lam, ell, _, _, freq, _, _ in cov.rows:
    print(f"  {lam:4.1f}  {ell:4.1f}          {freq:.4f}")
for f in cov.fits:
    print(f"lam = {f['lam']:g}: log-frequency slope {f['slope']:.3f}")
