import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import flood_fill, lattice_bfs, same_partition
from sparsesens.lattice import (
    P_C,
    LatticeWindow,
    bisect_threshold,
    chemical_distance,
    couple_lattice,
    estimate_good_prob,
    label_clusters,
    sample_site_lattice,
    theta_curve,
    tile_outcomes,
    wilson_interval,
)
from sparsesens.subnet import TileStatus
from sparsesens.tiling import TileGeom, TileId


def grid_statuses(good):
    return {TileId(i, j): TileStatus(TileId(i, j), bool(g), {}, 0)
            for (i, j), g in np.ndenumerate(np.asarray(good))}


def test_couple_all_good_and_checkerboard():
    lat = couple_lattice(grid_statuses(np.ones((4, 5))))
    assert lat.open.all() and lat.shape == (4, 5)
    cb = (np.add.outer(np.arange(6), np.arange(6)) % 2) == 0
    st = label_clusters(couple_lattice(grid_statuses(cb)))
    assert st.n_clusters == cb.sum() and st.largest == 1


def test_couple_preserves_fraction_and_origin():
    rng = np.random.default_rng(0)
    good = rng.random((7, 9)) < 0.4
    sts = {TileId(i - 3, j + 2): TileStatus(TileId(i - 3, j + 2), bool(g), {}, 0)
           for (i, j), g in np.ndenumerate(good)}
    lat = couple_lattice(sts)
    assert lat.open.mean() == good.mean()
    assert lat.origin == TileId(-3, 2) and lat.is_open(TileId(-3, 2)) == good[0, 0]
    rows = [[sts[TileId(i - 3, j + 2)] for j in range(9)] for i in range(7)]
    assert np.array_equal(couple_lattice(rows).open, lat.open)
    with pytest.raises(ValueError):
        couple_lattice([rows[0], rows[1][:3]])


def test_sample_site_lattice_extremes_and_mean():
    assert not sample_site_lattice(20, 0.0, 1).open.any()
    assert sample_site_lattice(20, 1.0, 1).open.all()
    p = 0.3
    fr = np.mean([sample_site_lattice(100, p, s).open.mean() for s in range(1000)])
    assert abs(fr - p) <= 4 * math.sqrt(p * (1 - p) / (1e4 * 1000))
    with pytest.raises(ValueError):
        sample_site_lattice(5, 1.5, 0)


def test_full_lattice_one_cluster():
    st = label_clusters(sample_site_lattice(30, 1.0, 0))
    assert st.n_clusters == 1 and st.largest == 900 and st.spanning and st.theta == 1.0


@pytest.mark.parametrize("seed", range(50))
def test_labels_match_flood_fill(seed):
    rng = np.random.default_rng(seed)
    n, m = rng.integers(1, 40, 2)
    lat = LatticeWindow(rng.random((n, m)) < rng.uniform(0.3, 0.8))
    st = label_clusters(lat)
    ref, span = flood_fill(lat.open)
    assert same_partition(st.labels, ref)
    assert st.spanning == span


@given(st.lists(st.lists(st.booleans(), min_size=6, max_size=6), min_size=1, max_size=8))
def test_labels_property(rows):
    lat = LatticeWindow(np.array(rows))
    ref, span = flood_fill(lat.open)
    st = label_clusters(lat)
    assert same_partition(st.labels, ref) and st.spanning == span


def test_spanning_sides_of_threshold():
    hi = sum(label_clusters(sample_site_lattice(200, 0.65, s)).spanning for s in range(100))
    lo = sum(label_clusters(sample_site_lattice(200, 0.50, s)).spanning for s in range(100))
    assert hi >= 95 and lo <= 10


def test_chemical_distance_examples():
    lat = sample_site_lattice(10, 1.0, 0)
    assert chemical_distance(lat, (2, 2), (2, 3)) == (1, 1)
    assert chemical_distance(lat, (0, 0), (7, 4)) == (11, 11)
    blocked = LatticeWindow(np.array([[1, 0, 1]], bool))
    assert chemical_distance(blocked, (0, 0), (0, 2))[0] == math.inf
    with pytest.raises(ValueError):
        chemical_distance(blocked, (0, 0), (0, 1))


def test_chemical_distance_matches_bfs_oracle():
    rng = np.random.default_rng(3)
    lat = sample_site_lattice(40, 0.65, 3)
    opens = np.argwhere(lat.open)
    for _ in range(40):
        a, b = opens[rng.integers(len(opens), size=2)]
        assert chemical_distance(lat, tuple(a), tuple(b))[0] == lattice_bfs(lat.open, a, b)


def test_chemical_stretch_quantiles():
    rng = np.random.default_rng(7)
    q = {}
    for D in (10, 20, 40):
        ratios = []
        for s in range(30):
            lat = sample_site_lattice(128, 0.65, 1000 + s)
            st = label_clusters(lat)
            big = np.argmax(st.sizes) + 1
            sites = np.argwhere(st.labels == big)
            for a in sites[rng.integers(len(sites), size=60)]:
                b = a + [D, 0]
                if b[0] < 128 and st.labels[tuple(b)] == big:
                    dp, d = chemical_distance(lat, tuple(a), tuple(b))
                    ratios.append(dp / d)
        q[D] = np.percentile(ratios, 99)
    rho_hat = max(q.values())
    print(f"99th percentile D^p/D by D: {q}; rho_hat = {rho_hat:.3f}")
    assert q[10] >= q[20] - 0.1 and q[20] >= q[40] - 0.1
    assert math.isfinite(rho_hat)


def test_wilson_interval():
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi and hi - lo == pytest.approx(0.1924, abs=1e-3)
    assert wilson_interval(0, 10)[0] == 0.0


def test_good_prob_extremes():
    udg = TileGeom.udg()
    assert estimate_good_prob(udg, 1e-3, 2000, 0)[0] == 0.0
    assert estimate_good_prob(udg, 50.0, 2000, 0)[0] >= 0.99


def test_good_prob_nn_cap():
    nn = TileGeom.nn()
    p_small_k, _ = estimate_good_prob(nn, 1.0, 2000, 1, k=100)
    p_big_k, _ = estimate_good_prob(nn, 1.0, 2000, 1, k=300)
    p_no_cap, _ = estimate_good_prob(nn, 1.0, 2000, 1, k=10_000)
    assert p_small_k < 0.05 and p_big_k > 0.6
    assert p_no_cap - p_big_k < 0.02


def test_tile_outcomes_independent_of_workers():
    g = TileGeom.udg()
    a = tile_outcomes(g, 6.0, 9000, 5, workers=1)
    b = tile_outcomes(g, 6.0, 9000, 5, workers=2)
    assert np.array_equal(a, b)


def test_bisection_synthetic():
    est, lo, best, evals = bisect_threshold(lambda x: 1 - math.exp(-x), (0.0, 5.0), P_C, 1e-3)
    assert abs(est - math.log(1 / (1 - P_C))) < 1e-3
    with pytest.raises(ValueError):
        bisect_threshold(lambda x: 0.1, (0.0, 1.0))
    est, lo, _, _ = bisect_threshold(lambda k: float(k >= 37), (0, 100), 0.5, integer=True)
    assert (lo, est) == (36, 37)


def test_theta_curve():
    m, se = theta_curve(30, [1.0], 3, 0)
    assert m[0] == 1.0
    ps = [0.55, 0.65]
    m, se = theta_curve(200, ps, 100, 1)
    assert m[0] + 1.96 * se[0] < m[1] - 1.96 * se[1]
    grid = np.round(np.arange(0.5, 0.91, 0.05), 2)
    m, se = theta_curve(64, grid, 20, 2)
    assert all(b >= a - 3 * (sa + sb) for a, b, sa, sb in zip(m, m[1:], se, se[1:]))


def test_pbm_orientation(tmp_path):
    lat = LatticeWindow(np.array([[1, 0], [0, 0], [0, 1]], bool))
    assert lat.to_pbm() == "001\n100\n"
    lat.write_pbm(tmp_path / "l.pbm")
    assert (tmp_path / "l.pbm").read_text() == lat.to_pbm()
