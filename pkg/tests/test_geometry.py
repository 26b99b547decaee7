import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import brute_nearest, brute_range
from sparsesens.geometry import PointSet, Window, build_index, nearest_k, range_query, sample_poisson


def pts_from(xy):
    return PointSet.from_coords(np.asarray(xy, float))


def test_zero_intensity_gives_empty_set():
    ps = sample_poisson(Window(0, 0, 10, 10), 0.0, 3)
    assert ps.n == 0 and ps.coords.shape == (0, 2)


def test_negative_intensity_rejected():
    with pytest.raises(ValueError):
        sample_poisson(Window(0, 0, 1, 1), -1.0, 0)


def test_same_seed_same_points_and_different_seed_differs():
    w = Window(0, 0, 5, 5, 1.0)
    a, b, c = sample_poisson(w, 2.0, 11), sample_poisson(w, 2.0, 11), sample_poisson(w, 2.0, 12)
    assert a == b
    assert not np.array_equal(a.coords, c.coords) or a.n != c.n


def test_points_fill_padded_window():
    w = Window(0, 0, 4, 3, 1.5)
    ps = sample_poisson(w, 5.0, 1)
    assert w.contains(ps.coords, padded=True).all()
    assert (~w.contains(ps.coords)).any()


def test_mean_count_matches_intensity():
    w = Window(0, 0, 10, 10)
    counts = np.array([sample_poisson(w, 1.568, s).n for s in range(1000)])
    sigma = np.sqrt(156.8)
    assert abs(counts.mean() - 156.8) <= 3 * sigma / np.sqrt(1000)


def test_disjoint_quadrants_uncorrelated():
    w = Window(0, 0, 10, 5)
    left, right = [], []
    for s in range(2000):
        xy = sample_poisson(w, 1.0, s).coords
        left.append(int((xy[:, 0] < 5).sum()))
        right.append(int((xy[:, 0] >= 5).sum()))
    assert abs(np.corrcoef(left, right)[0, 1]) < 0.05


def test_empty_index_has_no_buckets():
    idx = build_index(pts_from(np.empty((0, 2))), 1.0)
    assert len(idx.buckets) == 0


def test_cell_boundary_goes_to_higher_cell():
    idx = build_index(pts_from([[1.0, 2.0]]), 1.0)
    assert idx.cell_of(1.0, 2.0) == (1, 2)
    assert list(idx.buckets) == [(1, 2)]


def test_bad_cell_size():
    with pytest.raises(ValueError):
        build_index(pts_from([[0, 0]]), 0.0)


def test_buckets_partition_points():
    xy = np.random.default_rng(0).uniform(-3, 7, (500, 2))
    idx = build_index(pts_from(xy), 0.7)
    ids = np.concatenate(list(idx.buckets.values()))
    assert sorted(ids.tolist()) == list(range(500))


def test_range_query_examples():
    idx = build_index(pts_from([[0, 0], [0.5, 0], [2, 0]]), 1.0)
    assert range_query(idx, (0, 0), 1.0) == {0, 1}
    assert range_query(idx, (0.5, 0), 0.0) == {1}


def test_range_query_matches_brute_force():
    rng = np.random.default_rng(1)
    xy = rng.uniform(0, 20, (1000, 2))
    idx = build_index(pts_from(xy), 1.3)
    for _ in range(50):
        c, r = rng.uniform(-2, 22, 2), rng.uniform(0, 4)
        assert range_query(idx, c, r) == brute_range(xy, c, r)


def test_nearest_k_examples():
    xy = [[0, 0], [1, 0], [3, 0], [7, 0]]
    idx = build_index(pts_from(xy), 1.0)
    assert nearest_k(idx, (3, 0), 2, exclude=2) == [1, 0]
    assert nearest_k(idx, (3, 0), 10, exclude=2) == [1, 0, 3]


def test_nearest_k_matches_brute_force():
    rng = np.random.default_rng(2)
    xy = rng.uniform(0, 30, (1000, 2))
    idx = build_index(pts_from(xy), 1.0)
    for _ in range(50):
        i = int(rng.integers(1000))
        assert nearest_k(idx, xy[i], 10, exclude=i) == brute_nearest(xy, xy[i], 10, exclude=i)


@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=1, max_size=40),
       st.integers(1, 8), st.floats(0.3, 3.0))
def test_nearest_k_ties_on_grid(cells, k, cell_size):
    # integer coordinates produce many exact distance ties, broken by id
    xy = np.array(cells, float)
    idx = build_index(pts_from(xy), cell_size)
    q = xy[0]
    assert nearest_k(idx, q, k, exclude=0) == brute_nearest(xy, q, k, exclude=0)


@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), max_size=60),
       st.tuples(st.floats(-6, 6), st.floats(-6, 6)), st.floats(0, 4))
def test_range_query_property(xy, c, r):
    xy = np.array(xy, float).reshape(-1, 2)
    idx = build_index(pts_from(xy), 0.9)
    assert range_query(idx, c, r) == brute_range(xy, c, r)
