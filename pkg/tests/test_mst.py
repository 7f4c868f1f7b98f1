import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial.distance import pdist, squareform

from mcforest.dataset import Metric, PointSet
from mcforest.mst import UnionFind, compute_mst, kruskal_mst

# a 0.01 grid: exact duplicates and ties occur, denormal gaps do not
coords = st.integers(-10000, 10000).map(lambda i: i / 100)


def brute_force_min_weight(X):
    """Minimum total weight over every spanning tree of the complete graph."""
    n = len(X)
    D = squareform(pdist(X))
    pairs = list(itertools.combinations(range(n), 2))
    best = np.inf
    for edges in itertools.combinations(pairs, n - 1):
        uf = UnionFind(n)
        if all(uf.union(u, v) for u, v in edges):
            best = min(best, sum(D[u, v] for u, v in edges))
    return best


def is_spanning_tree(n, edges):
    uf = UnionFind(n)
    return len(edges) == n - 1 and all(uf.union(e.u, e.v) for e in edges)


def test_two_points():
    t = compute_mst(PointSet([[0.0, 0.0], [3.0, 4.0]]))
    assert len(t) == 1 and t.edges[0].weight == 5.0


def test_collinear_0_1_3():
    t = compute_mst(PointSet([[0.0], [1.0], [3.0]]))
    assert [(e.u, e.v, e.weight) for e in t.edges] == [(0, 1, 1.0), (1, 2, 2.0)]
    assert t.total_weight == 3.0


def test_single_point_and_empty():
    assert len(compute_mst(PointSet([[1.0, 1.0]]))) == 0
    with pytest.raises(ValueError, match="empty dataset"):
        compute_mst(PointSet(np.zeros((0, 2))))


def test_random_seven_points_match_enumeration(rng):
    for _ in range(5):
        X = rng.random((7, 2))
        assert compute_mst(PointSet(X)).total_weight == pytest.approx(brute_force_min_weight(X), rel=1e-12)


@given(arrays(np.float64, st.tuples(st.integers(2, 40), st.integers(1, 3)), elements=coords))
def test_prim_equals_kruskal_edge_for_edge(X):
    ps = PointSet(X)
    a, b = compute_mst(ps), kruskal_mst(ps)
    assert np.array_equal(a.u, b.u) and np.array_equal(a.v, b.v)
    assert np.array_equal(a.weight, b.weight)


@given(arrays(np.float64, st.tuples(st.integers(2, 40), st.integers(1, 3)), elements=coords))
def test_total_weight_matches_scipy(X):
    # scipy reads zero distances as missing edges; duplicates add nothing
    U = np.unique(X, axis=0)
    ref = minimum_spanning_tree(squareform(pdist(U))).sum() if len(U) > 1 else 0.0
    assert compute_mst(PointSet(X)).total_weight == pytest.approx(ref, rel=1e-9, abs=1e-9)


@given(arrays(np.float64, st.tuples(st.integers(2, 30), st.integers(1, 3)), elements=coords))
def test_tree_shape_and_sorted_order(X):
    t = compute_mst(PointSet(X))
    assert is_spanning_tree(len(X), t.edges)
    keys = [(e.weight, e.u, e.v) for e in t.edges]
    assert keys == sorted(keys)
    assert all(e.u < e.v for e in t.edges)


@given(arrays(np.float64, st.tuples(st.integers(3, 20), st.just(2)), elements=coords))
def test_cut_property(X):
    t = compute_mst(PointSet(X))
    D = squareform(pdist(X))
    n = len(X)
    for skip in range(len(t)):
        uf = UnionFind(n)
        for i, e in enumerate(t.edges):
            if i != skip:
                uf.union(e.u, e.v)
        side = np.array([uf.find(i) == uf.find(t.edges[skip].u) for i in range(n)])
        assert t.edges[skip].weight == D[np.ix_(side, ~side)].min()


@given(arrays(np.float64, st.tuples(st.integers(2, 25), st.just(2)), elements=coords),
       st.randoms(use_true_random=False))
def test_permutation_keeps_total_weight(X, r):
    perm = list(range(len(X)))
    r.shuffle(perm)
    a = compute_mst(PointSet(X)).total_weight
    b = compute_mst(PointSet(X[perm])).total_weight
    assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


def test_ties_are_broken_by_indices():
    # unit square: four edges of length 1, any three form an MST
    X = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    t = compute_mst(PointSet(X))
    assert [(e.u, e.v) for e in t.edges] == [(0, 1), (0, 2), (1, 3)]


def test_custom_metric_path(rng):
    X = rng.random((15, 2))
    man = Metric("manhattan", lambda x, Y: np.abs(Y - x).sum(axis=1))
    t = compute_mst(PointSet(X), man)
    ref = minimum_spanning_tree(squareform(pdist(X, "cityblock"))).sum()  # distinct points
    assert t.total_weight == pytest.approx(ref)
    assert t.total_weight == pytest.approx(kruskal_mst(PointSet(X), man).total_weight)
