import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.spatial import cKDTree

from mcforest.background import BackgroundModelParams, fit_background
from mcforest.dataset import PointSet, Window, bounding_window, generate_uniform
from mcforest.detection import detect_mcf
from mcforest.scenes import generate_scene
from mcforest.stabilization import (DegenerateFillError, StabilizationTrace, cell_membership,
                                    estimate_cell_areas, fill_cells, fill_count,
                                    nearest_original, stabilize, stabilized_mcf)


def bp_for(ps, q=30, seed=0):
    return BackgroundModelParams(ps.n, bounding_window(ps), q, 32, seed)


def test_fill_count_formula():
    assert fill_count(1.0, 0.25, 100, 40) == 20
    assert fill_count(1.0, 1.0, 100, 40) == 0
    assert fill_count(1.0, 0.5, 10, 20) == 0
    assert fill_count(3.0, 1.0, 8, 3) == 3  # 2.5 rounds half up


def test_cell_membership_examples():
    ps = PointSet([[0.0], [2.0]])
    assert cell_membership(ps, [0.9]) == 0
    assert cell_membership(ps, [1.0]) == 0
    assert cell_membership(ps, [2.0]) == 1
    assert cell_membership(PointSet([[2.0], [0.0]]), [1.0]) == 0


grid = st.integers(0, 6).map(float)


@given(arrays(np.float64, st.tuples(st.integers(1, 25), st.just(2)), elements=grid),
       arrays(np.float64, st.tuples(st.integers(1, 15), st.just(2)), elements=grid))
def test_nearest_original_matches_brute_force(orig, queries):
    got = nearest_original(cKDTree(orig), queries)
    d = np.linalg.norm(orig[None, :, :] - queries[:, None, :], axis=2)
    expect = np.array([np.flatnonzero(row == row.min())[0] for row in d])
    assert np.array_equal(got, expect)


def test_single_cell_area_is_window_volume():
    w = Window([0.0, 0.0], [2.0, 3.0])
    a = estimate_cell_areas(PointSet([[1.0, 1.0]]), w, 1000, 0)
    assert a.tolist() == [6.0]


def test_symmetric_cells_split_the_window():
    n = 40_000
    w = Window.unit()
    a = estimate_cell_areas(PointSet([[0.25, 0.5], [0.75, 0.5]]), w, n, 1)
    assert np.all(np.abs(a - 0.5) / 0.5 < 3 / np.sqrt(n))
    assert a.sum() == pytest.approx(w.volume, rel=1e-12)


@given(st.integers(1, 30), st.integers(0, 1000))
def test_areas_sum_to_window_volume(n, seed):
    ps = generate_uniform(n, Window.unit(), seed)
    assert estimate_cell_areas(ps, Window.unit(), 2000, seed).sum() == pytest.approx(1.0, rel=1e-12)


def test_fill_all_cells_is_plain_uniform():
    ps = generate_uniform(20, Window.unit(), 0)
    pts = fill_cells(ps, np.arange(20), Window.unit(), 300, 5)
    assert pts.shape == (300, 2) and Window.unit().contains(pts).all()


@given(st.integers(0, 1000), st.integers(1, 200))
def test_fill_audit(seed, n_fill):
    ps = generate_uniform(50, Window.unit(), seed)
    removed = np.random.default_rng(seed).choice(50, 7, replace=False)
    pts = fill_cells(ps, removed, Window.unit(), n_fill, seed)
    assert len(pts) == n_fill
    owners = nearest_original(cKDTree(ps.points), pts)
    assert np.isin(owners, removed).all()


def test_fill_is_deterministic_and_checks_inputs():
    ps = generate_uniform(30, Window.unit(), 1)
    a = fill_cells(ps, [3, 4], Window.unit(), 20, 9)
    b = fill_cells(ps, [3, 4], Window.unit(), 20, 9)
    assert np.array_equal(a, b)
    assert fill_cells(ps, [3], Window.unit(), 0, 9).shape == (0, 2)
    with pytest.raises(ValueError):
        fill_cells(ps, [], Window.unit(), 5, 0)


def test_fill_empty_region_is_degenerate():
    # a duplicated point never owns a cell: ties go to the smaller index
    ps = PointSet([[0.5, 0.5], [0.5, 0.5], [0.1, 0.1]])
    with pytest.raises(DegenerateFillError, match="degenerate fill region"):
        fill_cells(ps, [1], Window.unit(), 3, 0)


def test_uniform_scene_converges_at_once():
    ps = generate_uniform(300, Window.unit(), 21)
    bp = bp_for(ps, q=30, seed=21)
    assert len(detect_mcf(ps, fit_background(bp))) == 0  # precondition
    tr = stabilize(ps, bp, 1.0, seed=0)
    assert tr.converged and tr.n_iterations == 1 and len(tr.accumulated) == 0
    assert len(stabilized_mcf(ps, bp, trace=tr)) == 0


@pytest.fixture(scope="module")
def noisy_trace():
    ps = generate_scene("noisy_half_rings", 0)
    bp = bp_for(ps, q=30, seed=0)
    return ps, bp, stabilize(ps, bp, 1.0, seed=0)


def test_trace_invariants(noisy_trace):
    ps, bp, tr = noisy_trace
    assert tr.converged == (tr.iterations[-1]["n_clusters"] == 0)
    sizes = [r["accumulated_size"] for r in tr.iterations if "accumulated_size" in r]
    assert sizes == sorted(sizes) and sizes[-1] == len(tr.accumulated)
    assert np.all((tr.accumulated >= 0) & (tr.accumulated < ps.n))
    acc = set(tr.accumulated.tolist())
    for r in tr.iterations:
        for c in r["clusters"]:
            assert set(c["original_members"]) <= acc
    # X' size moves by at most the fill count per round
    for a, b in zip(tr.iterations, tr.iterations[1:]):
        removed = sum(c["size"] for c in a["clusters"])
        assert b["input_size"] == a["input_size"] - removed + a["n_filled"]
        assert abs(b["input_size"] - a["input_size"]) <= max(removed, a["n_filled"])


def test_trace_is_reproducible(noisy_trace):
    ps, bp, tr = noisy_trace
    assert stabilize(ps, bp, 1.0, seed=0).to_json() == tr.to_json()


def test_stabilized_forest_refers_to_original_indices(noisy_trace):
    ps, bp, tr = noisy_trace
    f = stabilized_mcf(ps, bp, trace=tr)
    assert f.n_points == ps.n
    for c in f.clusters:
        assert set(c.members.tolist()) <= set(tr.accumulated.tolist())


def test_too_few_accumulated_points():
    ps = generate_uniform(10, Window.unit(), 0)
    tr = StabilizationTrace(accumulated=np.array([3]), converged=True, n_points=10)
    assert len(stabilized_mcf(ps, bp_for(ps), trace=tr)) == 0


def test_clean_rings_stabilized_equals_raw():
    ps = generate_scene("rings", 2)
    bp = bp_for(ps, q=50, seed=2)
    raw = detect_mcf(ps, fit_background(bp), 1.0)
    stab = stabilized_mcf(ps, bp, seed=2)
    part = lambda f: sorted(sorted(c.members.tolist()) for c in f.clusters)
    assert part(stab) == part(raw)


def test_bad_eps():
    ps = generate_uniform(10, Window.unit(), 0)
    with pytest.raises(ValueError):
        stabilize(ps, bp_for(ps), 0.0)
