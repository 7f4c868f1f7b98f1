import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcforest.background import BackgroundModel, BackgroundModelParams, fit_background
from mcforest.dataset import PointSet, Window, bounding_window
from mcforest.detection import (ScoredComponent, UntestableError, detect_mcf,
                                exclusion_prune, meaningful_components, score_all,
                                score_component)
from mcforest.hierarchy import Component, build_hierarchy
from mcforest.mst import compute_mst
from mcforest.scenes import generate_scene


def comp(k, omega=2.0, father=5.0, cid=7):
    members = np.arange(k + 1)
    return Component(cid, members, omega, k, 99, 1, 2, father)


def sc(cid, lnfa, members):
    return ScoredComponent(cid, lnfa, lnfa, np.asarray(members))


def dendro(X):
    return build_hierarchy(compute_mst(PointSet(X)))


def test_log_nfa_half_cdf_ten_edges():
    m = BackgroundModel.from_samples([0.0, 10.0], [[1.0, 2.0, 3.0, 4.0]])  # cdf(2) = 3/6
    s = score_component(comp(10), m, 101)
    assert s.log10_nfa == pytest.approx(2 + 10 * math.log10(0.5), abs=1e-12)
    assert s.log10_nfa == pytest.approx(-1.0103, abs=1e-4)
    assert s.pfa == pytest.approx(0.5 ** 10)


def test_cdf_near_one_gives_nfa_near_n_minus_one():
    m = BackgroundModel.from_samples([0.0, 10.0], [np.linspace(0, 1, 100_000)])
    s = score_component(comp(1, omega=5.0), m, 11)
    assert 10 ** s.log10_nfa == pytest.approx(10, rel=1e-4)


def test_threshold_boundary_is_not_meaningful():
    # 5 points, {0,1} has K=1 and cdf = 1/4 = eps/(N-1): NFA = 1 exactly
    X = np.array([[0.0], [1.0], [10.0], [20.0], [30.0]])
    m = BackgroundModel.from_samples([0.0, 100.0], [[2.0, 3.0]])
    d = dendro(X)
    assert meaningful_components(d, m, 1.0) == []
    found = meaningful_components(d, m, 1.0 + 1e-9)
    assert [sorted(c.members.tolist()) for c in found] == [[0, 1]]


def test_untestable_components():
    m = BackgroundModel.from_samples([0.0, 10.0], [[1.0]])
    with pytest.raises(UntestableError, match="singleton untestable"):
        score_component(Component(0, np.array([0]), 0.0, 0, 5, None, None, 1.0), m, 5)
    with pytest.raises(UntestableError, match="root untestable"):
        score_component(Component(8, np.arange(5), 3.0, 4, None, 1, 2, None), m, 5)


def test_eps_zero_and_negative():
    d = dendro(np.random.default_rng(0).random((20, 2)))
    m = BackgroundModel.from_samples([0.0, 10.0], [[5.0]])
    assert meaningful_components(d, m, 0.0) == []
    with pytest.raises(ValueError):
        meaningful_components(d, m, -1.0)


def test_prune_siblings_inside_father():
    c1, c2, c3 = sc(1, -5, [0, 1]), sc(2, -4, range(6)), sc(3, -3, [3, 4])
    f = exclusion_prune([c2, c3, c1], 6)
    assert [c.component_id for c in f.clusters] == [1, 3]
    assert f.unclustered.tolist() == [2, 5]


def test_prune_chain_keeps_minimum():
    c1, c2, c3 = sc(1, -2, [0, 1]), sc(2, -6, [0, 1, 2]), sc(3, -3, range(4))
    f = exclusion_prune([c1, c2, c3], 4)
    assert [c.component_id for c in f.clusters] == [2]


def test_prune_single_candidate_and_ties():
    f = exclusion_prune([sc(4, -1, [2, 3])], 5)
    assert len(f) == 1 and f.clusters[0].members.tolist() == [2, 3]
    # equal NFA: smaller id wins
    f = exclusion_prune([sc(9, -2, [0, 1, 2]), sc(8, -2, [0, 1])], 3)
    assert [c.component_id for c in f.clusters] == [8]


def reference_prune(d, ms):
    """Literal greedy rule: drop every ancestor and descendant of the pick."""
    cand = {c.component_id: c for c in ms}
    out = []
    while cand:
        best = min(cand.values(), key=lambda c: (c.log10_nfa, c.component_id))
        out.append(best.component_id)
        anc = set()
        x = best.component_id
        while x >= 0:
            anc.add(x)
            x = int(d.father[x])
        for cid in list(cand):
            y, related = cid, cid in anc
            while y >= 0 and not related:
                related = y == best.component_id
                y = int(d.father[y])
            if related:
                del cand[cid]
    return sorted(out)


random_models = st.lists(st.floats(0.0, 0.3), min_size=1, max_size=40)


@given(st.integers(0, 10_000), random_models, st.floats(0.5, 50))
def test_prune_matches_ancestor_rule(seed, samples, eps):
    X = np.random.default_rng(seed).random((25, 2))
    d = dendro(X)
    m = BackgroundModel.from_samples([0.0, 2.0], [samples])
    ms = meaningful_components(d, m, eps)
    f = exclusion_prune(ms, d.n)
    assert sorted(c.component_id for c in f.clusters) == reference_prune(d, ms)


@given(st.integers(0, 10_000), random_models, st.floats(0.5, 50))
def test_forest_invariants(seed, samples, eps):
    X = np.random.default_rng(seed).random((30, 2))
    d = dendro(X)
    m = BackgroundModel.from_samples([0.0, 2.0], [samples])
    f = exclusion_prune(meaningful_components(d, m, eps), d.n)
    seen = np.zeros(d.n, int)
    for c in f.clusters:
        seen[c.members] += 1
        assert c.log10_nfa < math.log10(eps)
        assert c.size >= 2
    assert seen.max(initial=0) <= 1
    assert np.array_equal(np.flatnonzero(seen == 0), f.unclustered)
    nfas = [c.log10_nfa for c in f.clusters]
    assert nfas == sorted(nfas)
    again = exclusion_prune(list(f.clusters), d.n)
    assert [c.component_id for c in again.clusters] == [c.component_id for c in f.clusters]
    lab = f.labels()
    for i, c in enumerate(f.clusters):
        assert np.all(lab[c.members] == i)


def test_vectorised_scores_match_scalar_path(rng):
    X = rng.random((60, 2))
    ps = PointSet(X)
    m = fit_background(BackgroundModelParams(60, bounding_window(ps), 10, 8, 0))
    d = dendro(X)
    ids, lnfa = score_all(d, m)
    for i, v in zip(ids, lnfa):
        s = score_component(d.component(int(i)), m, 60)
        assert s.log10_nfa == pytest.approx(v, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("scale", [0.5, 2.0, 4.0])
def test_scale_invariance(scale):
    ps = generate_scene("cao_two_clusters", 2)
    big = PointSet(ps.points * scale)
    fa = detect_mcf(ps, fit_background(BackgroundModelParams(ps.n, bounding_window(ps), 30, 32, 1)))
    fb = detect_mcf(big, fit_background(BackgroundModelParams(big.n, bounding_window(big), 30, 32, 1)))
    assert [c.members.tolist() for c in fa.clusters] == [c.members.tolist() for c in fb.clusters]


def test_cao_has_two_meaningful_candidates():
    ps = generate_scene("cao_two_clusters", 0)
    m = fit_background(BackgroundModelParams(ps.n, Window.unit(), 50, 32, 0))
    ms = meaningful_components(dendro(ps.points), m, 1.0)
    for g in (0, 1):
        planted = set(np.flatnonzero(ps.labels == g))
        assert any(len(planted & set(c.members.tolist())) >= 20 for c in ms)


def test_rings_two_clusters():
    ps = generate_scene("rings", 1)
    f = detect_mcf(ps, fit_background(BackgroundModelParams(ps.n, bounding_window(ps), 50, 32, 1)))
    assert len(f) == 2
    assert sorted(c.size for c in f.clusters) == [150, 400]


def test_forest_serialisation_and_remap():
    f = exclusion_prune([sc(3, -2, [1, 0]), sc(5, -4, [3, 4])], 6)
    d = f.to_dict()
    assert d["clusters"][0]["members"] == [3, 4] and d["n_unclustered"] == 2
    g = f.remap(np.array([10, 11, 12, 13, 14, 15]), 20)
    assert g.clusters[0].members.tolist() == [13, 14] and len(g.unclustered) == 16
