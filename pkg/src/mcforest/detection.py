"""Scoring of dendrogram components, selection and exclusion pruning."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .background import BackgroundModel
from .dataset import EUCLIDEAN, Metric, PointSet
from .hierarchy import Component, Dendrogram, build_hierarchy
from .mst import compute_mst


class UntestableError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ScoredComponent:
    """A tested component. Probabilities are kept as log10 values since
    cdf**K underflows for large K; pfa is derived from log10_pfa."""

    component_id: int
    log10_pfa: float
    log10_nfa: float
    members: np.ndarray
    k_edges: int = 0
    omega_max: float = float("nan")

    @property
    def pfa(self) -> float:
        return 10.0 ** self.log10_pfa

    @property
    def nfa(self) -> float:
        return 10.0 ** self.log10_nfa

    @property
    def size(self) -> int:
        return len(self.members)

    def to_dict(self) -> dict:
        return {
            "component_id": int(self.component_id),
            "log10_nfa": float(self.log10_nfa),
            "members": np.sort(self.members).tolist(),
        }


def _rank_key(c: ScoredComponent):
    return (c.log10_nfa, c.component_id)


@dataclass(frozen=True, eq=False)
class Forest:
    """Disjoint clusters sorted by ascending NFA plus the unclustered points."""

    clusters: tuple
    unclustered: np.ndarray
    n_points: int = field(default=0)

    def __len__(self):
        return len(self.clusters)

    def labels(self) -> np.ndarray:
        """Cluster rank per point (0 = smallest NFA), -1 if unclustered."""
        lab = np.full(self.n_points, -1, np.int64)
        for i, c in enumerate(self.clusters):
            lab[c.members] = i
        return lab

    @property
    def best_log10_nfa(self) -> float:
        return self.clusters[0].log10_nfa if self.clusters else math.inf

    def to_dict(self) -> dict:
        return {
            "n_points": int(self.n_points),
            "clusters": [c.to_dict() for c in self.clusters],
            "n_unclustered": int(len(self.unclustered)),
        }

    def remap(self, index: np.ndarray, n_points: int) -> "Forest":
        """Translate member indices through index (local -> global)."""
        clusters = tuple(
            ScoredComponent(c.component_id, c.log10_pfa, c.log10_nfa,
                            np.sort(index[c.members]), c.k_edges, c.omega_max)
            for c in self.clusters
        )
        return _make_forest(clusters, n_points)


def _make_forest(clusters, n_points: int) -> Forest:
    clusters = tuple(sorted(clusters, key=_rank_key))
    taken = np.zeros(n_points, bool)
    for c in clusters:
        taken[c.members] = True
    return Forest(clusters, np.flatnonzero(~taken), n_points)


def empty_forest(n_points: int) -> Forest:
    return Forest((), np.arange(n_points), n_points)


def _log10_nfa(log_cdf, k, n_points):
    return math.log10(n_points - 1) + k * log_cdf


def score_component(c: Component, m: BackgroundModel, n_points: int) -> ScoredComponent:
    if c.is_leaf or c.k_edges < 1:
        raise UntestableError("singleton untestable")
    if c.is_root or c.father_omega_max is None:
        raise UntestableError("root untestable")
    cdf = m.cdf(c.omega_max, c.father_omega_max, c.k_edges, n_points)[0]
    log_pfa = c.k_edges * math.log10(cdf)
    return ScoredComponent(c.id, log_pfa, math.log10(n_points - 1) + log_pfa,
                           c.member_indices, c.k_edges, c.omega_max)


def score_all(d: Dendrogram, m: BackgroundModel):
    """log10 NFA of every non-root internal node, as (node ids, values)."""
    n = d.n
    ids = np.arange(n, 2 * n - 2)
    if len(ids) == 0:
        return ids, np.zeros(0)
    k = d.size[ids] - 1
    omega = d.omega[ids]
    father = d.omega[d.father[ids]]
    cdf = m.cdf(omega, father, k, n)
    return ids, math.log10(n - 1) + k * np.log10(cdf)


def meaningful_components(d: Dendrogram, m: BackgroundModel, eps: float = 1.0) -> list[ScoredComponent]:
    """Non-root internal components with NFA < eps.

    Members are read-only views in leaf order, not sorted.
    """
    if eps < 0:
        raise ValueError("eps must be non-negative")
    if eps == 0:
        return []
    ids, lnfa = score_all(d, m)
    sel = np.flatnonzero(lnfa < math.log10(eps))
    n1 = math.log10(d.n - 1)
    return [
        ScoredComponent(int(ids[i]), float(lnfa[i] - n1), float(lnfa[i]),
                        d.members_view(ids[i]), int(d.size[ids[i]] - 1),
                        float(d.omega[ids[i]]))
        for i in sel
    ]


def exclusion_prune(ms: Sequence[ScoredComponent], n_points: Optional[int] = None) -> Forest:
    """Greedy selection by ascending NFA (ties: smaller id).

    Once a component is selected every candidate nested with it is dropped.
    Candidates come from one dendrogram, so two components are nested exactly
    when they share a point, which is what is tested.
    """
    if n_points is None:
        n_points = 1 + max((int(c.members.max()) for c in ms if len(c.members)), default=-1)
    taken = np.zeros(n_points, bool)
    out = []
    for c in sorted(ms, key=_rank_key):
        if taken[c.members].any():
            continue
        taken[c.members] = True
        out.append(ScoredComponent(c.component_id, c.log10_pfa, c.log10_nfa,
                                   np.sort(c.members), c.k_edges, c.omega_max))
    return _make_forest(out, n_points)


def detect_mcf(ps: PointSet, m: BackgroundModel, eps: float = 1.0,
               metric: Metric = EUCLIDEAN) -> Forest:
    d = build_hierarchy(compute_mst(ps, metric))
    return exclusion_prune(meaningful_components(d, m, eps), ps.n)
