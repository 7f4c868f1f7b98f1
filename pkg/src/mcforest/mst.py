"""Exact minimum spanning tree of the complete distance graph."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from ._kernels import euclidean_prim
from .dataset import EUCLIDEAN, EmptyDatasetError, Metric, PointSet


class Edge(NamedTuple):
    u: int
    v: int
    weight: float


class UnionFind:
    """Disjoint sets with path compression and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


@dataclass(frozen=True, eq=False)
class Mst:
    """N-1 edges sorted by (weight, u, v) with u < v."""

    n: int
    u: np.ndarray
    v: np.ndarray
    weight: np.ndarray

    def __post_init__(self):
        for name in ("u", "v", "weight"):
            getattr(self, name).setflags(write=False)

    @property
    def edges(self) -> list[Edge]:
        return [Edge(int(a), int(b), float(w)) for a, b, w in zip(self.u, self.v, self.weight)]

    def __iter__(self) -> Iterator[Edge]:
        return iter(self.edges)

    def __len__(self):
        return len(self.weight)

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.weight))


def _sorted_mst(n: int, u, v, w) -> Mst:
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    w = np.asarray(w, dtype=np.float64)
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    order = np.lexsort((hi, lo, w))
    return Mst(n, lo[order].copy(), hi[order].copy(), w[order].copy())


def _generic_prim(X: np.ndarray, metric: Metric):
    # same tie order as the compiled kernel, vectorized over candidates
    n = X.shape[0]
    intree = np.zeros(n, bool)
    best = np.full(n, np.inf)
    par = np.full(n, -1, np.int64)
    idx = np.arange(n)
    eu, ev, ew = [], [], []
    cur = 0
    intree[0] = True
    for _ in range(n - 1):
        d = metric.to_many(X[cur], X)
        if np.any(d < 0):
            raise ValueError("metric returned a negative distance")
        new_key = np.minimum(cur, idx) * n + np.maximum(cur, idx)
        old_key = np.minimum(par, idx) * n + np.maximum(par, idx)
        better = (par < 0) | (d < best) | ((d == best) & (new_key < old_key))
        better &= ~intree
        best[better] = d[better]
        par[better] = cur
        cand = np.flatnonzero(~intree)
        key = np.minimum(par[cand], cand) * n + np.maximum(par[cand], cand)
        j = cand[np.lexsort((key, best[cand]))[0]]
        eu.append(par[j])
        ev.append(j)
        ew.append(best[j])
        intree[j] = True
        cur = j
    return eu, ev, ew


def compute_mst(ps: PointSet, metric: Metric = EUCLIDEAN) -> Mst:
    """Exact MST, unique under the (weight, u, v) edge order.

    Uses dense Prim, which for a total edge order returns the same tree as
    Kruskal over all pairs (see kruskal_mst) in O(N^2) time and O(N) memory.
    """
    if ps.n == 0:
        raise EmptyDatasetError()
    if metric.is_euclidean:
        eu, ev, ew = euclidean_prim(np.ascontiguousarray(ps.points))
    else:
        eu, ev, ew = _generic_prim(ps.points, metric)
    return _sorted_mst(ps.n, eu, ev, ew)


def kruskal_mst(ps: PointSet, metric: Metric = EUCLIDEAN) -> Mst:
    """Kruskal over all N(N-1)/2 pairs with union-find. Reference version,
    O(N^2 log N) time and O(N^2) memory."""
    n = ps.n
    if n == 0:
        raise EmptyDatasetError()
    iu, iv = np.triu_indices(n, k=1)
    w = np.empty(len(iu))
    for i in range(n - 1):
        sel = iu == i
        w[sel] = metric.to_many(ps.points[i], ps.points[iv[sel]])
    order = np.lexsort((iv, iu, w))
    uf = UnionFind(n)
    eu, ev, ew = [], [], []
    for k in order:
        if uf.union(int(iu[k]), int(iv[k])):
            eu.append(iu[k])
            ev.append(iv[k])
            ew.append(w[k])
            if len(eu) == n - 1:
                break
    return _sorted_mst(n, eu, ev, ew)
