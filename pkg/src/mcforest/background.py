"""Monte Carlo model of MST edge lengths under uniform background noise.

Q point sets of the tested size are drawn uniformly in the sampling window and
their single-link hierarchies are recorded. Every non-root internal component
A of a simulated hierarchy contributes the K_A lengths of its edges as samples
of the law of an edge length given the component's context. The context is a
column: the size class of K_A crossed with a quantile bin of the father's
merge height. Father bins are quantiles computed separately inside each size
class.

Samples are never materialized: a component's edge lengths are the merge
heights of the internal nodes below it, so the number of samples <= w in a
column is a dominance count over the stored trees (see _kernels.rank_counts).
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._kernels import euclidean_prim, inner_stats, merge_tree, preorder, rank_counts
from .dataset import Window, uniform_in

FORMAT = "mcforest-background"
VERSION = 1


class ModelUnfitError(ValueError):
    def __init__(self):
        super().__init__("model unfit")


def thread_count() -> int:
    env = os.environ.get("MCF_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class BackgroundModelParams:
    n_points: int
    window: Window
    q_simulations: int = 100
    n_father_bins: int = 32
    seed: int = 0
    size_ratio: float = 1.5

    def __post_init__(self):
        if self.n_points < 2:
            raise ValueError("background model needs n_points >= 2")
        if self.q_simulations < 1:
            raise ValueError("q_simulations must be >= 1")
        if self.n_father_bins < 1:
            raise ValueError("n_father_bins must be >= 1")
        if not self.size_ratio > 1:
            raise ValueError("size_ratio must be > 1")

    def with_points(self, n_points: int, window: Optional[Window] = None) -> "BackgroundModelParams":
        return BackgroundModelParams(
            n_points, self.window if window is None else window,
            self.q_simulations, self.n_father_bins, self.seed, self.size_ratio,
        )

    def to_dict(self) -> dict:
        return {
            "n_points": self.n_points,
            "window": self.window.to_dict(),
            "q_simulations": self.q_simulations,
            "n_father_bins": self.n_father_bins,
            "seed": self.seed,
            "size_ratio": self.size_ratio,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BackgroundModelParams":
        return cls(d["n_points"], Window.from_dict(d["window"]), d["q_simulations"],
                   d["n_father_bins"], d["seed"], d.get("size_ratio", 1.5))


def _n_low(n: int, ratio: float) -> int:
    half = max((n - 1) // 2, 1)
    return int(math.floor(math.log(half) / math.log(ratio) + 1e-9)) + 1


def n_size_classes(n: int, ratio: float) -> int:
    return 2 * _n_low(n, ratio) + 1


def size_class(k, n: int, ratio: float) -> np.ndarray:
    """Geometric classes of the edge count K, mirrored around N/2.

    Small components are grouped by log K, large ones by log(N - K), so the
    near-complete components that dominate the top of every tree get classes
    of their own.
    """
    k = np.asarray(k, dtype=np.int64)
    nlow = _n_low(n, ratio)
    lr = math.log(ratio)
    low = np.floor(np.log(np.maximum(k, 1)) / lr + 1e-9).astype(np.int64)
    high = np.floor(np.log(np.maximum(n - k, 1)) / lr + 1e-9).astype(np.int64)
    return np.where(k <= (n - 1) // 2, np.minimum(low, nlow - 1), 2 * nlow - np.minimum(high, nlow))


def _simulate(params: BackgroundModelParams, q: int):
    rng = np.random.default_rng([params.seed, q])
    X = uniform_in(rng, params.n_points, params.window)
    eu, ev, ew = euclidean_prim(X)
    order = np.lexsort((ev, eu, ew))
    return _tree_arrays(params.n_points, eu[order], ev[order], ew[order])


def _tree_arrays(n, eu, ev, ew):
    left, right, _, _ = merge_tree(n, eu, ev)
    return np.ascontiguousarray(ew, dtype=np.float64), left[n:].copy(), right[n:].copy()


def _bin_index(edges: np.ndarray, values) -> np.ndarray:
    nb = len(edges) - 1
    return np.clip(np.searchsorted(edges, values, side="right") - 1, 0, nb - 1)


class _SimulatedSamples:
    """Compact per-simulation trees answering column rank queries exactly."""

    def __init__(self, n, trees, ratio, n_father_bins):
        self.n = n
        self.trees = trees  # list of (omega, left, right), internal nodes only
        m = n - 1
        nk = n_size_classes(n, ratio)
        self._ratio = ratio
        omega, pos, kk, fw, dep = [], [], [], [], []
        for w, l, r in trees:
            full_l = np.concatenate([np.full(n, -1), l])
            full_r = np.concatenate([np.full(n, -1), r])
            _, _, ipos = preorder(n, full_l, full_r)
            k, f, d = inner_stats(n, l, r)
            omega.append(w)
            pos.append(ipos)
            kk.append(k)
            dep.append(d)
            fw.append(np.where(f >= 0, w[np.maximum(f, 0)], np.inf))
        self.omega = np.concatenate(omega)
        self.inner_pos = np.concatenate(pos)
        self.kedges = np.concatenate(kk)
        father_w = np.concatenate(fw)
        nonroot = np.isfinite(father_w)
        cls = size_class(self.kedges, n, ratio)

        # per-class father quantile bins
        self.class_edges: list[Optional[np.ndarray]] = []
        self.col_offset = np.zeros(nk + 1, np.int64)
        for c in range(nk):
            v = father_w[nonroot & (cls == c)]
            if len(v) == 0:
                self.class_edges.append(None)
                self.col_offset[c + 1] = self.col_offset[c]
                continue
            nb = int(min(n_father_bins, len(v)))
            self.class_edges.append(np.quantile(v, np.linspace(0.0, 1.0, nb + 1)))
            self.col_offset[c + 1] = self.col_offset[c] + nb
        self.n_cols = int(self.col_offset[-1])

        col = np.full(len(self.omega), -1, np.int64)
        for c in range(nk):
            sel = nonroot & (cls == c)
            if self.class_edges[c] is not None and sel.any():
                col[sel] = self.col_offset[c] + _bin_index(self.class_edges[c], father_w[sel])
        self.col = col
        self.col_totals = np.bincount(col[nonroot], weights=self.kedges[nonroot],
                                      minlength=self.n_cols).astype(np.int64)
        self.n_components = int(nonroot.sum())

        # per simulation CSR of nodes by column
        q = len(trees)
        self.sim_ptr = np.arange(q + 1, dtype=np.int64) * m
        col_ptr, col_nodes, node_ptr = [], [], [0]
        for s in range(q):
            cs = col[s * m:(s + 1) * m]
            keep = np.flatnonzero(cs >= 0)
            order = keep[np.argsort(cs[keep], kind="stable")]
            counts = np.bincount(cs[keep], minlength=self.n_cols)
            col_ptr.append(np.concatenate([[0], np.cumsum(counts)]))
            col_nodes.append(order)
            node_ptr.append(node_ptr[-1] + len(order))
        self.col_ptr = np.concatenate(col_ptr).astype(np.int64)
        self.col_nodes = np.concatenate(col_nodes).astype(np.int64)
        self.node_ptr = np.asarray(node_ptr, dtype=np.int64)

        # pooled law: an internal node D carries one sample per non-root
        # ancestor-or-self, so weight it by that depth
        depth = np.concatenate(dep)
        order = np.argsort(self.omega, kind="stable")
        self.pool_w = self.omega[order]
        self.pool_cum = np.concatenate([[0], np.cumsum(depth[order])])
        self.pool_total = int(self.pool_cum[-1])

    def columns(self, k_edges, omega_father, n_points):
        cls = size_class(k_edges, n_points, self._ratio)
        cols = np.full(len(cls), -1, np.int64)
        for c in np.unique(cls):
            if c >= len(self.class_edges) or self.class_edges[c] is None:
                continue
            sel = cls == c
            cols[sel] = self.col_offset[c] + _bin_index(self.class_edges[c], omega_father[sel])
        return cols

    def counts(self, omega, cols):
        r = np.zeros(len(omega), np.int64)
        s = np.zeros(len(omega), np.int64)
        ok = cols >= 0
        ok[ok] = self.col_totals[cols[ok]] > 0
        if ok.any():
            q_col = np.where(ok, cols, -1)
            q_order = np.argsort(omega, kind="stable")
            r = rank_counts(self.sim_ptr, self.node_ptr, self.omega, self.inner_pos,
                            self.kedges, self.col_ptr, self.col_nodes,
                            np.ascontiguousarray(omega, dtype=np.float64), q_col,
                            q_order, self.n_cols)
            s[ok] = self.col_totals[cols[ok]]
        bad = ~ok
        if bad.any():
            if self.pool_total == 0:
                raise ModelUnfitError()
            t = np.searchsorted(self.pool_w, omega[bad], side="right")
            r[bad] = self.pool_cum[t]
            s[bad] = self.pool_total
        return r, s


class _ExplicitSamples:
    """Hand-specified sorted samples per father bin, one size class."""

    def __init__(self, edges, samples):
        self.class_edges = [np.asarray(edges, dtype=np.float64)]
        self.samples = [np.sort(np.asarray(s, dtype=np.float64)) for s in samples]
        if len(self.samples) != len(self.class_edges[0]) - 1:
            raise ValueError("need one sample list per father bin")
        self.pool = np.sort(np.concatenate(self.samples)) if self.samples else np.zeros(0)
        self.n_components = int(sum(len(s) for s in self.samples))

    def columns(self, k_edges, omega_father, n_points):
        return _bin_index(self.class_edges[0], omega_father)

    def counts(self, omega, cols):
        r = np.zeros(len(omega), np.int64)
        s = np.zeros(len(omega), np.int64)
        for i, (w, c) in enumerate(zip(omega, cols)):
            smp = self.samples[c]
            if len(smp) == 0:
                smp = self.pool
                if len(smp) == 0:
                    raise ModelUnfitError()
            r[i] = np.searchsorted(smp, w, side="right")
            s[i] = len(smp)
        return r, s


class BackgroundModel:
    """Conditional edge-length law with Laplace-smoothed rank CDF."""

    def __init__(self, params: Optional[BackgroundModelParams], source):
        self.params = params
        self._source = source

    @property
    def father_bin_edges(self) -> list[Optional[np.ndarray]]:
        """Father quantile cut points, one array per size class."""
        return self._source.class_edges

    @property
    def n_observations(self) -> int:
        """Number of (component, father) records, one per non-root internal
        node of every simulated hierarchy."""
        return self._source.n_components

    @property
    def is_simulated(self) -> bool:
        return isinstance(self._source, _SimulatedSamples)

    @classmethod
    def from_samples(cls, father_bin_edges: Sequence[float],
                     per_bin_samples: Sequence[Sequence[float]],
                     params: Optional[BackgroundModelParams] = None) -> "BackgroundModel":
        """Build a model directly from per-father-bin sample lists."""
        return cls(params, _ExplicitSamples(father_bin_edges, per_bin_samples))

    def rank_counts(self, omega, omega_father, k_edges=None, n_points=None):
        """(r, S) per query: samples <= omega and total samples in the
        column selected by the father weight and size."""
        omega = np.atleast_1d(np.asarray(omega, dtype=np.float64))
        omega_father = np.broadcast_to(np.asarray(omega_father, dtype=np.float64), omega.shape)
        if self.is_simulated:
            if k_edges is None:
                raise TypeError("a simulated model needs k_edges")
            k_edges = np.broadcast_to(np.asarray(k_edges, dtype=np.int64), omega.shape)
            n = self.params.n_points if n_points is None else int(n_points)
            cols = self._source.columns(k_edges, omega_father, n)
        else:
            cols = self._source.columns(None, omega_father, None)
        return self._source.counts(omega, np.asarray(cols, dtype=np.int64))

    def cdf(self, omega, omega_father, k_edges=None, n_points=None) -> np.ndarray:
        r, s = self.rank_counts(omega, omega_father, k_edges, n_points)
        return (r + 1.0) / (s + 2.0)

    # serialization

    def to_dict(self) -> dict:
        d = {"format": FORMAT, "version": VERSION,
             "params": None if self.params is None else self.params.to_dict()}
        src = self._source
        if self.is_simulated:
            d["kind"] = "simulated"
            d["father_bin_edges"] = [None if e is None else e.tolist() for e in src.class_edges]
            d["simulations"] = [
                {"omega": w.tolist(), "left": l.tolist(), "right": r.tolist()}
                for w, l, r in src.trees
            ]
        else:
            d["kind"] = "explicit"
            d["father_bin_edges"] = src.class_edges[0].tolist()
            d["per_bin_samples"] = [s.tolist() for s in src.samples]
        return d

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def from_dict(cls, d: dict) -> "BackgroundModel":
        if d.get("format") != FORMAT:
            raise ValueError("not a background model file")
        if d.get("version") != VERSION:
            raise ValueError(f"unsupported model version {d.get('version')}")
        params = None if d["params"] is None else BackgroundModelParams.from_dict(d["params"])
        if d["kind"] == "explicit":
            return cls.from_samples(d["father_bin_edges"], d["per_bin_samples"], params)
        trees = [(np.asarray(s["omega"], dtype=np.float64),
                  np.asarray(s["left"], dtype=np.int64),
                  np.asarray(s["right"], dtype=np.int64)) for s in d["simulations"]]
        return cls(params, _build_source(params, trees))

    @classmethod
    def load(cls, path) -> "BackgroundModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _build_source(params: BackgroundModelParams, trees) -> _SimulatedSamples:
    return _SimulatedSamples(params.n_points, trees, params.size_ratio, params.n_father_bins)


def fit_background(p: BackgroundModelParams, threads: Optional[int] = None) -> BackgroundModel:
    """Run the Q simulations and index their trees. Deterministic in p."""
    threads = thread_count() if threads is None else threads
    qs = range(p.q_simulations)
    if threads > 1 and p.q_simulations > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            trees = list(ex.map(lambda q: _simulate(p, q), qs))
    else:
        trees = [_simulate(p, q) for q in qs]
    return BackgroundModel(p, _build_source(p, trees))


def cdf_omega(m: BackgroundModel, omega, omega_father, k_edges=None, n_points=None):
    """Smoothed rank CDF (r + 1)/(S + 2) of omega in the column selected by the
    father weight (and, for simulated models, the edge count K)."""
    out = m.cdf(omega, omega_father, k_edges, n_points)
    return float(out[0]) if np.ndim(omega) == 0 else out
