"""Iterated detection with replacement of detected points by background noise.

Each round detects the forest on the current point set, removes its points
and refills the Voronoi cells (of the original points) that held them with
uniform noise at the density of the remaining points. Original points found
in any round are accumulated; the final forest is detected on that
accumulated, noise-free set.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .background import BackgroundModel, BackgroundModelParams, fit_background
from .dataset import PointSet, Window, uniform_in
from .detection import Forest, detect_mcf, empty_forest

REFIT_TOLERANCE = 0.10
AREA_SAMPLES_PER_POINT = 100
MIN_ACCEPT_RATE = 1e-6
FILL_BUDGET = 10**6


class DegenerateFillError(RuntimeError):
    def __init__(self):
        super().__init__("degenerate fill region")


def _tree(original) -> cKDTree:
    pts = original.points if isinstance(original, PointSet) else np.asarray(original, float)
    return cKDTree(pts)


def nearest_original(tree: cKDTree, queries: np.ndarray) -> np.ndarray:
    """Index of the nearest tree point for each query, ties to the smallest
    index."""
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    n = tree.n
    if len(queries) == 0:
        return np.zeros(0, np.int64)
    k = min(n, 8)
    dist, idx = tree.query(queries, k=k)
    if k == 1:
        return np.asarray(idx, np.int64).reshape(-1)
    tied = dist == dist[:, :1]
    best = np.where(tied, idx, n).min(axis=1)
    # every candidate tied: more points may share the distance
    full = tied[:, -1] & (k < n)
    for i in np.flatnonzero(full):
        d = np.linalg.norm(tree.data - queries[i], axis=1)
        best[i] = int(np.flatnonzero(d == d.min())[0])
    return best.astype(np.int64)


def cell_membership(original: PointSet, q) -> int:
    """Index of the original point whose Voronoi cell holds q."""
    if original.n == 0:
        raise ValueError("empty dataset")
    return int(nearest_original(_tree(original), np.asarray(q, dtype=np.float64).reshape(1, -1))[0])


def estimate_cell_areas(original: PointSet, w: Window, n_samples: int, seed: int,
                        tree: Optional[cKDTree] = None) -> np.ndarray:
    """Monte Carlo volume of every Voronoi cell clipped to w. The estimates
    sum to vol(w)."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    tree = _tree(original) if tree is None else tree
    rng = np.random.default_rng(seed)
    hits = np.zeros(original.n, np.int64)
    chunk = 200_000
    for start in range(0, n_samples, chunk):
        m = min(chunk, n_samples - start)
        hits += np.bincount(nearest_original(tree, uniform_in(rng, m, w)), minlength=original.n)
    return w.volume * hits / n_samples


def fill_cells(original: PointSet, removed, w: Window, n_fill: int, seed: int,
               tree: Optional[cKDTree] = None) -> np.ndarray:
    """Uniform points of w whose nearest original point is in removed."""
    removed = np.asarray(removed, dtype=np.int64).reshape(-1)
    if removed.size == 0:
        raise ValueError("removed must be nonempty")
    if n_fill < 0:
        raise ValueError("n_fill must be >= 0")
    out = np.zeros((0, w.dim))
    if n_fill == 0:
        return out
    tree = _tree(original) if tree is None else tree
    mask = np.zeros(original.n, bool)
    mask[removed] = True
    rng = np.random.default_rng(seed)
    drawn = accepted = 0
    parts = []
    while accepted < n_fill:
        rate = accepted / drawn if drawn else removed.size / original.n
        if drawn >= FILL_BUDGET and rate < MIN_ACCEPT_RATE:
            raise DegenerateFillError()
        batch = int(min(FILL_BUDGET, max(1024, 1.2 * (n_fill - accepted) / max(rate, MIN_ACCEPT_RATE))))
        cand = uniform_in(rng, batch, w)
        ok = mask[nearest_original(tree, cand)]
        drawn += batch
        accepted += int(ok.sum())
        parts.append(cand[ok])
    return np.vstack(parts)[:n_fill]


def fill_count(a: float, a_m: float, n_total: int, n_m: int) -> int:
    """Points needed in area a_m to match the density of the n_total - n_m
    points left in the rest of the window, rounded, never negative."""
    rest = a - a_m
    if rest <= 0:
        return 0
    return max(0, int(math.floor(a_m * (n_total - n_m) / rest + 0.5)))


class _Models:
    """Background models for the original window, refit when the point count
    drifts more than REFIT_TOLERANCE from the cached fit."""

    def __init__(self, bp: BackgroundModelParams):
        self.bp = bp
        self.model: Optional[BackgroundModel] = None
        self.n_fits = 0

    def get(self, n: int) -> BackgroundModel:
        m = self.model
        if m is None or abs(n - m.params.n_points) > REFIT_TOLERANCE * m.params.n_points:
            self.model = fit_background(self.bp.with_points(n))
            self.n_fits += 1
        return self.model


@dataclass
class StabilizationTrace:
    iterations: list = field(default_factory=list)
    accumulated: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    converged: bool = False
    n_points: int = 0

    @property
    def n_iterations(self) -> int:
        return len(self.iterations)

    def to_dict(self) -> dict:
        return {
            "n_points": self.n_points,
            "converged": self.converged,
            "n_iterations": self.n_iterations,
            "accumulated": self.accumulated.tolist(),
            "iterations": self.iterations,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def stabilize(ps: PointSet, bp: BackgroundModelParams, eps: float = 1.0, seed: int = 0,
              max_iterations: int = 20, area_samples: Optional[int] = None) -> StabilizationTrace:
    if eps <= 0:
        raise ValueError("eps must be positive")
    w = bp.window
    X = ps.points
    n0 = ps.n
    trace = StabilizationTrace(n_points=n0)
    if n0 < 2:
        trace.converged = True
        return trace
    tree = cKDTree(X)
    n_area = AREA_SAMPLES_PER_POINT * n0 if area_samples is None else area_samples
    areas = estimate_cell_areas(ps, w, n_area, [seed, 1], tree)
    a = float(areas.sum())
    models = _Models(bp)

    cur = X.copy()
    origin = np.arange(n0)  # -1 marks fill points
    acc = np.zeros(n0, bool)
    for it in range(max_iterations):
        size = len(cur)
        if size < 2:
            forest = empty_forest(size)
        else:
            forest = detect_mcf(PointSet(cur), models.get(size), eps)
        rec = {"input_size": size, "n_clusters": len(forest),
               "clusters": [_cluster_record(c, origin) for c in forest.clusters]}
        if not forest.clusters:
            rec["n_filled"] = 0
            trace.iterations.append(rec)
            trace.converged = True
            break
        idx = np.concatenate([c.members for c in forest.clusters])
        orig = origin[idx]
        acc[orig[orig >= 0]] = True
        owner = nearest_original(tree, cur)
        cells = np.unique(owner[idx])
        keep = np.ones(size, bool)
        keep[idx] = False
        # earlier fill points can survive inside the emptied cells: they do
        # not count towards the outside density and are part of the refill
        inside = keep & np.isin(owner, cells)
        n_in = int(inside.sum())
        n_fill = max(0, fill_count(a, float(areas[cells].sum()), size - n_in, len(idx)) - n_in)
        fill = fill_cells(ps, cells, w, n_fill, [seed, 2, it], tree)
        cur = np.vstack([cur[keep], fill])
        origin = np.r_[origin[keep], np.full(len(fill), -1)]
        rec["n_filled"] = int(len(fill))
        rec["accumulated_size"] = int(acc.sum())
        trace.iterations.append(rec)
    trace.accumulated = np.flatnonzero(acc)
    return trace


def _cluster_record(c, origin) -> dict:
    o = origin[c.members]
    return {"log10_nfa": float(c.log10_nfa), "size": int(len(c.members)),
            "original_members": np.sort(o[o >= 0]).tolist()}


def stabilized_mcf(ps: PointSet, bp: BackgroundModelParams, seed: int = 0, eps: float = 1e-2,
                   trace: Optional[StabilizationTrace] = None, loop_eps: float = 1.0,
                   max_iterations: int = 20) -> Forest:
    """Forest detected on the accumulated points, with a background model
    for their count in the original window. Indices refer to ps."""
    if trace is None:
        trace = stabilize(ps, bp, loop_eps, seed, max_iterations)
    acc = trace.accumulated
    if len(acc) < 2:
        return empty_forest(ps.n)
    model = fit_background(bp.with_points(len(acc)))
    return detect_mcf(ps.subset(acc), model, eps).remap(acc, ps.n)
