"""Peeling of dominant clusters so that the clusters they mask show up.

Each round runs the full stabilized detection on the points still in play.
If its clusters take every remaining point they are all kept and the loop
ends; otherwise only the most meaningful cluster is kept and its points are
removed before the next round.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .background import BackgroundModelParams
from .dataset import PointSet, bounding_window
from .detection import Forest, ScoredComponent, _make_forest, empty_forest
from .stabilization import stabilized_mcf


@dataclass
class UnmaskTrace:
    iterations: list = field(default_factory=list)
    final_forest: Forest = None
    converged: bool = False

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "n_iterations": len(self.iterations),
            "iterations": self.iterations,
            "final_forest": self.final_forest.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def unmask(ps: PointSet, bp: BackgroundModelParams, seed: int = 0,
           max_iterations: int = 50) -> UnmaskTrace:
    """Unmasked forest of ps. Every round refits the background for the
    remaining points inside their own bounding window."""
    trace = UnmaskTrace()
    kept: list[ScoredComponent] = []
    remaining = np.arange(ps.n)
    for it in range(max_iterations):
        if len(remaining) < 2:
            trace.converged = True
            break
        sub = ps.subset(remaining)
        sub_bp = bp.with_points(sub.n, bounding_window(sub))
        forest = stabilized_mcf(sub, sub_bp, seed=seed + it).remap(remaining, ps.n)
        rec = {"remaining_size": int(len(remaining)), "forest": forest.to_dict(),
               "removed_cluster_id": None}
        trace.iterations.append(rec)
        if not forest.clusters:
            trace.converged = True
            break
        covered = sum(c.size for c in forest.clusters)
        if covered == len(remaining):
            kept.extend(forest.clusters)
            trace.converged = True
            break
        best = forest.clusters[0]  # ascending (NFA, id)
        rec["removed_cluster_id"] = int(best.component_id)
        kept.append(best)
        remaining = np.setdiff1d(remaining, best.members, assume_unique=True)
    trace.final_forest = _make_forest(kept, ps.n) if kept else empty_forest(ps.n)
    return trace
