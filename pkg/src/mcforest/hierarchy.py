"""Single-link dendrogram built by replaying MST edges in sorted order."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._kernels import merge_tree, preorder
from .mst import Mst


class HierarchyUndefinedError(ValueError):
    def __init__(self):
        super().__init__("hierarchy undefined")


@dataclass(frozen=True)
class Component:
    """One node of the dendrogram.

    member_indices is a sorted array of point indices; k_edges is the number
    of MST edges inside the component. father_omega_max is the merge height
    of the father, None for the root.
    """

    id: int
    member_indices: np.ndarray
    omega_max: float
    k_edges: int
    father_id: Optional[int]
    left_child_id: Optional[int]
    right_child_id: Optional[int]
    father_omega_max: Optional[float] = None

    @property
    def size(self) -> int:
        return self.k_edges + 1

    @property
    def is_leaf(self) -> bool:
        return self.left_child_id is None

    @property
    def is_root(self) -> bool:
        return self.father_id is None


class Dendrogram:
    """Binary merge tree over N points.

    Node ids: leaves 0..N-1, internal node N+k created by the k-th sorted MST
    edge, root 2N-2. Since edges are replayed in nondecreasing order, internal
    ids are sorted by merge height. The leaves below a node form a contiguous
    slice of leaf_order starting at leaf_start[node].
    """

    def __init__(self, n: int, left, right, father, size, omega, leaf_order, leaf_start):
        self.n = n
        self.left = left
        self.right = right
        self.father = father
        self.size = size
        self.omega = omega
        self.leaf_order = leaf_order
        self.leaf_start = leaf_start
        for a in (left, right, father, size, omega, leaf_order, leaf_start):
            a.setflags(write=False)

    @property
    def root_id(self) -> int:
        return 2 * self.n - 2

    @property
    def n_nodes(self) -> int:
        return 2 * self.n - 1

    def k_edges(self, node: int) -> int:
        return int(self.size[node]) - 1

    def members_view(self, node: int) -> np.ndarray:
        """Member indices of node in leaf order (a read-only view, unsorted)."""
        s = self.leaf_start[node]
        return self.leaf_order[s:s + self.size[node]]

    def members(self, node: int) -> np.ndarray:
        return np.sort(self.members_view(node))

    def father_omega(self, node: int) -> Optional[float]:
        f = self.father[node]
        return None if f < 0 else float(self.omega[f])

    def component(self, node: int) -> Component:
        if not 0 <= node < self.n_nodes:
            raise IndexError(f"no node {node}")
        leaf = node < self.n
        f = int(self.father[node])
        return Component(
            id=int(node),
            member_indices=self.members(node),
            omega_max=float(self.omega[node]),
            k_edges=self.k_edges(node),
            father_id=None if f < 0 else f,
            left_child_id=None if leaf else int(self.left[node]),
            right_child_id=None if leaf else int(self.right[node]),
            father_omega_max=self.father_omega(node),
        )

    @property
    def nodes(self) -> list[Component]:
        return [self.component(i) for i in range(self.n_nodes)]

    def to_json(self) -> str:
        """Debug dump: one record per node with id, omega_max, children and
        member count."""
        recs = []
        for i in range(self.n_nodes):
            leaf = i < self.n
            recs.append({
                "id": i,
                "omega_max": float(self.omega[i]),
                "children": [] if leaf else [int(self.left[i]), int(self.right[i])],
                "n_members": int(self.size[i]),
            })
        return json.dumps({"n_points": self.n, "root_id": self.root_id, "nodes": recs})


def build_hierarchy(t: Mst) -> Dendrogram:
    n = t.n
    if n < 2:
        raise HierarchyUndefinedError()
    left, right, father, size = merge_tree(n, t.u, t.v)
    omega = np.zeros(2 * n - 1)
    omega[n:] = t.weight
    leaf_order, leaf_start, _ = preorder(n, left, right)
    return Dendrogram(n, left, right, father, size, omega, leaf_order, leaf_start)


def internal_components(d: Dendrogram) -> list[Component]:
    """All N-1 non-singleton components, root included, in merge order."""
    return [d.component(i) for i in range(d.n, d.n_nodes)]
