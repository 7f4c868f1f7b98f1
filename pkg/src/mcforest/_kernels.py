"""Compiled inner loops shared by the mst, hierarchy and background modules."""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def euclidean_prim(X):
    """Dense Prim on the complete Euclidean graph.

    Ties are broken on the (weight, min endpoint, max endpoint) order, so the
    result is the unique minimum spanning tree under that total order and
    coincides with the one Kruskal produces on the same order.
    """
    n, d = X.shape
    intree = np.zeros(n, np.bool_)
    best = np.full(n, np.inf)
    par = np.full(n, -1, np.int64)
    eu = np.empty(max(n - 1, 0), np.int64)
    ev = np.empty(max(n - 1, 0), np.int64)
    ew = np.empty(max(n - 1, 0), np.float64)
    if n == 0:
        return eu, ev, ew
    cur = 0
    intree[0] = True
    for k in range(n - 1):
        bj = -1
        bw = np.inf
        bu = 0
        bv = 0
        for j in range(n):
            if intree[j]:
                continue
            s = 0.0
            for a in range(d):
                t = X[j, a] - X[cur, a]
                s += t * t
            w = np.sqrt(s)
            p = par[j]
            if p < 0 or w < best[j] or (
                w == best[j]
                and min(cur, j) * n + max(cur, j) < min(p, j) * n + max(p, j)
            ):
                best[j] = w
                par[j] = cur
            u = min(par[j], j)
            v = max(par[j], j)
            if bj < 0 or best[j] < bw or (
                best[j] == bw and (u < bu or (u == bu and v < bv))
            ):
                bw = best[j]
                bj = j
                bu = u
                bv = v
        eu[k] = bu
        ev[k] = bv
        ew[k] = bw
        intree[bj] = True
        cur = bj
    return eu, ev, ew


@njit(cache=True, nogil=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True, nogil=True)
def merge_tree(n, eu, ev):
    """Replay sorted MST edges into a binary merge tree.

    Leaves are 0..n-1, the k-th edge creates node n+k. Returns left, right,
    father and size over all 2n-1 nodes, the root's father being -1.
    """
    m = 2 * n - 1
    left = np.full(m, -1, np.int64)
    right = np.full(m, -1, np.int64)
    father = np.full(m, -1, np.int64)
    size = np.ones(m, np.int64)
    parent = np.arange(n)
    top = np.arange(n)  # current tree node of each union-find root
    for k in range(n - 1):
        ru = _find(parent, eu[k])
        rv = _find(parent, ev[k])
        a = top[ru]
        b = top[rv]
        node = n + k
        left[node] = a
        right[node] = b
        father[a] = node
        father[b] = node
        size[node] = size[a] + size[b]
        parent[rv] = ru
        top[ru] = node
    return left, right, father, size


@njit(cache=True, nogil=True)
def preorder(n, left, right):
    """Pre-order layout of a merge tree.

    Returns leaf_order (leaves in visiting order), leaf_start (first slot of
    each node's leaves in leaf_order) and inner_pos (slot of each internal
    node, indexed by node - n, in the pre-order of internal nodes). The
    internal nodes below x occupy inner_pos[x - n] .. inner_pos[x - n] +
    size[x] - 2.
    """
    m = 2 * n - 1
    leaf_order = np.empty(n, np.int64)
    leaf_start = np.empty(m, np.int64)
    inner_pos = np.empty(max(n - 1, 0), np.int64)
    stack = np.empty(m, np.int64)
    sp = 0
    stack[sp] = m - 1
    sp += 1
    nl = 0
    ni = 0
    while sp > 0:
        sp -= 1
        x = stack[sp]
        leaf_start[x] = nl
        if x < n:
            leaf_order[nl] = x
            nl += 1
        else:
            inner_pos[x - n] = ni
            ni += 1
            stack[sp] = right[x]
            sp += 1
            stack[sp] = left[x]
            sp += 1
    return leaf_order, leaf_start, inner_pos


@njit(cache=True, nogil=True)
def rank_counts(sim_ptr, node_ptr, omega, inner_pos, kedges, col_ptr, col_nodes,
                q_omega, q_col, q_order, n_cols):
    """Count simulated edge samples not above each query threshold.

    Every non-root internal node A of a simulated tree contributes the K_A
    edge lengths of its component to column col(A). For query i the result
    is the number of such samples in column q_col[i] that are <= q_omega[i],
    summed over simulations. Nodes are merge-ordered, so the edges of A below
    a threshold are the internal nodes of A's subtree with a small enough id;
    a Fenwick tree over pre-order slots counts them as thresholds grow.
    """
    nq = q_omega.shape[0]
    out = np.zeros(nq, np.int64)
    for s in range(sim_ptr.shape[0] - 1):
        lo = sim_ptr[s]
        hi = sim_ptr[s + 1]
        m = hi - lo  # internal nodes in this simulation
        w = omega[lo:hi]
        pos = inner_pos[lo:hi]
        kk = kedges[lo:hi]
        cp = col_ptr[s * (n_cols + 1):(s + 1) * (n_cols + 1)]
        cn = col_nodes[node_ptr[s]:node_ptr[s + 1]]
        bit = np.zeros(m + 1, np.int64)
        inserted = 0
        for qi in range(nq):
            i = q_order[qi]
            c = q_col[i]
            if c < 0:
                continue
            x = q_omega[i]
            while inserted < m and w[inserted] <= x:
                j = pos[inserted] + 1
                while j <= m:
                    bit[j] += 1
                    j += j & (-j)
                inserted += 1
            r = 0
            for t in range(cp[c], cp[c + 1]):
                a = cn[t]
                if w[a] <= x:
                    r += kk[a]
                    continue
                # sum over slots [pos[a], pos[a] + kk[a])
                j = pos[a] + kk[a]
                while j > 0:
                    r += bit[j]
                    j -= j & (-j)
                j = pos[a]
                while j > 0:
                    r -= bit[j]
                    j -= j & (-j)
            out[i] += r
    return out


@njit(cache=True, nogil=True)
def inner_stats(n, left, right):
    """Edge count, local father index (-1 at the root) and non-root depth of
    each internal node, given the children of internal nodes n..2n-2."""
    m = n - 1
    kedges = np.zeros(m, np.int64)
    father = np.full(m, -1, np.int64)
    depth = np.zeros(m, np.int64)
    for k in range(m):
        a = left[k]
        b = right[k]
        ka = 0
        kb = 0
        if a >= n:
            ka = kedges[a - n]
            father[a - n] = k
        if b >= n:
            kb = kedges[b - n]
            father[b - n] = k
        kedges[k] = ka + kb + 1
    for k in range(m - 2, -1, -1):
        f = father[k]
        depth[k] = 1
        if f >= 0 and father[f] >= 0:
            depth[k] += depth[f]
    return kedges, father, depth
