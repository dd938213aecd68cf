"""Optimal leaf ordering of a dendrogram.

Finds the leaf order, among the ``2**(n-1)`` orders reachable by flipping
subtrees, that minimizes the summed distance between adjacent leaves. The
cost table is the classic dynamic program over (leftmost, rightmost) leaf
pairs, stored only at each pair's lowest common ancestor so memory stays
``O(n^2)``. Ties are resolved towards the lexicographically smallest leaf
sequence.
"""

from __future__ import annotations

import sys
from typing import Dict, List, Tuple

import numpy as np

from .clustering import Dendrogram

_TIE_RTOL = 1e-12
_TIE_ATOL = 1e-12


def _minplus(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``out[i, j] = min_k a[i, k] + b[k, j]``."""
    out = np.full((a.shape[0], b.shape[1]), np.inf)
    for k in range(a.shape[1]):
        np.minimum(out, a[:, k, None] + b[None, k, :], out=out)
    return out


def _ties(costs: np.ndarray) -> np.ndarray:
    best = float(costs.min())
    return np.argwhere(costs <= best + _TIE_ATOL + _TIE_RTOL * abs(best))


class _Solver:
    def __init__(self, d: Dendrogram, dist: np.ndarray):
        self.n = n = d.n_leaves
        self.dist = dist
        self.left = d.left
        self.right = d.right
        # leaves[v]: leaf ids under v, left child's leaves first
        self.leaves: Dict[int, np.ndarray] = {i: np.array([i]) for i in range(n)}
        self.split: Dict[int, int] = {}
        # cost[v][i, j]: best order of v from leaves[L][i] to leaves[R][j]
        self.cost: Dict[int, np.ndarray] = {}
        for s in range(n - 1):
            self._solve_node(n + s, self.left[s], self.right[s])
        self._seq: Dict[Tuple[int, int, int], Tuple[int, ...]] = {}

    def children(self, v: int) -> Tuple[int, int]:
        return self.left[v - self.n], self.right[v - self.n]

    def _ends_to(self, child: int, rhs: np.ndarray) -> np.ndarray:
        """min over exits k of child: cost(child, a -> k) + rhs[k], for each entry a."""
        if child < self.n:
            return rhs
        cl, cr = self.children(child)
        p = len(self.leaves[cl])
        c = self.cost[child]
        top = _minplus(c, rhs[p:])
        bottom = _minplus(c.T, rhs[:p])
        return np.vstack([top, bottom])

    def _solve_node(self, v: int, l: int, r: int):
        ll, rl = self.leaves[l], self.leaves[r]
        self.leaves[v] = np.concatenate([ll, rl])
        self.split[v] = len(ll)
        cross = self.dist[np.ix_(ll, rl)]
        # best cost from every entry a of l to every m of r through l's exits
        through_l = self._ends_to(l, cross)
        # then across r to every exit b: use symmetry and reuse _ends_to on r
        self.cost[v] = self._ends_to(r, through_l.T).T

    def pair_cost(self, v: int, a: int, b: int) -> float:
        """Cost of the best order of ``v`` from leaf ``a`` to leaf ``b``."""
        if v < self.n:
            return 0.0 if a == b == v else np.inf
        lv = self.leaves[v]
        p = self.split[v]
        ia = int(np.flatnonzero(lv == a)[0])
        ib = int(np.flatnonzero(lv == b)[0])
        if ia < p <= ib:
            return float(self.cost[v][ia, ib - p])
        if ib < p <= ia:
            return float(self.cost[v][ib, ia - p])
        return np.inf

    def _exits(self, child: int, a: int) -> np.ndarray:
        """Leaves of ``child`` that an order entering at ``a`` can end on."""
        if child < self.n:
            return np.array([child])
        lv = self.leaves[child]
        p = self.split[child]
        pos = int(np.flatnonzero(lv == a)[0])
        return lv[p:] if pos < p else lv[:p]

    def _costs_from(self, child: int, a: int, ends: np.ndarray) -> np.ndarray:
        return np.array([self.pair_cost(child, a, e) for e in ends])

    def sequence(self, v: int, a: int, b: int) -> Tuple[int, ...]:
        key = (v, a, b)
        hit = self._seq.get(key)
        if hit is not None:
            return hit
        if v < self.n:
            return (v,)
        l, r = self.children(v)
        in_left = a in set(self.leaves[l].tolist())
        first, second = (l, r) if in_left else (r, l)
        ks = self._exits(first, a)
        ms = self._exits(second, b)
        total = (
            self._costs_from(first, a, ks)[:, None]
            + self.dist[np.ix_(ks, ms)]
            + self._costs_from(second, b, ms)[None, :]
        )
        seq = min(
            self.sequence(first, a, int(ks[i])) + self.sequence(second, int(ms[j]), b)
            for i, j in _ties(total)
        )
        self._seq[key] = seq
        return seq


def optimal_leaf_order(d: Dendrogram, dist: np.ndarray) -> List[int]:
    """Leaf permutation consistent with ``d`` minimizing adjacent-leaf distance."""
    dist = np.asarray(dist, dtype=np.float64)
    n = d.n_leaves
    if dist.shape != (n, n):
        raise ValueError(f"distance matrix shape {dist.shape} does not match {n} leaves")
    if n == 1:
        return [0]
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 4 * n + 200))
    try:
        solver = _Solver(d, dist)
        root = 2 * n - 2
        lv = solver.leaves[root]
        p = solver.split[root]
        candidates = []
        for i, j in _ties(solver.cost[root]):
            a, b = int(lv[i]), int(lv[p + j])
            candidates.append(solver.sequence(root, a, b))
            candidates.append(solver.sequence(root, b, a))
        return [int(v) for v in min(candidates)]
    finally:
        sys.setrecursionlimit(old_limit)


def order_cost(order: List[int], dist: np.ndarray) -> float:
    """Sum of distances between consecutive leaves of ``order``."""
    idx = np.asarray(order)
    if idx.size < 2:
        return 0.0
    return float(np.sum(np.asarray(dist)[idx[:-1], idx[1:]]))
