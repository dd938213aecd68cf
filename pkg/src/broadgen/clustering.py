"""Ward agglomerative clustering with inconsistency-based flattening.

Node numbering follows the usual linkage convention: leaves are
``0..n-1`` and merge ``s`` creates node ``n + s``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numba
import numpy as np

Cluster = List[int]
ClusterSet = List[Cluster]
ClusteringFunction = Callable[[np.ndarray, float], ClusterSet]

# Inconsistency scores are rounded to this many decimals so that values that
# are equal in exact arithmetic (1 and sqrt(2) are common) compare equal.
SCORE_DECIMALS = 12
# A window std below this fraction of the window's largest height is roundoff
# (e.g. equal heights recomputed through different merge orders).
STD_RTOL = 1e-9


@dataclass(frozen=True)
class Dendrogram:
    """Merge history: rows of ``(left, right, height, size)``."""

    merges: np.ndarray
    n_leaves: int

    def __post_init__(self):
        merges = np.asarray(self.merges, dtype=np.float64).reshape(-1, 4)
        object.__setattr__(self, "merges", merges)
        if self.n_leaves < 1:
            raise ValueError("a dendrogram needs at least one leaf")
        if merges.shape[0] != self.n_leaves - 1:
            raise ValueError(
                f"expected {self.n_leaves - 1} merges for {self.n_leaves} leaves, got {merges.shape[0]}"
            )

    @property
    def left(self) -> np.ndarray:
        return self.merges[:, 0].astype(np.intp)

    @property
    def right(self) -> np.ndarray:
        return self.merges[:, 1].astype(np.intp)

    @property
    def heights(self) -> np.ndarray:
        return self.merges[:, 2]

    @property
    def sizes(self) -> np.ndarray:
        return self.merges[:, 3].astype(np.intp)

    def leaves_under(self, node: int) -> List[int]:
        """Leaf ids below ``node`` in left-to-right order."""
        n = self.n_leaves
        out, stack = [], [node]
        left, right = self.left, self.right
        while stack:
            v = stack.pop()
            if v < n:
                out.append(v)
            else:
                stack.append(right[v - n])
                stack.append(left[v - n])
        return out


@dataclass(frozen=True)
class InconsistencyTable:
    """Per-merge ``mean``, ``std``, ``count`` and ``score`` arrays."""

    mean: np.ndarray
    std: np.ndarray
    count: np.ndarray
    score: np.ndarray
    depth: int


@dataclass(frozen=True)
class RetrievalConfig:
    initial_threshold: float = 1.0
    epsilon: float = 0.05
    required_clusters: int = 5
    min_threshold: float = 0.0
    depth: int = 2

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.min_threshold < self.initial_threshold:
            raise ValueError("min_threshold must be below initial_threshold")
        if self.required_clusters < 1:
            raise ValueError("required_clusters must be positive")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")

    def to_dict(self) -> dict:
        return {
            "initial_threshold": self.initial_threshold,
            "epsilon": self.epsilon,
            "required_clusters": self.required_clusters,
            "min_threshold": self.min_threshold,
            "depth": self.depth,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RetrievalConfig":
        return cls(**{k: data[k] for k in cls().to_dict() if k in data})


@numba.njit(cache=True)
def _ward_kernel(d2, n):  # pragma: no cover - compiled
    # d2 is (2n-1, 2n-1) with squared input distances in the leading n x n
    # block; slot index == node id, so "smallest slot" is "smallest id".
    size = np.zeros(2 * n - 1)
    alive = np.zeros(2 * n - 1, dtype=np.bool_)
    nn = np.full(2 * n - 1, -1, dtype=np.int64)
    nnd = np.full(2 * n - 1, np.inf)
    for i in range(n):
        size[i] = 1.0
        alive[i] = True
        best = np.inf
        arg = -1
        for j in range(n):
            if j != i and d2[i, j] < best:
                best = d2[i, j]
                arg = j
        nn[i] = arg
        nnd[i] = best
    out = np.empty((n - 1, 4))
    for step in range(n - 1):
        new = n + step
        a = -1
        best = np.inf
        for i in range(new):
            if alive[i] and nnd[i] < best:
                best = nnd[i]
                a = i
        if a == -1:
            # only NaN/inf distances left; merge the two smallest live ids
            for i in range(new):
                if alive[i]:
                    if a == -1:
                        a = i
                    else:
                        nn[a] = i
                        break
            best = np.inf
        b = nn[a]
        na = size[a]
        nb = size[b]
        alive[a] = False
        alive[b] = False
        for k in range(new):
            if alive[k]:
                nk = size[k]
                v = ((na + nk) * d2[a, k] + (nb + nk) * d2[b, k] - nk * best) / (na + nb + nk)
                if v < 0.0:
                    v = 0.0
                d2[new, k] = v
                d2[k, new] = v
        size[new] = na + nb
        alive[new] = True
        out[step, 0] = a
        out[step, 1] = b
        out[step, 2] = np.sqrt(best)
        out[step, 3] = na + nb
        new_best = np.inf
        new_arg = -1
        for k in range(new):
            if not alive[k]:
                continue
            v = d2[new, k]
            if v < new_best:
                new_best = v
                new_arg = k
            if nn[k] == a or nn[k] == b:
                rb = np.inf
                rarg = -1
                for j in range(new + 1):
                    if j != k and alive[j] and d2[k, j] < rb:
                        rb = d2[k, j]
                        rarg = j
                nn[k] = rarg
                nnd[k] = rb
            elif v < nnd[k]:
                nn[k] = new
                nnd[k] = v
        nn[new] = new_arg
        nnd[new] = new_best
    return out


def ward_linkage(dist: np.ndarray) -> Dendrogram:
    """Ward linkage over a precomputed symmetric distance matrix.

    Uses the Lance-Williams update on squared distances. At every step the
    globally closest pair is merged; ties go to the smallest ``(left, right)``
    node-id pair. Heights are the square roots of the merged squared
    distances, so two singletons merge at their input distance.
    """
    dist = np.asarray(dist, dtype=np.float64)
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise ValueError(f"expected a square distance matrix, got shape {dist.shape}")
    n = dist.shape[0]
    if n == 0:
        raise ValueError("cannot cluster zero observations")
    if n == 1:
        return Dendrogram(np.empty((0, 4)), 1)
    work = np.empty((2 * n - 1, 2 * n - 1))
    np.multiply(dist, dist, out=work[:n, :n])
    return Dendrogram(_ward_kernel(work, n), n)


def _window_pairs(d: Dendrogram, depth: int):
    """(owner merge index, member merge index) for every depth window."""
    n = d.n_leaves
    m = n - 1
    left, right = d.left, d.right
    owners = [np.arange(m)]
    members = [np.arange(m)]
    cur_owner, cur = owners[0], members[0]
    for _ in range(depth - 1):
        kids = np.concatenate([left[cur], right[cur]])
        kid_owner = np.concatenate([cur_owner, cur_owner])
        keep = kids >= n
        cur, cur_owner = kids[keep] - n, kid_owner[keep]
        if cur.size == 0:
            break
        owners.append(cur_owner)
        members.append(cur)
    return np.concatenate(owners), np.concatenate(members)


def inconsistency(d: Dendrogram, depth: int = 2) -> InconsistencyTable:
    """Inconsistency statistics for each merge.

    The window of a merge is the merge itself plus the internal nodes up to
    ``depth - 1`` levels below it. ``std`` is the population standard
    deviation; a zero std (up to roundoff) gives a zero score.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    m = d.n_leaves - 1
    if m == 0:
        empty = np.empty(0)
        return InconsistencyTable(empty, empty, np.empty(0, dtype=np.intp), empty, depth)
    heights = d.heights
    owner, member = _window_pairs(d, depth)
    h = heights[member]
    count = np.bincount(owner, minlength=m)
    mean = np.bincount(owner, weights=h, minlength=m) / count
    dev = h - mean[owner]
    std = np.sqrt(np.bincount(owner, weights=dev * dev, minlength=m) / count)
    scale = np.zeros(m)
    np.maximum.at(scale, owner, np.abs(h))
    score = np.zeros(m)
    pos = std > STD_RTOL * scale
    score[pos] = (heights[pos] - mean[pos]) / std[pos]
    score = np.round(score, SCORE_DECIMALS)
    return InconsistencyTable(mean, std, count, score, depth)


def _subtree_max(d: Dendrogram, scores: np.ndarray) -> np.ndarray:
    n = d.n_leaves
    out = np.full(2 * n - 1, -np.inf)
    left, right = d.left, d.right
    for s in range(n - 1):
        out[n + s] = max(scores[s], out[left[s]], out[right[s]])
    return out


def _parents(d: Dendrogram) -> np.ndarray:
    n = d.n_leaves
    parent = np.full(2 * n - 1, -1, dtype=np.intp)
    ids = np.arange(n, 2 * n - 1)
    parent[d.left] = ids
    parent[d.right] = ids
    return parent


def _count_clusters(smax: np.ndarray, parent: np.ndarray, threshold: float) -> int:
    parent_max = np.where(parent >= 0, smax[parent], np.inf)
    return int(np.count_nonzero((smax <= threshold) & (parent_max > threshold)))


def _label(d: Dendrogram, smax: np.ndarray, threshold: float) -> ClusterSet:
    n = d.n_leaves
    if n == 1:
        return [[0]]
    head = np.full(2 * n - 1, -1, dtype=np.intp)
    root = 2 * n - 2
    if smax[root] <= threshold:
        head[root] = root
    left, right = d.left, d.right
    for s in range(n - 2, -1, -1):
        h = head[n + s]
        for c in (left[s], right[s]):
            if h >= 0:
                head[c] = h
            elif c < n or smax[c] <= threshold:
                head[c] = c
    groups: dict = {}
    for leaf in range(n):
        groups.setdefault(int(head[leaf]), []).append(leaf)
    return sorted(groups.values(), key=lambda c: c[0])


def flatten(d: Dendrogram, table: InconsistencyTable, threshold: float) -> ClusterSet:
    """Cut the dendrogram with the inconsistent criterion.

    A node becomes one flat cluster when its score and the scores of all
    internal nodes below it are ``<= threshold``. Clusters are returned as
    sorted leaf-index lists ordered by their smallest member.
    """
    if not np.isfinite(threshold):
        raise ValueError("threshold must be finite")
    return _label(d, _subtree_max(d, table.score), threshold)


def order_clusters(clusters: Sequence[Sequence[int]]) -> ClusterSet:
    """Largest first; equal sizes by smallest member index."""
    return sorted((sorted(c) for c in clusters), key=lambda c: (-len(c), c[0]))


def pick_largest(clusters: Sequence[Sequence[int]], k: int) -> ClusterSet:
    return order_clusters(clusters)[:k]


def _threshold_schedule(cfg: RetrievalConfig):
    step = 0
    while True:
        t = cfg.initial_threshold - step * cfg.epsilon
        if t <= cfg.min_threshold:
            yield cfg.min_threshold
            return
        yield t
        step += 1


class WardInconsistent:
    """``R(Z, r)``: Ward linkage cut by the inconsistent criterion at ``r``.

    Usable directly as the ``cluster_fn`` of :func:`retrieve`; the default
    retrieval path does the same thing while reusing one linkage.
    """

    def __init__(self, depth: int = 2):
        self.depth = depth

    def __call__(self, dist: np.ndarray, threshold: float) -> ClusterSet:
        d = ward_linkage(dist)
        return flatten(d, inconsistency(d, self.depth), threshold)


@dataclass(frozen=True)
class Retrieval:
    """Kept clusters plus the ones dropped by the largest-|K| cut.

    ``clusters + dropped`` always partitions the query indices.
    """

    clusters: ClusterSet
    dropped: ClusterSet
    threshold: Optional[float]


def retrieve_full(
    dist: np.ndarray,
    cfg: RetrievalConfig = RetrievalConfig(),
    cluster_fn: Optional[ClusteringFunction] = None,
) -> Retrieval:
    """Threshold-lowering cluster retrieval.

    Starting from ``cfg.initial_threshold``, the threshold is lowered by
    ``cfg.epsilon`` while fewer than ``cfg.required_clusters`` clusters come
    out, stopping at ``cfg.min_threshold``. Extra clusters are dropped keeping
    the largest. Kept clusters are ordered largest first.
    """
    dist = np.asarray(dist, dtype=np.float64)
    n = dist.shape[0]
    k = cfg.required_clusters
    if n == 0:
        return Retrieval([], [], None)
    if n < k:
        return Retrieval([[i] for i in range(n)], [], None)

    chosen = cfg.min_threshold
    if cluster_fn is None:
        d = ward_linkage(dist)
        smax = _subtree_max(d, inconsistency(d, cfg.depth).score)
        parent = _parents(d)
        for t in _threshold_schedule(cfg):
            chosen = t
            if _count_clusters(smax, parent, t) >= k:
                break
        clusters = _label(d, smax, chosen)
    else:
        for t in _threshold_schedule(cfg):
            chosen = t
            clusters = cluster_fn(dist, t)
            if len(clusters) >= k:
                break
    ranked = order_clusters(clusters)
    return Retrieval(ranked[:k], ranked[k:], float(chosen))


def retrieve(
    dist: np.ndarray,
    cfg: RetrievalConfig = RetrievalConfig(),
    cluster_fn: Optional[ClusteringFunction] = None,
) -> ClusterSet:
    """The kept clusters of :func:`retrieve_full`."""
    return retrieve_full(dist, cfg, cluster_fn).clusters


def cophenetic_leaf_sequence(d: Dendrogram) -> List[int]:
    """Leaves left to right as the dendrogram was built (no reordering)."""
    if d.n_leaves == 1:
        return [0]
    return d.leaves_under(2 * d.n_leaves - 2)
