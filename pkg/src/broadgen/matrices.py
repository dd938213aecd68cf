"""Query vectorization: anchor, query-query distance, augmented and cosine matrices.

Each query is described by which title tokens it contains (the anchor
block) and how far it is from every other query in shared-token terms
(the distance block). Rows of the concatenation are L2-normalized and
compared with cosine distance to get the matrix fed to clustering.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .tokenizer import TokenList

_ROUNDOFF = 1e-12


def _incidence(queries: Sequence[TokenList], vocab: dict) -> np.ndarray:
    rows = np.zeros((len(queries), len(vocab)), dtype=np.float64)
    for i, q in enumerate(queries):
        for tok in set(q):
            j = vocab.get(tok)
            if j is not None:
                rows[i, j] = 1.0
    return rows


def build_anchor(queries: Sequence[TokenList], title: TokenList) -> np.ndarray:
    """Anchor matrix of shape ``(len(queries), len(title))``.

    Column ``j`` is title position ``j``; a repeated title token gets one
    column per occurrence. Rows are divided by their sum, zero rows stay zero.
    """
    n, m = len(queries), len(title)
    anchor = np.zeros((n, m), dtype=np.float64)
    if m == 0:
        return anchor
    for i, q in enumerate(queries):
        qs = set(q)
        for j, tok in enumerate(title):
            if tok in qs:
                anchor[i, j] = 1.0
    sums = anchor.sum(axis=1, keepdims=True)
    np.divide(anchor, sums, out=anchor, where=sums > 0)
    return anchor


def shared_token_counts(queries: Sequence[TokenList]) -> np.ndarray:
    """``S[i, j]`` = number of distinct tokens shared by queries i and j."""
    vocab: dict = {}
    for q in queries:
        for tok in q:
            vocab.setdefault(tok, len(vocab))
    inc = _incidence(queries, vocab)
    return inc @ inc.T


def build_query_distance(queries: Sequence[TokenList]) -> np.ndarray:
    """``D = 1 - S`` where each row of the shared-count matrix is divided by its max.

    The row-wise normalization makes ``D`` asymmetric in general; that is
    intended and symmetry is restored by the cosine step.
    """
    sim = shared_token_counts(queries)
    row_max = sim.max(axis=1, keepdims=True) if sim.size else sim
    np.divide(sim, row_max, out=sim, where=row_max > 0)
    return 1.0 - sim


def augment_and_normalize(anchor: np.ndarray, distance: np.ndarray) -> np.ndarray:
    if anchor.shape[0] != distance.shape[0]:
        raise ValueError(
            f"row mismatch: anchor has {anchor.shape[0]} rows, distance has {distance.shape[0]}"
        )
    z = np.hstack([anchor, distance])
    norms = np.sqrt(np.einsum("ij,ij->i", z, z))[:, None]
    np.divide(z, norms, out=z, where=norms > 0)
    return z


def pairwise_cosine_distance(z: np.ndarray) -> np.ndarray:
    """Cosine distance between rows.

    A zero row is at distance 1 from every non-zero row and at distance 0
    from other zero rows (in the query matrix two zero rows can only come
    from queries with the same token set).

    Output is exactly symmetric with a zero diagonal and entries clipped to [0, 2].
    """
    z = np.asarray(z, dtype=np.float64)
    norms = np.sqrt(np.einsum("ij,ij->i", z, z))
    nonzero = norms > 0
    unit = np.zeros_like(z)
    unit[nonzero] = z[nonzero] / norms[nonzero, None]
    gram = unit @ unit.T
    dist = 1.0 - gram
    dist[~nonzero, :] = 1.0
    dist[:, ~nonzero] = 1.0
    dist[np.ix_(~nonzero, ~nonzero)] = 0.0
    # gram is computed symmetric up to rounding; enforce it exactly
    dist = np.triu(dist, 1)
    dist = dist + dist.T
    np.clip(dist, 0.0, 2.0, out=dist)
    # duplicates must tie exactly at 0, not at a few ulps
    dist[dist < _ROUNDOFF] = 0.0
    return dist


def query_distance_matrix(queries: Sequence[TokenList], title: TokenList) -> np.ndarray:
    """Full input-generation path: queries and title to the clustering distance matrix."""
    anchor = build_anchor(queries, title)
    distance = build_query_distance(queries)
    return pairwise_cosine_distance(augment_and_normalize(anchor, distance))
