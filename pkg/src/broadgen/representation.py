"""Cluster representation: from a group of queries to one ordered keyphrase."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .tokenizer import TokenList, detokenize

Edge = Tuple[str, str]

MIN_KEYPHRASE_TOKENS = 2


@dataclass
class PrecedenceGraph:
    vertices: Tuple[str, ...]
    edges: Dict[Edge, int] = field(default_factory=dict)

    def successors(self, u: str) -> List[str]:
        return [v for (a, v) in self.edges if a == u]

    def adjacency(self) -> Dict[str, List[str]]:
        adj: Dict[str, List[str]] = {v: [] for v in self.vertices}
        for u, v in self.edges:
            adj[u].append(v)
        return adj

    def without(self, removed: Iterable[Edge]) -> "PrecedenceGraph":
        drop = set(removed)
        return PrecedenceGraph(self.vertices, {e: w for e, w in self.edges.items() if e not in drop})


@dataclass(frozen=True)
class Keyphrase:
    tokens: TokenList
    source_cluster: int
    cluster_size: int
    support: int
    supporting_queries: Tuple[int, ...] = ()

    @property
    def text(self) -> str:
        return detokenize(self.tokens)

    def to_dict(self) -> dict:
        return {"text": self.text, "cluster_size": self.cluster_size, "support": self.support}


def common_tokens(cluster_queries: Sequence[TokenList]) -> FrozenSet[str]:
    if not cluster_queries:
        raise ValueError("empty cluster")
    it = iter(cluster_queries)
    out = set(next(it))
    for q in it:
        out.intersection_update(q)
    return frozenset(out)


def _choose_members(mask: int, size: int, lengths: Sequence[int]) -> Tuple[int, ...]:
    members = [i for i in range(len(lengths)) if mask >> i & 1]
    members.sort(key=lambda i: (-lengths[i], i))
    return tuple(sorted(members[:size]))


def subset_fallback(
    cluster_queries: Sequence[TokenList],
) -> Optional[Tuple[Tuple[int, ...], FrozenSet[str]]]:
    """Largest sub-cluster whose queries still share more than one token.

    Equivalent to trying every subset of size ``m-1``, then ``m-2``, down to
    2, and keeping the first size at which some subset shares at least two
    tokens. Within that size the subset with the most common tokens wins,
    then the largest total query length, then the smallest index tuple.

    Rather than enumerating subsets, it searches token sets: the largest
    feasible size is the highest support of any token pair, and the best
    common set is a maximum-size token set with that support.

    Returns ``(member indices, common tokens)`` or ``None`` when no subset
    of two or more queries shares two tokens.
    """
    m = len(cluster_queries)
    if m < 3:
        return None
    sets = [set(q) for q in cluster_queries]
    lengths = [len(q) for q in cluster_queries]

    token_mask: Dict[str, int] = {}
    for i, s in enumerate(sets):
        for tok in s:
            token_mask[tok] = token_mask.get(tok, 0) | (1 << i)

    pair_support = 0
    pairs: Dict[FrozenSet[str], int] = {}
    frequent_tokens = sorted(t for t, mk in token_mask.items() if bin(mk).count("1") >= 2)
    for a, b in combinations(frequent_tokens, 2):
        mk = token_mask[a] & token_mask[b]
        c = bin(mk).count("1")
        if c >= 2:
            pairs[frozenset((a, b))] = mk
            pair_support = max(pair_support, c)
    if pair_support < 2:
        return None
    size = min(pair_support, m - 1)

    level = {s: mk for s, mk in pairs.items() if bin(mk).count("1") >= size}
    while True:
        nxt: Dict[FrozenSet[str], int] = {}
        items = sorted(level.items(), key=lambda kv: sorted(kv[0]))
        for (s1, m1), (s2, m2) in combinations(items, 2):
            union = s1 | s2
            if len(union) != len(s1) + 1 or union in nxt:
                continue
            mk = m1 & m2
            if bin(mk).count("1") >= size:
                nxt[union] = mk
        if not nxt:
            break
        level = nxt

    best = None
    for mk in level.values():
        members = _choose_members(mk, size, lengths)
        key = (-sum(lengths[i] for i in members), members)
        if best is None or key < best:
            best = key
    members = best[1]
    return members, common_tokens([cluster_queries[i] for i in members])


def build_precedence_graph(
    cluster_queries: Sequence[TokenList],
    vocabulary: Optional[Iterable[str]] = None,
) -> PrecedenceGraph:
    """Directed token graph; ``u -> v`` weighs the number of queries with u before v.

    With ``vocabulary`` the graph is restricted to those tokens.
    """
    keep = None if vocabulary is None else set(vocabulary)
    verts = set()
    edges: Counter = Counter()
    for q in cluster_queries:
        toks = [t for t in q if keep is None or t in keep]
        verts.update(toks)
        seen = set()
        for i, u in enumerate(toks):
            for v in toks[i + 1:]:
                if u != v and (u, v) not in seen:
                    seen.add((u, v))
                    edges[(u, v)] += 1
    if keep is not None:
        verts |= keep
    return PrecedenceGraph(tuple(sorted(verts)), dict(edges))


def strongly_connected_components(g: PrecedenceGraph) -> List[List[str]]:
    """Tarjan's algorithm, iterative."""
    adj = {u: sorted(vs) for u, vs in g.adjacency().items()}
    index: Dict[str, int] = {}
    low: Dict[str, int] = {}
    on_stack = set()
    stack: List[str] = []
    out: List[List[str]] = []
    counter = 0
    for root in g.vertices:
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack.add(v)
            recurse = False
            nbrs = adj[v]
            while i < len(nbrs):
                w = nbrs[i]
                i += 1
                if w not in index:
                    work.append((v, i))
                    work.append((w, 0))
                    recurse = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return out


def break_cycles(g: PrecedenceGraph) -> Tuple[PrecedenceGraph, List[Edge]]:
    """Greedily drop the lightest edge lying on a cycle until none is left.

    Ties on weight go to the lexicographically smallest ``(u, v)``. Returns
    the acyclic graph and the removed edges in removal order.
    """
    removed: List[Edge] = []
    edges = dict(g.edges)
    while True:
        comp_of = {}
        for ci, comp in enumerate(strongly_connected_components(PrecedenceGraph(g.vertices, edges))):
            for v in comp:
                comp_of[v] = ci
        cyclic = [e for e in edges if comp_of[e[0]] == comp_of[e[1]]]
        if not cyclic:
            return PrecedenceGraph(g.vertices, edges), removed
        victim = min(cyclic, key=lambda e: (edges[e], e))
        del edges[victim]
        removed.append(victim)


def topological_order(g: PrecedenceGraph) -> List[str]:
    """Reverse DFS post-order of an acyclic graph.

    Roots and neighbours are visited in descending token order, which makes
    the result favour lexicographically smaller tokens wherever the edges
    leave the order free.
    """
    adj = {u: sorted(vs, reverse=True) for u, vs in g.adjacency().items()}
    visited = set()
    post: List[str] = []
    for root in sorted(g.vertices, reverse=True):
        if root in visited:
            continue
        visited.add(root)
        work = [(root, iter(adj[root]))]
        while work:
            v, it = work[-1]
            for w in it:
                if w not in visited:
                    visited.add(w)
                    work.append((w, iter(adj[w])))
                    break
            else:
                work.pop()
                post.append(v)
    post.reverse()
    return post


def global_token_order(g: PrecedenceGraph) -> List[str]:
    acyclic, _ = break_cycles(g)
    return topological_order(acyclic)


def represent_cluster(
    cluster: Sequence[int], queries: Sequence[TokenList]
) -> Optional[Tuple[TokenList, Tuple[int, ...]]]:
    """Ordered representation of one cluster and the query indices behind it."""
    members = list(cluster)
    qs = [queries[i] for i in members]
    common = common_tokens(qs)
    if len(common) < MIN_KEYPHRASE_TOKENS:
        fallback = subset_fallback(qs)
        if fallback is None:
            return None
        picked, common = fallback
        members = [members[i] for i in picked]
        qs = [queries[i] for i in members]
    graph = build_precedence_graph(qs, vocabulary=common)
    return tuple(global_token_order(graph)), tuple(members)


def generate_keyphrases(
    clusters: Sequence[Sequence[int]],
    queries: Sequence[TokenList],
    max_keyphrases: Optional[int] = None,
) -> List[Keyphrase]:
    """One keyphrase per representable cluster, largest cluster first.

    Keyphrases with the same token set are kept once, from the larger
    cluster (or the earlier one on equal size).
    """
    found: Dict[FrozenSet[str], Keyphrase] = {}
    for idx, cluster in enumerate(clusters):
        rep = represent_cluster(cluster, queries)
        if rep is None:
            continue
        tokens, support = rep
        kp = Keyphrase(tokens, idx, len(cluster), len(support), support)
        key = frozenset(tokens)
        prev = found.get(key)
        if prev is None or (kp.cluster_size, -kp.source_cluster) > (prev.cluster_size, -prev.source_cluster):
            found[key] = kp
    out = sorted(found.values(), key=lambda k: (-k.cluster_size, k.source_cluster))
    return out if max_keyphrases is None else out[:max_keyphrases]
