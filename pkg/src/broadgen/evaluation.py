"""Offline evaluation of broad-match keyphrases against future queries.

Two metric families:

* relevant reach (RRE): volume-weighted precision and recall of the
  queries a keyphrase set broad-matches, judged by a relevance oracle;
* proportional token reach (PTR): token-set similarity between keyphrases
  and queries with separate penalties for tokens the keyphrase misses and
  tokens it adds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

from .tokenizer import TokenList

AGGREGATE_KEYPHRASE_MAX = "keyphrase_max"
AGGREGATE_QUERY_MAX = "query_max"


@dataclass(frozen=True)
class PostQuery:
    tokens: TokenList
    weight: float = 1.0
    relevant: Optional[bool] = None


@dataclass(frozen=True)
class PTRParams:
    alpha: float = 1.0
    beta: float = 1.5

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("PTR penalties must be non-negative")

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta}


# the two penalty regimes compared in the evaluation tables
PTR_DEFAULT = PTRParams(1.0, 1.5)
PTR_SWAPPED = PTRParams(1.5, 1.0)


def broad_match(keyphrase: TokenList, query: TokenList) -> bool:
    """Whether ``keyphrase`` broad-matches ``query``.

    Token sets are compared regardless of order. Keyphrases of three or more
    distinct tokens may miss one of them.
    """
    k, q = set(keyphrase), set(query)
    if not k or not q:
        return False
    n = len(k)
    if n >= 3:
        return len(k & q) >= n - 1
    return k <= q


def strict_broad_match(keyphrase: TokenList, query: TokenList) -> bool:
    k = set(keyphrase)
    return bool(k) and bool(query) and k <= set(query)


def matched_any(keyphrases: Iterable[TokenList], query: TokenList) -> bool:
    return any(broad_match(k, query) for k in keyphrases)


class RelevanceOracle:
    """Per-query relevance for an item.

    Labels attached to the post queries win. Otherwise a query is relevant
    when at least ``threshold`` of its distinct tokens occur in the title.
    ``mode="labels"`` refuses to guess and raises on a missing label.
    """

    def __init__(self, mode: str = "auto", threshold: float = 0.5):
        if mode not in ("auto", "labels", "lexical"):
            raise ValueError(f"unknown relevance mode {mode!r}")
        if not 0.0 <= threshold <= 1.0:
            raise ValueError("threshold must be in [0, 1]")
        self.mode = mode
        self.threshold = threshold

    def lexical(self, title: TokenList, query: TokenList) -> bool:
        q = set(query)
        if not q:
            return False
        return len(q & set(title)) >= self.threshold * len(q)

    def __call__(self, query: PostQuery, title: Optional[TokenList] = None) -> bool:
        if self.mode != "lexical" and query.relevant is not None:
            return bool(query.relevant)
        if self.mode == "labels":
            raise ValueError("relevance label missing and lexical fallback disabled")
        if title is None:
            raise ValueError("lexical relevance needs the item title")
        return self.lexical(title, query.tokens)

    def to_dict(self) -> dict:
        return {"mode": self.mode, "threshold": self.threshold}


@dataclass(frozen=True)
class RREScore:
    precision: float
    recall: float
    f1: float
    precision_defined: bool = True
    recall_defined: bool = True


def _f1(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def rre_from_flags(weights: Sequence[float], matched: Sequence[bool], relevant: Sequence[bool]) -> RREScore:
    """Weighted precision/recall given per-query match and relevance flags."""
    hit = 0.0
    reached = 0.0
    rel = 0.0
    for w, m, r in zip(weights, matched, relevant):
        if m:
            reached += w
            if r:
                hit += w
        if r:
            rel += w
    p_def, r_def = reached > 0, rel > 0
    p = hit / reached if p_def else 0.0
    r = hit / rel if r_def else 0.0
    return RREScore(p, r, _f1(p, r), p_def, r_def)


def rre(
    keyphrases: Sequence[TokenList],
    post: Sequence[PostQuery],
    relevance: Sequence[bool],
) -> RREScore:
    """Relevant-reach precision, recall and F1 for one item.

    ``relevance[i]`` is the oracle's verdict on ``post[i]``. Undefined
    metrics (zero denominators) are reported as 0 with the ``*_defined``
    flag cleared.
    """
    sets = [frozenset(k) for k in keyphrases if k]
    matched = [_matched_sets(sets, frozenset(q.tokens)) for q in post]
    return rre_from_flags([q.weight for q in post], matched, relevance)


def _matched_sets(keysets: Sequence[frozenset], q: frozenset) -> bool:
    if not q:
        return False
    for k in keysets:
        n = len(k)
        common = len(k & q)
        if common == n or (n >= 3 and common >= n - 1):
            return True
    return False


def oracle_rre(post: Sequence[PostQuery], relevance: Sequence[bool]) -> RREScore:
    """RRE with every post query treated as matched."""
    return rre_from_flags([q.weight for q in post], [True] * len(post), relevance)


def ptr_pair(keyphrase: TokenList, query: TokenList, params: PTRParams = PTR_DEFAULT) -> float:
    k, q = set(keyphrase), set(query)
    inter = len(q & k)
    denom = inter + params.alpha * len(q - k) + params.beta * len(k - q)
    return inter / denom if denom > 0 else 0.0


def ptr_item(
    keyphrases: Sequence[TokenList],
    post: Sequence[PostQuery],
    params: PTRParams = PTR_DEFAULT,
    aggregation: str = AGGREGATE_KEYPHRASE_MAX,
) -> float:
    """Item-level PTR.

    ``keyphrase_max``: volume-weighted mean over queries for each keyphrase,
    then the best keyphrase. ``query_max``: best keyphrase per query, then the
    weighted mean over queries.
    """
    if not keyphrases or not post:
        return 0.0
    total = sum(q.weight for q in post)
    if total <= 0:
        return 0.0
    if aggregation == AGGREGATE_KEYPHRASE_MAX:
        return max(
            sum(q.weight * ptr_pair(k, q.tokens, params) for q in post) / total for k in keyphrases
        )
    if aggregation == AGGREGATE_QUERY_MAX:
        return sum(q.weight * max(ptr_pair(k, q.tokens, params) for k in keyphrases) for q in post) / total
    raise ValueError(f"unknown PTR aggregation {aggregation!r}")


def prequery_baseline(
    pre_queries: Sequence[TokenList], weights: Sequence[float], n: int
) -> List[TokenList]:
    """Top-``n`` pre-queries by weight, ties in lexicographic order of their text."""
    order = sorted(range(len(pre_queries)), key=lambda i: (-weights[i], " ".join(pre_queries[i])))
    return [pre_queries[i] for i in order[:n]]


@dataclass
class ItemScore:
    item_id: str
    precision: float
    recall: float
    f1: float
    ptr: Optional[float]
    precision_defined: bool = True
    recall_defined: bool = True
    n_keyphrases: int = 0
    n_queries: int = 0

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "ptr": self.ptr,
            "precision_defined": self.precision_defined,
            "recall_defined": self.recall_defined,
            "n_keyphrases": self.n_keyphrases,
            "n_queries": self.n_queries,
        }


@dataclass
class EvalReport:
    model: str
    items: List[ItemScore] = field(default_factory=list)
    params: Dict[str, object] = field(default_factory=dict)
    unmatched_items: int = 0

    def aggregate(self) -> Dict[str, object]:
        """Item means of each metric over the items where it is defined.

        Recall and F1 average over items with at least one relevant query
        (F1 is 0 there when nothing matched); precision over items where some
        query matched. Undefined counts are reported alongside.
        """

        def mean(vals: List[float]) -> float:
            return math.fsum(vals) / len(vals) if vals else 0.0

        with_p = [s for s in self.items if s.precision_defined]
        with_r = [s for s in self.items if s.recall_defined]
        ptrs = [s.ptr for s in self.items if s.ptr is not None]
        return {
            "items": len(self.items),
            "precision": mean([s.precision for s in with_p]),
            "recall": mean([s.recall for s in with_r]),
            "f1": mean([s.f1 for s in with_r]),
            "ptr": mean(ptrs) if ptrs else None,
            "precision_undefined": len(self.items) - len(with_p),
            "recall_undefined": len(self.items) - len(with_r),
        }

    def summary(self) -> Dict[str, object]:
        return {
            "model": self.model,
            "params": self.params,
            "aggregate": self.aggregate(),
            "unmatched_items": self.unmatched_items,
        }


def score_item(
    item_id: str,
    keyphrases: Optional[Sequence[TokenList]],
    post: Sequence[PostQuery],
    oracle: RelevanceOracle,
    title: Optional[TokenList] = None,
    ptr_params: PTRParams = PTR_DEFAULT,
    ptr_aggregation: str = AGGREGATE_KEYPHRASE_MAX,
) -> ItemScore:
    """Score one item; ``keyphrases=None`` evaluates the all-matching oracle."""
    relevance = [oracle(q, title) for q in post]
    if keyphrases is None:
        s = oracle_rre(post, relevance)
        ptr = None
        nk = 0
    else:
        s = rre(keyphrases, post, relevance)
        ptr = ptr_item(keyphrases, post, ptr_params, ptr_aggregation)
        nk = len(keyphrases)
    return ItemScore(item_id, s.precision, s.recall, s.f1, ptr, s.precision_defined, s.recall_defined, nk, len(post))
