"""Records, line-delimited JSON I/O and input shaping.

Input files hold one JSON object per line:

* items: ``{"item_id", "title", "pre_queries": [{"text", "impressions"}],
  "augmentation_keyphrases": [str, ...]}``
* post queries: ``{"item_id", "title"?, "queries": [{"text", "volume"?, "relevant"?}]}``
* keyphrases: ``{"item_id", "keyphrases": [{"text", "cluster_size", "support"}]}``,
  or ``{"item_id", "mode": "oracle", "keyphrases": []}`` for the oracle baseline.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from .evaluation import PostQuery
from .tokenizer import NormalizationConfig, TokenList, tokenize

log = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass
class ItemRecord:
    item_id: str
    title: str
    pre_queries: List[Tuple[str, int]] = field(default_factory=list)
    augmentation_keyphrases: List[str] = field(default_factory=list)

    @classmethod
    def from_dict(cls, d: dict) -> "ItemRecord":
        if "item_id" not in d:
            raise ValueError("record without item_id")
        pre = [(q["text"], int(q.get("impressions", 0))) for q in d.get("pre_queries", [])]
        return cls(str(d["item_id"]), d.get("title", ""), pre, list(d.get("augmentation_keyphrases") or []))

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "title": self.title,
            "pre_queries": [{"text": t, "impressions": n} for t, n in self.pre_queries],
            "augmentation_keyphrases": list(self.augmentation_keyphrases),
        }


@dataclass
class PreparedItem:
    """An item after tokenization, filtering, dedup and capping."""

    item_id: str
    title: TokenList
    queries: List[TokenList]
    weights: List[float]


@dataclass
class PostRecord:
    item_id: str
    queries: List[PostQuery]
    title: Optional[TokenList] = None


@dataclass
class ReadStats:
    lines: int = 0
    malformed: int = 0
    malformed_lines: List[int] = field(default_factory=list)


def iter_jsonl(path: PathLike, stats: Optional[ReadStats] = None) -> Iterator[dict]:
    """Yield one dict per non-blank line; malformed lines are logged, counted and skipped."""
    stats = stats if stats is not None else ReadStats()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            stats.lines += 1
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise ValueError("not an object")
            except ValueError as exc:
                stats.malformed += 1
                stats.malformed_lines.append(lineno)
                log.warning("%s:%d: skipping malformed line (%s)", path, lineno, exc)
                continue
            yield obj


def dumps(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def write_jsonl(path: PathLike, rows) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(row if isinstance(row, str) else dumps(row))
            fh.write("\n")
            n += 1
    return n


def shape_queries(
    queries: Sequence[Tuple[TokenList, float]],
    cap: int,
) -> Tuple[List[TokenList], List[float]]:
    """Merge identical token lists (summing weights) and keep the ``cap`` heaviest.

    Output is ordered by weight descending, ties by token text.
    """
    merged: Dict[TokenList, float] = {}
    for toks, w in queries:
        if toks:
            merged[toks] = merged.get(toks, 0.0) + w
    ranked = sorted(merged.items(), key=lambda kv: (-kv[1], " ".join(kv[0])))[:cap]
    return [t for t, _ in ranked], [w for _, w in ranked]


def prepare_item(
    record: ItemRecord,
    normalization: NormalizationConfig,
    query_cap: int = 1000,
    min_impressions: int = 5,
    title_overlap_filter: bool = True,
    use_augmentation: bool = True,
) -> PreparedItem:
    """Tokenize and shape one item's input queries.

    Pre-queries under ``min_impressions`` are dropped, as are queries sharing
    no token with the title when the overlap filter is on. Augmentation
    keyphrases join as weight-1 queries; they have no impressions, so only
    the overlap filter applies to them.
    """
    title = tokenize(record.title, normalization)
    title_set = set(title)

    def overlaps(toks: TokenList) -> bool:
        return not title_overlap_filter or not title_set.isdisjoint(toks)

    kept: List[Tuple[TokenList, float]] = []
    for text, impressions in record.pre_queries:
        if impressions < min_impressions:
            continue
        toks = tokenize(text, normalization)
        if toks and overlaps(toks):
            kept.append((toks, float(impressions)))
    if use_augmentation:
        for text in record.augmentation_keyphrases:
            toks = tokenize(text, normalization)
            if toks and overlaps(toks):
                kept.append((toks, 1.0))
    queries, weights = shape_queries(kept, query_cap)
    return PreparedItem(record.item_id, title, queries, weights)


def parse_post_record(
    d: dict,
    normalization: NormalizationConfig,
    query_cap: int = 1000,
    title_overlap_filter: bool = True,
) -> PostRecord:
    """Post-query record with volumes (default 1) and optional labels.

    Identical token lists are merged (volumes summed, a positive label wins)
    and the ``query_cap`` heaviest are kept.
    """
    title = tokenize(d["title"], normalization) if d.get("title") is not None else None
    merged: Dict[TokenList, List] = {}
    for q in d.get("queries", []):
        toks = tokenize(q["text"], normalization)
        if not toks:
            continue
        if title_overlap_filter and title is not None and set(title).isdisjoint(toks):
            continue
        vol = q.get("volume")
        w = 1.0 if vol is None else float(vol)
        label = q.get("relevant")
        slot = merged.setdefault(toks, [0.0, None])
        slot[0] += w
        if label is not None:
            slot[1] = bool(label) or bool(slot[1])
    ranked = sorted(merged.items(), key=lambda kv: (-kv[1][0], " ".join(kv[0])))[:query_cap]
    return PostRecord(
        str(d["item_id"]),
        [PostQuery(t, w, lab) for t, (w, lab) in ranked],
        title,
    )
