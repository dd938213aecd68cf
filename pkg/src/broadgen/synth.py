"""Seeded synthetic items with planted query clusters.

Every item gets a templated title. A few disjoint groups of title tokens
("cores") each seed one planted cluster of pre-queries: the core tokens,
mostly in title order, plus modifiers drawn from a pool private to that
cluster. Post-queries mix fresh queries around the same cores (relevant)
with off-topic queries that share a single title token (not relevant).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

PROFILES: Dict[str, Dict[str, Sequence[str]]] = {
    "apparel": {
        "brand": ["reebok", "nike", "adidas", "puma", "asics", "fila", "vans", "converse", "saucony", "brooks"],
        "category": ["shoe", "sneaker", "jacket", "hoodie", "boot", "sandal", "jersey", "legging"],
        "color": ["black", "white", "red", "blue", "green", "grey", "navy", "pink"],
        "material": ["leather", "suede", "mesh", "canvas", "wool", "nylon", "cotton"],
        "style": ["running", "trail", "retro", "classic", "slim", "training", "vintage"],
        "gender": ["men", "women", "kid", "unisex"],
        "modifier": [
            "new", "used", "cheap", "sale", "original", "authentic", "lightweight", "waterproof",
            "wide", "narrow", "limited", "edition", "genuine", "premium", "discount", "box",
            "pair", "deal", "outlet", "free", "shipping", "lot", "rare", "mint",
        ],
        "offtopic": ["phone", "case", "charger", "lamp", "mug", "poster", "watch", "wallet", "bag", "hat"],
    },
    "electronics": {
        "brand": ["samsung", "apple", "sony", "lenovo", "dell", "asus", "acer", "lg", "bose", "jbl"],
        "category": ["laptop", "tablet", "phone", "headphone", "speaker", "monitor", "camera", "watch"],
        "color": ["black", "silver", "white", "gold", "blue", "graphite", "red", "green"],
        "material": ["aluminum", "plastic", "glass", "titanium", "carbon", "steel", "rubber"],
        "style": ["pro", "mini", "max", "ultra", "slim", "gaming", "wireless"],
        "gender": ["2022", "2023", "2024", "2025"],
        "modifier": [
            "new", "refurbished", "used", "unlocked", "sealed", "cheap", "sale", "original",
            "bundle", "charger", "case", "warranty", "fast", "deal", "open", "box", "lot",
            "genuine", "oem", "spare", "parts", "repair", "mint", "boxed",
        ],
        "offtopic": ["shoe", "jacket", "mug", "poster", "candle", "rug", "pillow", "toy", "book", "hat"],
    },
}

FACETS = ("brand", "gender", "style", "category", "color", "material")


@dataclass(frozen=True)
class SynthConfig:
    profile: str = "apparel"
    n_clusters: int = 3
    queries_per_cluster: Tuple[int, int] = (4, 12)
    min_modifiers: int = 0
    max_modifiers: int = 2
    # every query of a cluster gets modifiers no other query of it uses
    unique_modifiers: bool = False
    swap_prob: float = 0.15
    low_impression_frac: float = 0.1
    post_per_cluster: Tuple[int, int] = (3, 10)
    offtopic_queries: Tuple[int, int] = (2, 8)
    augmentation: int = 2


# Internally homogeneous planted clusters: core plus one private modifier per
# query, so every within-cluster pair is equidistant.
SEPARATED = SynthConfig(
    queries_per_cluster=(2, 8), min_modifiers=1, max_modifiers=1, unique_modifiers=True, low_impression_frac=0.0
)


def _title(facets: Dict[str, str], size: int) -> List[str]:
    return [facets[f] for f in FACETS] + ["size", str(size)]


def _cores(rng: np.random.Generator, n_clusters: int) -> List[Tuple[str, ...]]:
    """Disjoint facet groups of two facets, occasionally three."""
    if 2 * n_clusters > len(FACETS):
        raise ValueError(f"at most {len(FACETS) // 2} planted clusters fit the title template")
    order = [int(i) for i in rng.permutation(len(FACETS))]
    groups = [order[2 * c:2 * c + 2] for c in range(n_clusters)]
    for extra in order[2 * n_clusters:]:
        if rng.random() < 0.3:
            groups[int(rng.integers(n_clusters))].append(extra)
    return [tuple(FACETS[j] for j in sorted(g)) for g in groups]


def _query(rng, core_tokens: List[str], mods: Sequence[str], swap_prob: float) -> List[str]:
    toks = list(core_tokens)
    if len(toks) >= 2 and rng.random() < swap_prob:
        j = int(rng.integers(len(toks) - 1))
        toks[j], toks[j + 1] = toks[j + 1], toks[j]
    for m in mods:
        if rng.random() < 0.5:
            toks.append(m)
        else:
            toks.insert(0, m)
    return toks


def _cluster_queries(rng, n: int, core_tokens: List[str], pool: List[str], cfg: "SynthConfig") -> List[List[str]]:
    free = list(pool)
    out = []
    for _ in range(n):
        n_mod = int(rng.integers(cfg.min_modifiers, cfg.max_modifiers + 1))
        source = free if cfg.unique_modifiers else pool
        if n_mod > len(source):
            break
        picked = [source[i] for i in sorted(rng.choice(len(source), size=n_mod, replace=False))] if n_mod else []
        if cfg.unique_modifiers:
            free = [m for m in free if m not in picked]
        out.append(_query(rng, core_tokens, picked, cfg.swap_prob))
    return out


def synth_item(rng: np.random.Generator, item_id: str, cfg: SynthConfig = SynthConfig()) -> Tuple[dict, dict]:
    """One (pre record, post record) pair."""
    prof = PROFILES[cfg.profile]
    facets = {f: prof[f][int(rng.integers(len(prof[f])))] for f in FACETS}
    size = int(rng.integers(5, 14))
    title = _title(facets, size)
    cores = _cores(rng, cfg.n_clusters)
    mods = [str(m) for m in rng.permutation(prof["modifier"])]
    per = len(mods) // cfg.n_clusters
    pools = [mods[c * per:(c + 1) * per] for c in range(cfg.n_clusters)]

    pre, post = [], []
    for c, core in enumerate(cores):
        core_tokens = [facets[f] for f in core]
        lo, hi = cfg.queries_per_cluster
        for q in _cluster_queries(rng, int(rng.integers(lo, hi + 1)), core_tokens, pools[c], cfg):
            low = rng.random() < cfg.low_impression_frac
            imp = int(rng.integers(1, 5)) if low else int(rng.integers(5, 300))
            pre.append({"text": " ".join(q), "impressions": imp, "cluster": c})
        lo, hi = cfg.post_per_cluster
        for _ in range(int(rng.integers(lo, hi + 1))):
            n_mod = int(rng.integers(0, cfg.max_modifiers + 1))
            mods = [pools[c][i] for i in sorted(rng.choice(len(pools[c]), size=n_mod, replace=False))]
            q = _query(rng, core_tokens, mods, cfg.swap_prob)
            post.append({"text": " ".join(q), "volume": int(rng.integers(1, 100)), "relevant": True})
    lo, hi = cfg.offtopic_queries
    for _ in range(int(rng.integers(lo, hi + 1))):
        anchor = title[int(rng.integers(len(FACETS)))]
        junk = [prof["offtopic"][i] for i in rng.choice(len(prof["offtopic"]), size=2, replace=False)]
        post.append({"text": " ".join([anchor] + junk), "volume": int(rng.integers(1, 100)), "relevant": False})

    augmentation = []
    for _ in range(cfg.augmentation):
        c = int(rng.integers(cfg.n_clusters))
        mod = pools[c][int(rng.integers(len(pools[c])))]
        augmentation.append(" ".join(_query(rng, [facets[f] for f in cores[c]], [mod], 0.0)))

    title_text = " ".join(title)
    pre_record = {
        "item_id": item_id,
        "title": title_text,
        "pre_queries": pre,
        "augmentation_keyphrases": augmentation,
    }
    post_record = {"item_id": item_id, "title": title_text, "queries": post}
    return pre_record, post_record


def synth(seed: int, n_items: int, cfg: SynthConfig = SynthConfig()) -> Tuple[List[dict], List[dict]]:
    """``n_items`` (pre, post) records; the same seed always yields the same data."""
    if cfg.profile not in PROFILES:
        raise ValueError(f"unknown profile {cfg.profile!r}; choose from {sorted(PROFILES)}")
    rng = np.random.default_rng(seed)
    width = max(6, len(str(max(n_items - 1, 0))))
    pre, post = [], []
    for i in range(n_items):
        a, b = synth_item(rng, f"item-{i:0{width}d}", cfg)
        pre.append(a)
        post.append(b)
    return pre, post


# Roughly 200 distinct queries per item after ingest; used for throughput runs.
LARGE = SynthConfig(queries_per_cluster=(100, 104), max_modifiers=3, low_impression_frac=0.0)
