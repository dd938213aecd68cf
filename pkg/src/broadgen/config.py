"""Pipeline configuration, loadable from and savable to a JSON file."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Union

from .clustering import RetrievalConfig
from .evaluation import AGGREGATE_KEYPHRASE_MAX, PTRParams
from .tokenizer import NormalizationConfig


@dataclass(frozen=True)
class PipelineConfig:
    k: int = 5
    query_cap: int = 1000
    min_impressions: int = 5
    title_overlap_filter: bool = True
    use_augmentation: bool = True
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    normalization: NormalizationConfig = field(default_factory=NormalizationConfig)
    ptr: PTRParams = field(default_factory=PTRParams)
    ptr_aggregation: str = AGGREGATE_KEYPHRASE_MAX
    relevance_mode: str = "auto"
    relevance_threshold: float = 0.5
    workers: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.query_cap < 1:
            raise ValueError("query_cap must be positive")
        if self.min_impressions < 0:
            raise ValueError("min_impressions must be non-negative")
        if self.workers < 1:
            raise ValueError("workers must be positive")
        # the number of clusters retrieved always follows k
        if self.retrieval.required_clusters != self.k:
            object.__setattr__(self, "retrieval", replace(self.retrieval, required_clusters=self.k))

    def to_dict(self) -> dict:
        retrieval = self.retrieval.to_dict()
        retrieval.pop("required_clusters")
        return {
            "k": self.k,
            "query_cap": self.query_cap,
            "min_impressions": self.min_impressions,
            "title_overlap_filter": self.title_overlap_filter,
            "use_augmentation": self.use_augmentation,
            "retrieval": retrieval,
            "normalization": self.normalization.to_dict(),
            "ptr": self.ptr.to_dict(),
            "ptr_aggregation": self.ptr_aggregation,
            "relevance_mode": self.relevance_mode,
            "relevance_threshold": self.relevance_threshold,
            "workers": self.workers,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        unknown = set(data) - set(cls().to_dict())
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kw = {k: v for k, v in data.items() if k not in ("retrieval", "normalization", "ptr")}
        k = int(data.get("k", 5))
        kw["retrieval"] = RetrievalConfig.from_dict({**data.get("retrieval", {}), "required_clusters": k})
        kw["normalization"] = NormalizationConfig.from_dict(data.get("normalization", {}))
        kw["ptr"] = PTRParams(**data.get("ptr", {}))
        return cls(**kw)

    def updated(self, **overrides) -> "PipelineConfig":
        """Copy with top-level or dotted (``retrieval.epsilon``) overrides; ``None`` values are ignored."""
        data = self.to_dict()
        for key, value in overrides.items():
            if value is None:
                continue
            section, _, name = key.partition(".")
            if name:
                data[section][name] = value
            else:
                data[key] = value
        return PipelineConfig.from_dict(data)


def load_config(path: Union[str, Path]) -> PipelineConfig:
    with open(path, encoding="utf-8") as fh:
        return PipelineConfig.from_dict(json.load(fh))


def save_config(config: PipelineConfig, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
