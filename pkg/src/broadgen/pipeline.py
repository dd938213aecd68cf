"""Batch orchestration: generation, evaluation, baselines, sweeps and benchmarks.

Items are independent, so batches are split into chunks and farmed out to
worker processes. Results are merged and sorted by ``item_id`` before
anything is written, which makes the output bytes independent of the
worker count.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .clustering import retrieve
from .config import PipelineConfig
from .data import (
    ItemRecord,
    PathLike,
    PostRecord,
    PreparedItem,
    ReadStats,
    dumps,
    iter_jsonl,
    parse_post_record,
    prepare_item,
    write_jsonl,
)
from .evaluation import EvalReport, RelevanceOracle, prequery_baseline, score_item
from .matrices import query_distance_matrix
from .representation import Keyphrase, generate_keyphrases
from .tokenizer import TokenList, tokenize

log = logging.getLogger(__name__)

STAGES = ("prepare", "matrices", "clustering", "representation")
ORACLE_MODE = "oracle"
CHUNK_SIZE = 64


class PipelineError(RuntimeError):
    pass


def keyphrases_for(item: PreparedItem, config: PipelineConfig, timings: Optional[Dict[str, float]] = None) -> List[Keyphrase]:
    """Matrices, clustering and representation for one prepared item."""
    timings = timings if timings is not None else {}
    if not item.queries:
        for stage in STAGES[1:]:
            timings[stage] = 0.0
        return []
    t0 = time.perf_counter()
    dist = query_distance_matrix(item.queries, item.title)
    t1 = time.perf_counter()
    clusters = retrieve(dist, config.retrieval)
    t2 = time.perf_counter()
    out = generate_keyphrases(clusters, item.queries, config.k)
    t3 = time.perf_counter()
    timings["matrices"] = t1 - t0
    timings["clustering"] = t2 - t1
    timings["representation"] = t3 - t2
    return out


def prepare(record: ItemRecord, config: PipelineConfig, use_augmentation: Optional[bool] = None) -> PreparedItem:
    return prepare_item(
        record,
        config.normalization,
        query_cap=config.query_cap,
        min_impressions=config.min_impressions,
        title_overlap_filter=config.title_overlap_filter,
        use_augmentation=config.use_augmentation if use_augmentation is None else use_augmentation,
    )


def generate_record(record: ItemRecord, config: PipelineConfig, timings: Optional[Dict[str, float]] = None) -> dict:
    timings = timings if timings is not None else {}
    t0 = time.perf_counter()
    item = prepare(record, config)
    timings["prepare"] = time.perf_counter() - t0
    kps = keyphrases_for(item, config, timings)
    return {"item_id": item.item_id, "keyphrases": [k.to_dict() for k in kps]}


@dataclass
class _ItemResult:
    item_id: str
    line: Optional[str]
    error: Optional[str]
    timings: Dict[str, float]


def _process_chunk(task: Tuple[str, Sequence[dict], dict]) -> List[_ItemResult]:
    mode, rows, cfg_dict = task
    config = PipelineConfig.from_dict(cfg_dict)
    out = []
    for row in rows:
        item_id = str(row.get("item_id", "<missing>"))
        timings: Dict[str, float] = {}
        try:
            record = ItemRecord.from_dict(row)
            if mode == "generate":
                payload = generate_record(record, config, timings)
            elif mode == "prequery":
                item = prepare(record, config, use_augmentation=False)
                top = prequery_baseline(item.queries, item.weights, config.k)
                payload = {
                    "item_id": item.item_id,
                    "keyphrases": [{"text": " ".join(q), "cluster_size": 1, "support": 1} for q in top],
                }
            elif mode == ORACLE_MODE:
                payload = {"item_id": record.item_id, "mode": ORACLE_MODE, "keyphrases": []}
            else:
                raise ValueError(f"unknown mode {mode!r}")
            out.append(_ItemResult(item_id, dumps(payload), None, timings))
        except Exception as exc:  # isolate per-item failures
            log.error("item %s failed: %s: %s", item_id, type(exc).__name__, exc)
            out.append(_ItemResult(item_id, None, f"{type(exc).__name__}: {exc}", timings))
    return out


def _chunks(rows: List[dict], size: int) -> Iterable[List[dict]]:
    for i in range(0, len(rows), size):
        yield rows[i:i + size]


def _run_items(mode: str, rows: List[dict], config: PipelineConfig, workers: int) -> List[_ItemResult]:
    cfg = config.to_dict()
    tasks = [(mode, chunk, cfg) for chunk in _chunks(rows, CHUNK_SIZE)]
    if workers <= 1 or len(tasks) <= 1:
        results = [r for t in tasks for r in _process_chunk(t)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for chunk in pool.map(_process_chunk, tasks) for r in chunk]
    results.sort(key=lambda r: r.item_id)
    return results


def _load_items(path: PathLike) -> Tuple[List[dict], ReadStats, List[str]]:
    stats = ReadStats()
    rows, seen, dupes = [], set(), []
    for row in iter_jsonl(path, stats):
        item_id = str(row.get("item_id"))
        if item_id in seen:
            dupes.append(item_id)
            continue
        seen.add(item_id)
        rows.append(row)
    return rows, stats, dupes


@dataclass
class RunSummary:
    command: str
    items: int = 0
    written: int = 0
    errors: List[Dict[str, str]] = field(default_factory=list)
    malformed_lines: int = 0
    duplicate_ids: List[str] = field(default_factory=list)
    workers: int = 1
    elapsed_s: float = 0.0
    stage_seconds: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "items": self.items,
            "written": self.written,
            "errors": self.errors,
            "malformed_lines": self.malformed_lines,
            "duplicate_ids": self.duplicate_ids,
            "workers": self.workers,
            "elapsed_s": self.elapsed_s,
            "items_per_sec": self.items / self.elapsed_s if self.elapsed_s > 0 else None,
            "stage_seconds": self.stage_seconds,
        }


def _run(mode: str, dataset: PathLike, out_path: PathLike, config: PipelineConfig, workers: Optional[int]) -> RunSummary:
    workers = config.workers if workers is None else workers
    t0 = time.perf_counter()
    try:
        rows, stats, dupes = _load_items(dataset)
    except OSError as exc:
        raise PipelineError(f"cannot read dataset {dataset}: {exc}") from exc
    results = _run_items(mode, rows, config, workers)
    written = write_jsonl(out_path, (r.line for r in results if r.line is not None))
    stage_totals = {s: float(sum(r.timings.get(s, 0.0) for r in results)) for s in STAGES}
    return RunSummary(
        command=mode,
        items=len(rows),
        written=written,
        errors=[{"item_id": r.item_id, "error": r.error} for r in results if r.error],
        malformed_lines=stats.malformed,
        duplicate_ids=dupes,
        workers=workers,
        elapsed_s=time.perf_counter() - t0,
        stage_seconds=stage_totals,
    )


def run_generate(dataset: PathLike, out_path: PathLike, config: PipelineConfig = PipelineConfig(), workers: Optional[int] = None) -> RunSummary:
    """Generate keyphrases for every item of ``dataset`` into ``out_path``."""
    return _run("generate", dataset, out_path, config, workers)


def run_baseline(
    dataset: PathLike,
    out_path: PathLike,
    which: str,
    config: PipelineConfig = PipelineConfig(),
    workers: Optional[int] = None,
) -> RunSummary:
    """``prequery``: top-k pre-queries verbatim. ``oracle``: the all-match marker."""
    if which not in ("prequery", ORACLE_MODE):
        raise ValueError(f"unknown baseline {which!r}")
    return _run(which, dataset, out_path, config, workers)


# -- evaluation --------------------------------------------------------------


def load_keyphrases(path: PathLike, config: PipelineConfig) -> Dict[str, Optional[List[TokenList]]]:
    """item_id -> tokenized keyphrases, or ``None`` for oracle-mode lines."""
    out: Dict[str, Optional[List[TokenList]]] = {}
    for row in iter_jsonl(path):
        item_id = str(row["item_id"])
        if row.get("mode") == ORACLE_MODE:
            out[item_id] = None
            continue
        kps = [tokenize(k["text"] if isinstance(k, dict) else k, config.normalization) for k in row.get("keyphrases", [])]
        out[item_id] = [k for k in kps if k]
    return out


def load_post(path: PathLike, config: PipelineConfig) -> Dict[str, PostRecord]:
    return {
        str(row["item_id"]): parse_post_record(row, config.normalization, config.query_cap, config.title_overlap_filter)
        for row in iter_jsonl(path)
    }


def evaluate(
    keyphrases: Dict[str, Optional[List[TokenList]]],
    post: Dict[str, PostRecord],
    config: PipelineConfig = PipelineConfig(),
    model: str = "model",
) -> EvalReport:
    """Score every item present in both mappings."""
    shared = sorted(set(keyphrases) & set(post))
    if not shared:
        raise PipelineError("no item_id is shared between the keyphrase and post-query inputs")
    oracle = RelevanceOracle(config.relevance_mode, config.relevance_threshold)
    report = EvalReport(
        model=model,
        params={
            "ptr": config.ptr.to_dict(),
            "ptr_aggregation": config.ptr_aggregation,
            "relevance": oracle.to_dict(),
            "k": config.k,
        },
        unmatched_items=len(set(keyphrases) ^ set(post)),
    )
    for item_id in shared:
        rec = post[item_id]
        if not rec.queries:
            continue
        report.items.append(
            score_item(item_id, keyphrases[item_id], rec.queries, oracle, rec.title, config.ptr, config.ptr_aggregation)
        )
    return report


def run_evaluate(
    keyphrase_path: PathLike,
    post_path: PathLike,
    out_path: Optional[PathLike] = None,
    config: PipelineConfig = PipelineConfig(),
    model: str = "model",
    per_item_path: Optional[PathLike] = None,
) -> EvalReport:
    report = evaluate(load_keyphrases(keyphrase_path, config), load_post(post_path, config), config, model)
    if out_path is not None:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(dumps(report.summary()))
            fh.write("\n")
    if per_item_path is not None:
        write_jsonl(per_item_path, (s.to_dict() for s in report.items))
    return report


def sweep_keyphrase_count(
    generated: Dict[str, Optional[List[TokenList]]],
    post: Dict[str, PostRecord],
    ks: Iterable[int],
    config: PipelineConfig = PipelineConfig(),
    model: str = "model",
) -> Dict[int, dict]:
    """Aggregate metrics when only the top ``k`` ranked keyphrases are kept."""
    out = {}
    for k in ks:
        truncated = {i: (None if v is None else v[:k]) for i, v in generated.items()}
        out[k] = evaluate(truncated, post, config, f"{model}@{k}").aggregate()
    return out


# -- benchmarking ------------------------------------------------------------


def _percentiles(values: Sequence[float]) -> dict:
    if not values:
        return {"p50": 0.0, "p95": 0.0, "max": 0.0}
    arr = np.asarray(values)
    return {"p50": float(np.percentile(arr, 50)), "p95": float(np.percentile(arr, 95)), "max": float(arr.max())}


def bench(dataset: PathLike, config: PipelineConfig = PipelineConfig(), worker_counts: Sequence[int] = (1,)) -> dict:
    """Per-stage per-item timing distribution and items/sec at each worker count."""
    rows, _, _ = _load_items(dataset)
    report: dict = {"items": len(rows), "runs": []}
    for w in worker_counts:
        t0 = time.perf_counter()
        results = _run_items("generate", rows, config, w)
        elapsed = time.perf_counter() - t0
        per_stage = {s: _percentiles([r.timings.get(s, 0.0) for r in results]) for s in STAGES}
        totals = [sum(r.timings.get(s, 0.0) for s in STAGES) for r in results]
        report["runs"].append({
            "workers": w,
            "elapsed_s": elapsed,
            "items_per_sec": len(rows) / elapsed if elapsed > 0 else None,
            "per_item_s": per_stage,
            "per_item_total_s": _percentiles(totals),
            "errors": sum(r.error is not None for r in results),
        })
    return report
