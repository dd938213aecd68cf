"""Command-line entry point: ``broadgen {generate,evaluate,baseline,synth,bench}``.

Settings come from defaults, then an optional JSON ``--config`` file, then
flags. The run summary is printed as one JSON document (or written to
``--summary``).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from typing import List, Optional

from .config import PipelineConfig, load_config
from .data import dumps, write_jsonl
from .pipeline import PipelineError, bench, run_baseline, run_evaluate, run_generate
from .synth import PROFILES, SynthConfig, synth

log = logging.getLogger("broadgen")

# flag dest -> config key
_CONFIG_FLAGS = {
    "k": "k",
    "query_cap": "query_cap",
    "min_impressions": "min_impressions",
    "title_overlap_filter": "title_overlap_filter",
    "use_augmentation": "use_augmentation",
    "workers": "workers",
    "initial_threshold": "retrieval.initial_threshold",
    "epsilon": "retrieval.epsilon",
    "min_threshold": "retrieval.min_threshold",
    "depth": "retrieval.depth",
    "lowercase": "normalization.lowercase",
    "strip_punctuation": "normalization.strip_punctuation",
    "fold_plurals": "normalization.fold_plurals",
    "max_tokens": "normalization.max_tokens",
    "alpha": "ptr.alpha",
    "beta": "ptr.beta",
    "ptr_aggregation": "ptr_aggregation",
    "relevance_mode": "relevance_mode",
    "relevance_threshold": "relevance_threshold",
}


def _config_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pipeline config (overrides --config)")
    g.add_argument("--config", help="JSON config file")
    g.add_argument("--k", type=int)
    g.add_argument("--query-cap", type=int)
    g.add_argument("--min-impressions", type=int)
    g.add_argument("--title-overlap-filter", action=argparse.BooleanOptionalAction, default=None)
    g.add_argument("--use-augmentation", action=argparse.BooleanOptionalAction, default=None)
    g.add_argument("--workers", type=int)
    g.add_argument("--initial-threshold", type=float)
    g.add_argument("--epsilon", type=float)
    g.add_argument("--min-threshold", type=float)
    g.add_argument("--depth", type=int)
    g.add_argument("--lowercase", action=argparse.BooleanOptionalAction, default=None)
    g.add_argument("--strip-punctuation", action=argparse.BooleanOptionalAction, default=None)
    g.add_argument("--fold-plurals", action=argparse.BooleanOptionalAction, default=None)
    g.add_argument("--max-tokens", type=int)
    g.add_argument("--alpha", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--ptr-aggregation", choices=["keyphrase_max", "query_max"])
    g.add_argument("--relevance-mode", choices=["auto", "labels", "lexical"])
    g.add_argument("--relevance-threshold", type=float)


def build_config(args: argparse.Namespace) -> PipelineConfig:
    base = load_config(args.config) if getattr(args, "config", None) else PipelineConfig()
    overrides = {key: getattr(args, dest, None) for dest, key in _CONFIG_FLAGS.items()}
    return base.updated(**overrides)


def _summary_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--summary", help="write the run summary here instead of stdout")


def _emit(doc: dict, path: Optional[str]) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _cmd_generate(args) -> int:
    summary = run_generate(args.dataset, args.out, build_config(args))
    _emit(summary.to_dict(), args.summary)
    return 0


def _cmd_baseline(args) -> int:
    summary = run_baseline(args.dataset, args.out, args.which, build_config(args))
    _emit(summary.to_dict(), args.summary)
    return 0


def _cmd_evaluate(args) -> int:
    report = run_evaluate(args.keyphrases, args.post, None, build_config(args), args.model, args.per_item)
    _emit(report.summary(), args.summary)
    return 0


def _cmd_synth(args) -> int:
    cfg = SynthConfig(profile=args.profile, n_clusters=args.clusters)
    if args.separated:
        cfg = dataclasses.replace(
            cfg, queries_per_cluster=(2, 8), min_modifiers=1, max_modifiers=1,
            unique_modifiers=True, low_impression_frac=0.0,
        )
    pre, post = synth(args.seed, args.n_items, cfg)
    write_jsonl(args.pre, pre)
    write_jsonl(args.post, post)
    _emit({"command": "synth", "seed": args.seed, "items": len(pre), "pre": args.pre, "post": args.post}, args.summary)
    return 0


def _cmd_bench(args) -> int:
    _emit(bench(args.dataset, build_config(args), args.worker_counts), args.summary)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="broadgen", description="Broad-match keyphrase generation and evaluation.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate keyphrases for an item dataset")
    p.add_argument("dataset")
    p.add_argument("--out", required=True)
    _config_args(p)
    _summary_arg(p)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("baseline", help="emit prequery or oracle baseline keyphrases")
    p.add_argument("which", choices=["prequery", "oracle"])
    p.add_argument("dataset")
    p.add_argument("--out", required=True)
    _config_args(p)
    _summary_arg(p)
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("evaluate", help="score a keyphrase file against post-period queries")
    p.add_argument("keyphrases")
    p.add_argument("post")
    p.add_argument("--model", default="model")
    p.add_argument("--per-item", help="write per-item scores (JSONL) here")
    _config_args(p)
    _summary_arg(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("synth", help="write a seeded synthetic pre/post dataset pair")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-items", type=int, default=100)
    p.add_argument("--profile", choices=sorted(PROFILES), default="apparel")
    p.add_argument("--clusters", type=int, default=3)
    p.add_argument("--separated", action="store_true", help="plant internally homogeneous clusters")
    p.add_argument("--pre", required=True)
    p.add_argument("--post", required=True)
    _summary_arg(p)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("bench", help="time the pipeline stages")
    p.add_argument("dataset")
    p.add_argument("--worker-counts", type=int, nargs="+", default=[1])
    _config_args(p)
    _summary_arg(p)
    p.set_defaults(func=_cmd_bench)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (PipelineError, ValueError, OSError) as exc:
        print(f"broadgen: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
