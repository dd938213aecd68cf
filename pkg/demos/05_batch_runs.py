# # Batch runs through the command-line entry point
#
# The same functions back the `broadgen` console script. Here they are
# called in-process inside a scratch directory.

# %%
import json
import tempfile
from pathlib import Path

from broadgen.cli import main

work = Path(tempfile.mkdtemp(prefix="broadgen-demo-"))
pre, post = str(work / "pre.jsonl"), str(work / "post.jsonl")

main(["synth", "--seed", "3", "--n-items", "40", "--pre", pre, "--post", post, "--summary", str(work / "synth.json")])
main(["generate", pre, "--out", str(work / "bg.jsonl"), "--workers", "2", "--summary", str(work / "gen.json")])
main(["baseline", "prequery", pre, "--out", str(work / "pq.jsonl"), "--summary", str(work / "pq.json")])
print((work / "bg.jsonl").read_text().splitlines()[0])

# %% [markdown]
# Evaluation summaries share one schema, so models line up side by side.

# %%
for name in ("bg", "pq"):
    main(["evaluate", str(work / f"{name}.jsonl"), post, "--model", name, "--summary", str(work / f"{name}.eval.json")])
    print(name, json.loads((work / f"{name}.eval.json").read_text())["aggregate"])

# %% [markdown]
# `bench` times each stage per item and reports throughput per worker count.

# %%
main(["bench", pre, "--worker-counts", "1", "2", "--summary", str(work / "bench.json")])
for run in json.loads((work / "bench.json").read_text())["runs"]:
    print(run["workers"], "workers:", round(run["items_per_sec"], 1), "items/s")
