# # Scoring keyphrases against later search traffic
#
# Relevant-reach (RRE) precision and recall weight post-period queries by
# volume. Pseudo-token recall (PTR) measures how close keyphrases are to the
# queries they would serve.

# %%
from broadgen import PostQuery, broad_match, ptr_item, ptr_pair, rre, tokenize
from broadgen.config import PipelineConfig
from broadgen.pipeline import evaluate, keyphrases_for, prepare
from broadgen.data import ItemRecord, parse_post_record
from broadgen.synth import synth

T = lambda s: tuple(s.split())  # noqa: E731

print(broad_match(T("a b c"), T("a b x")), broad_match(T("a b"), T("a x")))
print(ptr_pair(T("a b e"), T("a b c d")))

post = [PostQuery(T("a b"), 1, True), PostQuery(T("a b c"), 1, True), PostQuery(T("a b d"), 1, False), PostQuery(T("z"), 1, False)]
print(rre([T("a b")], post, [q.relevant for q in post]))
print(ptr_item([T("a b"), T("z")], post))

# %% [markdown]
# End to end on synthetic items: the generated model, the top pre-queries,
# and the oracle that matches every query.

# %%
cfg = PipelineConfig()
pre, post_rows = synth(7, 100)
posts = {p["item_id"]: parse_post_record(p, cfg.normalization) for p in post_rows}
models = {"broadgen": {}, "prequery": {}, "oracle": {}}
for row in pre:
    item = prepare(ItemRecord.from_dict(row), cfg)
    models["broadgen"][item.item_id] = [k.tokens for k in keyphrases_for(item, cfg)]
    prepared = prepare(ItemRecord.from_dict(row), cfg, use_augmentation=False)
    models["prequery"][item.item_id] = prepared.queries[: cfg.k]
    models["oracle"][item.item_id] = None

for name, kps in models.items():
    agg = evaluate(kps, posts, cfg, name).aggregate()
    print(f"{name:9s} precision={agg['precision']:.3f} recall={agg['recall']:.3f} f1={agg['f1']:.3f} ptr={agg['ptr']}")
