# # Ward linkage, inconsistency and threshold-lowering retrieval

# %%
import numpy as np

from broadgen import RetrievalConfig, flatten, inconsistency, retrieve, ward_linkage
from broadgen.clustering import retrieve_full
from broadgen.leaf_order import optimal_leaf_order, order_cost

np.set_printoptions(precision=3, suppress=True)

# two tight triples far apart, plus a loner
pts = np.array([[0, 0], [0, 0.2], [0.2, 0], [5, 5], [5, 5.2], [5.2, 5], [9, 0]], dtype=float)
dist = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))

# %% [markdown]
# Merges are `(left, right, height, size)`; leaves are 0..n-1 and merge s
# creates node n+s.

# %%
d = ward_linkage(dist)
print(d.merges)

# %% [markdown]
# Each merge is scored against the merges just below it (depth 2). A score
# near zero means the merge is no taller than its neighbourhood.

# %%
table = inconsistency(d, depth=2)
print("scores:", table.score)
for t in (1.2, 1.0, 0.5):
    print(f"threshold {t}: {flatten(d, table, t)}")

# %% [markdown]
# `retrieve` lowers the threshold by epsilon until at least K clusters exist,
# then keeps the K largest. `retrieve_full` also reports what was dropped.

# %%
for k in (1, 2, 3):
    r = retrieve_full(dist, RetrievalConfig(required_clusters=k))
    print(f"K={k}: kept={r.clusters} dropped={r.dropped} at threshold {r.threshold:.2f}")

# Any R(Z, r) can be plugged in, e.g. a plain distance cut:
print(retrieve(dist, RetrievalConfig(required_clusters=2), cluster_fn=lambda z, r: [[0, 1, 2, 3, 4, 5], [6]]))

# %% [markdown]
# Optimal leaf ordering flips subtrees so adjacent leaves are as close as
# possible; useful for displaying a cluster's queries.

# %%
order = optimal_leaf_order(d, dist)
print("leaf order:", order, "cost", round(order_cost(order, dist), 3))
