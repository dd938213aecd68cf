# # From raw text to a distance matrix
#
# Every query and the item title are tokenized the same way: NFC, casefold,
# punctuation split, possessives dropped and naive plural folding.

# %%
import numpy as np

from broadgen import (
    augment_and_normalize,
    build_anchor,
    build_query_distance,
    pairwise_cosine_distance,
    tokenize,
)

np.set_printoptions(precision=3, suppress=True)

title = tokenize("Reebok Men's Shoes size 9")
queries = [tokenize(q) for q in ("reebok men shoes size 9", "reebok mens shoe", "leather boots size 9", "boots")]
print("title  :", title)
for q in queries:
    print("query  :", q)

# %% [markdown]
# The anchor matrix records, per title position, whether the query contains
# that token; each row sums to one (or stays zero).

# %%
A = build_anchor(queries, title)
print(A)

# %% [markdown]
# Query-to-query distance is one minus the shared-token count scaled by the
# row maximum. It is not symmetric: a short query sits close to the long
# queries that contain it, not the other way round.

# %%
D = build_query_distance(queries)
print(D)

# %% [markdown]
# Both blocks are concatenated, rows are L2-normalized and compared with
# cosine distance. This matrix feeds the clustering step.

# %%
Z = augment_and_normalize(A, D)
dist = pairwise_cosine_distance(Z)
print(dist)
assert np.allclose(dist, dist.T)
