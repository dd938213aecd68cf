# # One keyphrase per cluster

# %%
from broadgen import build_precedence_graph, common_tokens, generate_keyphrases, subset_fallback, tokenize
from broadgen.representation import break_cycles, topological_order

cluster = [tokenize(q) for q in ("reebok men shoes size 9", "men reebok shoes size 10", "reebok men shoes")]
print("common tokens:", sorted(common_tokens(cluster)))

# %% [markdown]
# Token order comes from a precedence graph: an edge u -> v counts queries
# where u appears before v. Conflicting orders form cycles; the lightest
# cycle edge is dropped until the graph is acyclic.

# %%
g = build_precedence_graph(cluster, vocabulary=common_tokens(cluster))
print("edges:", g.edges)
dag, removed = break_cycles(g)
print("removed:", removed, "order:", topological_order(dag))

# %%
for kp in generate_keyphrases([[0, 1, 2]], cluster):
    print(kp.to_dict())

# %% [markdown]
# When a whole cluster shares fewer than two tokens, the largest sub-group
# that still shares two or more is used instead.

# %%
loose = [tokenize(q) for q in ("nike air max", "nike air force", "adidas samba")]
print(subset_fallback(loose))
print([k.text for k in generate_keyphrases([[0, 1, 2]], loose)])
