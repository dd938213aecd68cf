"""Broad-match keyphrase generation by clustering historical queries."""

from .clustering import (
    Dendrogram,
    InconsistencyTable,
    RetrievalConfig,
    WardInconsistent,
    flatten,
    inconsistency,
    Retrieval,
    retrieve,
    retrieve_full,
    ward_linkage,
)
from .config import PipelineConfig, load_config, save_config
from .evaluation import (
    PTRParams,
    PostQuery,
    RelevanceOracle,
    broad_match,
    matched_any,
    prequery_baseline,
    ptr_item,
    ptr_pair,
    rre,
)
from .leaf_order import optimal_leaf_order
from .matrices import (
    augment_and_normalize,
    build_anchor,
    build_query_distance,
    pairwise_cosine_distance,
    query_distance_matrix,
)
from .representation import (
    Keyphrase,
    PrecedenceGraph,
    build_precedence_graph,
    common_tokens,
    generate_keyphrases,
    global_token_order,
    subset_fallback,
)
from .tokenizer import NormalizationConfig, tokenize

__version__ = "0.1.0"
