"""Scene knowledge retrieval: retrieve, expand, denoise, GCN encode."""

from .encoding import (
    adjacency_matrix,
    build_nodes,
    encode,
    gcn_forward,
    literal_node_id,
    normalize_adjacency,
    pool_anchor_rows,
)
from .models import Activation, FeatureMatrix, GcnParameters, Query, ScoredEntity, anchor_ids
from .retrieval import DEFAULT_GAMMA3, EntityIndex, denoise, expand, query_vector, retrieve

__all__ = [
    "Activation",
    "DEFAULT_GAMMA3",
    "EntityIndex",
    "FeatureMatrix",
    "GcnParameters",
    "Query",
    "ScoredEntity",
    "adjacency_matrix",
    "anchor_ids",
    "build_nodes",
    "denoise",
    "encode",
    "expand",
    "gcn_forward",
    "literal_node_id",
    "normalize_adjacency",
    "pool_anchor_rows",
    "query_vector",
    "retrieve",
]
