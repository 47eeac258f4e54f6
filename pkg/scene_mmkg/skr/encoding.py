# ABOUTME: GCN knowledge encoding of a retrieved subgraph into node features F_H
# ABOUTME: Symmetric-normalized adjacency with self-loops, n dense layers, optional anchor pooling

import logging
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..kgcore.models import RetrievedSubgraph, TailKind
from ..providers import resolve_provider
from ..shared.exceptions import ContractError, NumericError
from ..shared.utils import stable_id
from .models import FeatureMatrix, GcnParameters

logger = logging.getLogger(__name__)


def normalize_adjacency(adjacency: np.ndarray) -> np.ndarray:
    """Â = D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I"""
    matrix = np.asarray(adjacency, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ContractError(f"Adjacency must be square, got {matrix.shape}")
    looped = matrix + np.eye(matrix.shape[0])
    inv_sqrt = 1.0 / np.sqrt(looped.sum(axis=1))
    return looped * inv_sqrt[:, None] * inv_sqrt[None, :]


def gcn_forward(adjacency_hat: np.ndarray, features: np.ndarray, params: GcnParameters) -> np.ndarray:
    """
    H^{m+1} = act(Â H^m W_m) for every layer; zero layers return the features unchanged

    Raises:
        ContractError: feature width differs from d_0
        NumericError: the output has non-finite entries
    """
    hidden = np.asarray(features, dtype=np.float64)
    if hidden.ndim != 2 or hidden.shape[1] != params.input_dimension:
        raise ContractError(f"Features are {hidden.shape}, expected width {params.input_dimension}")
    if adjacency_hat.shape != (hidden.shape[0], hidden.shape[0]):
        raise ContractError(f"Adjacency {adjacency_hat.shape} does not match {hidden.shape[0]} nodes")

    for weight in params.weights:
        hidden = params.activation.apply(adjacency_hat @ hidden @ weight)
        if not np.all(np.isfinite(hidden)):
            raise NumericError("GCN forward pass produced non-finite values")
    return hidden


def literal_node_id(text: str) -> str:
    return stable_id("literal", text)


def build_nodes(subgraph: RetrievedSubgraph) -> Tuple[List[str], List[str], List[Tuple[str, str]]]:
    """
    Nodes (sorted ids), their texts, and the undirected edge list of a retrieved subgraph

    Entity nodes use their label, literal nodes their text, image nodes their
    caption (or URI basename).
    """
    texts: Dict[str, str] = {}
    for anchor in subgraph.anchors:
        texts[anchor] = subgraph.entities[anchor].label

    edges = []
    for triple in subgraph.triples:
        texts[triple.head] = subgraph.entities[triple.head].label
        if triple.tail_kind is TailKind.ENTITY:
            tail = triple.tail
            texts[tail] = subgraph.entities[tail].label
        elif triple.tail_kind is TailKind.IMAGE:
            tail = triple.tail
            texts[tail] = subgraph.assets[tail].display_text
        else:
            tail = literal_node_id(triple.tail)
            texts[tail] = triple.tail
        edges.append((triple.head, tail))

    node_ids = sorted(texts)
    return node_ids, [texts[n] for n in node_ids], edges


def adjacency_matrix(node_ids: Sequence[str], edges: Sequence[Tuple[str, str]]) -> np.ndarray:
    position = {node: i for i, node in enumerate(node_ids)}
    matrix = np.zeros((len(node_ids), len(node_ids)))
    for head, tail in edges:
        i, j = position[head], position[tail]
        matrix[i, j] = matrix[j, i] = 1.0
    return matrix


def encode(subgraph: RetrievedSubgraph, params: GcnParameters, provider) -> FeatureMatrix:
    """
    Encode a (denoised) retrieved subgraph with an n-layer GCN

    Args:
        subgraph: Retrieved subgraph H; apply denoise first so rejected visual nodes are absent
        params: GCN weights with d_0 equal to the embedding dimension
        provider: ProviderConfig or embedding provider handle

    Returns:
        F_H with rows in sorted node-id order
    """
    if subgraph.is_empty():
        raise ContractError("Cannot encode an empty subgraph")
    embedder = resolve_provider(provider)
    if params.input_dimension != embedder.dimension:
        raise ContractError(f"GCN input dimension {params.input_dimension} differs from "
                            f"embedding dimension {embedder.dimension}")

    node_ids, texts, edges = build_nodes(subgraph)
    features = np.vstack([embedder.embed(text).values for text in texts])
    adjacency_hat = normalize_adjacency(adjacency_matrix(node_ids, edges))
    output = gcn_forward(adjacency_hat, features, params)
    logger.debug(f"Encoded {len(node_ids)} nodes, {len(edges)} edges through {params.n} layers")
    return FeatureMatrix(node_ids=tuple(node_ids), rows=output, labels=tuple(texts))


def pool_anchor_rows(features: FeatureMatrix, anchors: Sequence[str]) -> np.ndarray:
    """Mean of the anchor rows of F_H, a single vector for downstream consumers"""
    if not anchors:
        raise ContractError("Pooling needs at least one anchor")
    missing = [a for a in anchors if a not in features.node_ids]
    if missing:
        raise ContractError(f"Anchors not in the feature matrix: {missing}")
    return np.mean([features.row(a) for a in anchors], axis=0)
