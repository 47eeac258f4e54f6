# ABOUTME: Scene knowledge retrieval over a frozen graph: top-k entities, subgraph expansion, visual denoising
# ABOUTME: Entity scores are cosine similarities between the query and entity-label embeddings

import logging
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from ..kgcore.graph import SceneMMKG
from ..kgcore.models import RetrievedSubgraph, TailKind
from ..providers import resolve_provider
from ..providers.vectors import EmbeddingVector, cosine, rounded
from ..shared.exceptions import ContractError, RetrievalError
from .models import Query, ScoredEntity, anchor_ids

logger = logging.getLogger(__name__)

DEFAULT_GAMMA3 = 0.3


class EntityIndex:
    """Entity-label embeddings of one frozen graph, computed once and reused across queries"""

    def __init__(self, graph: SceneMMKG, provider):
        if not graph.frozen:
            raise ContractError("Retrieval needs a frozen graph")
        if graph.is_empty():
            raise RetrievalError("Cannot retrieve from an empty graph")
        self.graph = graph
        self.provider = resolve_provider(provider)
        self.entities = graph.entities()
        self.vectors = [self.provider.embed(e.label) for e in self.entities]

    def __len__(self) -> int:
        return len(self.entities)

    def rank(self, vector: EmbeddingVector, k: int) -> List[ScoredEntity]:
        scored = [ScoredEntity(e.id, e.label, rounded(cosine(vector, v)))
                  for e, v in zip(self.entities, self.vectors)]
        scored.sort(key=lambda s: (-s.score, s.entity_id))
        return scored[:k]


def query_vector(query: Query, provider) -> EmbeddingVector:
    if query.text:
        return resolve_provider(provider).embed(query.text)
    return query.observation


def retrieve(query: Query, graph: SceneMMKG, provider, index: Optional[EntityIndex] = None) -> List[ScoredEntity]:
    """
    Top-k entities by cosine between the query and each entity label

    The query text is embedded when present, else the observation is used.
    Ties are broken by ascending entity id; k=1 is the argmax.

    Raises:
        RetrievalError: the graph has no entities
        ContractError: the graph is not frozen or the query is empty
    """
    if index is None or index.graph is not graph:
        index = EntityIndex(graph, provider)
    anchors = index.rank(query_vector(query, provider), query.k)
    logger.debug(f"Retrieved {[a.label for a in anchors]}")
    return anchors


def expand(anchors: Sequence[Union[str, ScoredEntity]], graph: SceneMMKG, hops: int = 1) -> RetrievedSubgraph:
    """
    Union of the anchors' neighborhoods, split into textual and visual triples

    Anchor scores are carried when anchors are ScoredEntity values.
    """
    if hops < 0:
        raise ContractError(f"hops must be >= 0, got {hops}")
    ids = anchor_ids(anchors)
    subgraph = graph.expand_from(ids, hops)
    scores = {a.entity_id: a.score for a in anchors if isinstance(a, ScoredEntity)}
    return graph.materialize(subgraph.anchors, subgraph.triples, scores)


def denoise(subgraph: RetrievedSubgraph, observation: EmbeddingVector, gamma3: float = DEFAULT_GAMMA3,
            provider=None) -> RetrievedSubgraph:
    """
    Keep visual triples whose image is similar enough to the observation

    A visual node is embedded from its caption, or its URI basename when it has
    none, and kept iff its cosine with `observation` is >= gamma3. Textual
    triples are never touched.
    """
    if not np.isfinite(gamma3):
        raise ContractError(f"gamma3 must be finite, got {gamma3}")
    embedder = resolve_provider(provider)
    if observation.dimension != embedder.dimension:
        raise ContractError(f"Observation dimension {observation.dimension} differs from "
                            f"provider dimension {embedder.dimension}")

    kept = []
    scores: Dict[str, float] = {k: v for k, v in subgraph.scores.items() if k in subgraph.entities}
    for triple in subgraph.visual:
        asset = subgraph.assets[triple.tail]
        score = rounded(cosine(observation, embedder.embed(asset.display_text)))
        if score >= gamma3:
            kept.append(triple)
            scores[triple.id] = score

    entity_ids = set(subgraph.anchors)
    for triple in (*subgraph.textual, *kept):
        entity_ids.add(triple.head)
        if triple.tail_kind is TailKind.ENTITY:
            entity_ids.add(triple.tail)
    asset_ids = {t.tail for t in kept}
    logger.debug(f"Denoise kept {len(kept)} of {len(subgraph.visual)} visual triples (gamma3={gamma3})")

    return RetrievedSubgraph(
        anchors=subgraph.anchors,
        textual=subgraph.textual,
        visual=tuple(kept),
        entities={k: v for k, v in subgraph.entities.items() if k in entity_ids},
        assets={k: v for k, v in subgraph.assets.items() if k in asset_ids},
        scores=scores,
    )
