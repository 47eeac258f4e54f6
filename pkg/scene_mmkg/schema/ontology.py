# ABOUTME: Concept expansion through lexical hypernyms/hyponyms, similarity clustering to canonical concepts
# ABOUTME: Also derives the acyclic schema hierarchy and drives the full schema design run

import logging
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from ..providers import resolve_provider
from ..shared.exceptions import ContractError
from ..shared.similarity import check_threshold, fixpoint_merge
from .mining import mine_concepts
from .models import Concept, ConceptStage, LexicalKB, Provenance, SceneProfile, SceneSchema

logger = logging.getLogger(__name__)

DEFAULT_MAX_DEPTH = 2
DEFAULT_GAMMA1 = 0.7


def expand_concepts(raw: Iterable[Concept], lexicon: LexicalKB,
                    max_depth: int = DEFAULT_MAX_DEPTH) -> List[Concept]:
    """
    C_exp: raw concepts plus their lexical neighbourhood within `max_depth` layers

    Breadth-first from every raw concept at once, hypernyms before hyponyms and
    labels in sorted order, so the first discovery of a label (and its provenance)
    is deterministic.
    """
    if max_depth < 0:
        raise ContractError(f"max_depth must be >= 0, got {max_depth}")

    found: Dict[str, Concept] = {}
    for concept in sorted(raw, key=lambda c: c.label):
        if concept.label not in found:
            found[concept.label] = concept.advance(ConceptStage.EXPANDED)

    frontier = sorted(found)
    for _ in range(max_depth):
        discovered: List[str] = []
        for label in frontier:
            source = found[label]
            steps = [(h, Provenance.hypernym_of(source.id)) for h in sorted(lexicon.hypernyms_of(label))]
            steps += [(h, Provenance.hyponym_of(source.id)) for h in sorted(lexicon.hyponyms_of(label))]
            for neighbour, provenance in steps:
                if neighbour in found:
                    continue
                found[neighbour] = Concept.create(neighbour, ConceptStage.EXPANDED, provenance)
                discovered.append(neighbour)
        if not discovered:
            break
        frontier = sorted(discovered)

    logger.info(f"Expanded to {len(found)} concepts (max depth {max_depth})")
    return [found[label] for label in sorted(found)]


def cluster_concepts(expanded: Iterable[Concept], gamma1: float = DEFAULT_GAMMA1, provider=None,
                     lexicon: Optional[LexicalKB] = None) -> List[Concept]:
    """
    Merge concepts whose label embeddings reach cosine >= gamma1, to a fixpoint

    Concepts linked by a chain of such pairs form one cluster. Its surviving label
    is the lexical hypernym when `lexicon` knows one, else the lexicographically
    smaller label; the other labels become aliases. Unmerged concepts keep their provenance.

    Args:
        expanded: Concepts to cluster (C_exp)
        gamma1: Similarity threshold in [0, 1]
        provider: ProviderConfig or embedding provider handle
        lexicon: Hypernym knowledge used to pick surviving labels

    Returns:
        Canonical concepts sorted by label
    """
    gamma1 = check_threshold("gamma1", gamma1)
    concepts: Dict[str, Concept] = {}
    for concept in expanded:
        concepts.setdefault(concept.label, concept)
    if not concepts:
        return []

    embedder = resolve_provider(provider)
    prefer = lexicon.prefer if lexicon is not None else None
    result = fixpoint_merge(concepts, embedder.embed, gamma1, prefer)

    canonical = []
    for label in result.canonical_labels:
        members = [concepts[m] for m in result.members[label]]
        aliases = {alias for m in members for alias in m.labels}
        if len(members) == 1:
            provenance = members[0].provenance
        else:
            provenance = Provenance.merged(m.id for m in members)
        canonical.append(Concept.create(label, ConceptStage.CANONICAL, provenance, aliases=aliases))

    logger.info(f"Clustered {len(concepts)} concepts into {len(canonical)} "
                f"({result.merges} merges, gamma1={gamma1})")
    return canonical


def build_hierarchy(concepts: Sequence[Concept], lexicon: LexicalKB) -> Tuple[Tuple[str, str], ...]:
    """
    Hypernym edges between canonical concepts, from direct lexicon relations of any member label

    Edges that would close a cycle are skipped; candidates are visited in sorted order.
    """
    owner: Dict[str, Concept] = {}
    for concept in concepts:
        for label in concept.labels:
            owner.setdefault(label, concept)

    candidates = set()
    for concept in concepts:
        for label in concept.labels:
            generals = set(lexicon.hypernyms_of(label))
            generals.update(g for g, children in lexicon.hyponyms.items() if label in children)
            for general in generals:
                parent = owner.get(general)
                if parent is not None and parent.id != concept.id:
                    candidates.add((parent.id, concept.id))

    graph = nx.DiGraph()
    graph.add_nodes_from(c.id for c in concepts)
    for parent, child in sorted(candidates):
        if nx.has_path(graph, child, parent):
            logger.debug(f"Skipped hierarchy edge {parent}->{child}: would form a cycle")
            continue
        graph.add_edge(parent, child)
    return tuple(sorted(graph.edges()))


def build_schema(scene: str, concepts: Sequence[Concept], lexicon: Optional[LexicalKB] = None,
                 gamma1: float = DEFAULT_GAMMA1, max_depth: int = DEFAULT_MAX_DEPTH) -> SceneSchema:
    hierarchy = build_hierarchy(concepts, lexicon) if lexicon is not None else ()
    return SceneSchema(scene=scene, concepts=tuple(concepts), hierarchy=hierarchy,
                       gamma1=gamma1, max_depth=max_depth)


def design_schema(profile: SceneProfile, template: str, provider, lexicon: LexicalKB,
                  max_depth: int = DEFAULT_MAX_DEPTH, gamma1: float = DEFAULT_GAMMA1,
                  embedding_provider=None) -> SceneSchema:
    """
    Mine, expand and cluster a scene's concepts into its schema

    Args:
        profile: Scene profiles to prompt with
        template: Prompt template
        provider: Completion provider (config or handle); also embeds unless embedding_provider is set
        lexicon: Lexical KB for expansion, merge preference and hierarchy
        max_depth: Expansion depth
        gamma1: Concept clustering threshold

    Returns:
        The scene schema
    """
    gamma1 = check_threshold("gamma1", gamma1)
    raw = mine_concepts(profile, template, provider)
    expanded = expand_concepts(raw, lexicon, max_depth)
    canonical = cluster_concepts(expanded, gamma1, embedding_provider or provider, lexicon)
    schema = build_schema(profile.scene, canonical, lexicon, gamma1, max_depth)
    logger.info(f"Schema for '{profile.scene}': raw={len(raw)} expanded={len(expanded)} "
                f"canonical={len(canonical)} hierarchy_edges={len(schema.hierarchy)}")
    return schema
