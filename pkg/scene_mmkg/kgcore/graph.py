# ABOUTME: In-memory Scene-MMKG store with dedupe, referential integrity and freeze semantics
# ABOUTME: Provides neighborhood queries, stats, a build log and filtered subgraph views

import logging
from collections import Counter, defaultdict
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, Set

from ..schema.models import SceneSchema
from ..shared.exceptions import (
    ContractError,
    EntityNotFoundError,
    GraphFrozenError,
    IntegrityError,
)
from .models import (
    AttributeKey,
    AttributeLevel,
    Entity,
    ImageAsset,
    ImageKind,
    KnowledgeSource,
    RetrievedSubgraph,
    TailKind,
    Triple,
    attribute_key_id,
)

logger = logging.getLogger(__name__)

TriplePredicate = Callable[[Triple], bool]


class SceneMMKG:
    """
    Multimodal knowledge graph bounded by a scene schema

    Mutable until `freeze()`; a frozen graph rejects every mutation and is safe to
    share across readers. Identical (head, relation, tail) triples collapse into one
    record with merged provenance.
    """

    def __init__(self, schema: Optional[SceneSchema] = None):
        self.schema = schema
        self.build_log: List[Dict[str, Any]] = []
        self._entities: Dict[str, Entity] = {}
        self._triples: Dict[str, Triple] = {}
        self._assets: Dict[str, ImageAsset] = {}
        self._attributes: Dict[str, AttributeKey] = {}
        # entity id -> ids of triples touching it as head or entity tail
        self._incident: Dict[str, Set[str]] = defaultdict(set)
        self._frozen = False

    # -- mutation -----------------------------------------------------------

    def _check_mutable(self) -> None:
        if self._frozen:
            raise GraphFrozenError("Graph is frozen")

    def add_entity(self, entity: Entity) -> str:
        self._check_mutable()
        if self.schema is not None and not self.schema.has_concept(entity.concept_id):
            raise IntegrityError(f"Entity '{entity.label}' references unknown concept {entity.concept_id}")
        existing = self._entities.get(entity.id)
        self._entities[entity.id] = existing.with_aliases(entity.aliases) if existing else entity
        return entity.id

    def add_asset(self, asset: ImageAsset) -> str:
        self._check_mutable()
        existing = self._assets.get(asset.id)
        if existing is not None and existing != asset:
            # keep the result independent of insertion order
            captions = [c for c in (existing.caption, asset.caption) if c]
            asset = ImageAsset(id=asset.id, uri=asset.uri, kind=asset.kind,
                               checksum=min(existing.checksum, asset.checksum),
                               caption=min(captions) if captions else None)
        self._assets[asset.id] = asset
        return asset.id

    def add_attribute_key(self, key: AttributeKey) -> str:
        self._check_mutable()
        if key.alias_of is not None:
            target = self._attributes.get(key.alias_of)
            if target is None:
                raise IntegrityError(f"Attribute '{key.name}' aliases an unknown key")
            if not target.canonical:
                raise IntegrityError(f"Attribute '{key.name}' aliases the alias '{target.name}'")
            if any(k.alias_of == key.id for k in self._attributes.values()):
                raise IntegrityError(f"Attribute '{key.name}' has aliases and cannot become one")
        self._attributes[key.id] = key
        return key.id

    def add_triple(self, triple: Triple) -> str:
        self._check_mutable()
        if triple.head not in self._entities:
            raise IntegrityError(f"Triple head {triple.head} is not an entity")
        if triple.tail_kind is TailKind.ENTITY and triple.tail not in self._entities:
            raise IntegrityError(f"Triple tail {triple.tail} is not an entity")
        if triple.tail_kind is TailKind.IMAGE and triple.tail not in self._assets:
            raise IntegrityError(f"Triple tail {triple.tail} is not an image asset")
        if triple.tail_kind is TailKind.LITERAL and not triple.tail:
            raise IntegrityError("Literal tail is empty")

        if triple.is_attribute and attribute_key_id(triple.relation) not in self._attributes:
            self._attributes[attribute_key_id(triple.relation)] = AttributeKey.create(triple.relation)

        existing = self._triples.get(triple.id)
        self._triples[triple.id] = existing.merged_with(triple) if existing else triple
        self._incident[triple.head].add(triple.id)
        if triple.tail_kind is TailKind.ENTITY:
            self._incident[triple.tail].add(triple.id)
        return triple.id

    def extend(self, triples: Iterable[Triple]) -> None:
        for triple in triples:
            self.add_triple(triple)

    def freeze(self) -> "SceneMMKG":
        """Check integrity and make the graph immutable; idempotent"""
        if not self._frozen:
            self.check_integrity()
            self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    def record_stage(self, stage: str, **details: Any) -> None:
        """Append a deterministic build-log record (no timestamps)"""
        self._check_mutable()
        entry = {"stage": stage, **details}
        self.build_log.append(entry)
        logger.info(f"{stage}: {details}")

    def copy(self) -> "SceneMMKG":
        """Mutable copy sharing the schema and build log contents"""
        clone = SceneMMKG(self.schema)
        clone.build_log = [dict(e) for e in self.build_log]
        clone._entities = dict(self._entities)
        clone._assets = dict(self._assets)
        clone._attributes = dict(self._attributes)
        clone._triples = dict(self._triples)
        for tid, triple in self._triples.items():
            clone._incident[triple.head].add(tid)
            if triple.tail_kind is TailKind.ENTITY:
                clone._incident[triple.tail].add(tid)
        return clone

    # -- access -------------------------------------------------------------

    def entities(self) -> List[Entity]:
        return [self._entities[k] for k in sorted(self._entities)]

    def triples(self) -> List[Triple]:
        return [self._triples[k] for k in sorted(self._triples)]

    def assets(self) -> List[ImageAsset]:
        return [self._assets[k] for k in sorted(self._assets)]

    def attribute_keys(self) -> List[AttributeKey]:
        return [self._attributes[k] for k in sorted(self._attributes)]

    def get_entity(self, entity_id: str) -> Entity:
        try:
            return self._entities[entity_id]
        except KeyError:
            raise EntityNotFoundError(f"Unknown entity: {entity_id}")

    def has_entity(self, entity_id: str) -> bool:
        return entity_id in self._entities

    def get_asset(self, asset_id: str) -> ImageAsset:
        try:
            return self._assets[asset_id]
        except KeyError:
            raise IntegrityError(f"Unknown image asset: {asset_id}")

    def get_attribute_key(self, name: str) -> Optional[AttributeKey]:
        return self._attributes.get(attribute_key_id(name))

    def entity_by_label(self, label: str) -> Optional[Entity]:
        for entity in self.entities():
            if entity.label == label:
                return entity
        return None

    def literal_triples(self) -> Iterator[Triple]:
        return (t for t in self.triples() if t.is_attribute)

    def __len__(self) -> int:
        return len(self._triples)

    def is_empty(self) -> bool:
        return not self._entities

    # -- queries ------------------------------------------------------------

    def neighbors(self, entity_id: str, hops: int = 1,
                  predicate: Optional[TriplePredicate] = None) -> RetrievedSubgraph:
        """
        Triples within `hops` undirected steps of an entity

        Traversal moves only through entity-tailed triples that pass `predicate`;
        literal and image tails are collected but never expanded.

        Args:
            entity_id: Start entity
            hops: Number of undirected steps, >= 0
            predicate: Optional triple filter applied to every traversed edge

        Returns:
            RetrievedSubgraph anchored at `entity_id`
        """
        if hops < 0:
            raise ContractError(f"hops must be >= 0, got {hops}")
        self.get_entity(entity_id)
        return self.expand_from([entity_id], hops, predicate)

    def expand_from(self, anchors: Iterable[str], hops: int = 1,
                    predicate: Optional[TriplePredicate] = None) -> RetrievedSubgraph:
        anchors = tuple(dict.fromkeys(anchors))
        for anchor in anchors:
            self.get_entity(anchor)

        visited = set(anchors)
        frontier = set(anchors)
        collected: Set[str] = set()
        for _ in range(hops):
            next_frontier: Set[str] = set()
            for node in sorted(frontier):
                for tid in sorted(self._incident.get(node, ())):
                    triple = self._triples[tid]
                    if predicate is not None and not predicate(triple):
                        continue
                    collected.add(tid)
                    if triple.tail_kind is not TailKind.ENTITY:
                        continue
                    other = triple.tail if triple.head == node else triple.head
                    if other not in visited:
                        visited.add(other)
                        next_frontier.add(other)
            frontier = next_frontier
            if not frontier:
                break

        return self.materialize(anchors, (self._triples[t] for t in collected))

    def materialize(self, anchors: Iterable[str], triples: Iterable[Triple],
                    scores: Optional[Dict[str, float]] = None) -> RetrievedSubgraph:
        """Build a RetrievedSubgraph resolving every id the triples reference"""
        anchors = tuple(anchors)
        ordered = sorted(set(triples), key=lambda t: t.id)
        entity_ids = set(anchors)
        asset_ids = set()
        for triple in ordered:
            entity_ids.add(triple.head)
            if triple.tail_kind is TailKind.ENTITY:
                entity_ids.add(triple.tail)
            elif triple.tail_kind is TailKind.IMAGE:
                asset_ids.add(triple.tail)
        return RetrievedSubgraph(
            anchors=anchors,
            textual=tuple(t for t in ordered if not t.is_visual),
            visual=tuple(t for t in ordered if t.is_visual),
            entities={e: self._entities[e] for e in sorted(entity_ids)},
            assets={a: self._assets[a] for a in sorted(asset_ids)},
            scores=dict(scores or {}),
        )

    def stats(self) -> Dict[str, Any]:
        """Exact record counts; `distinct_attributes` counts relations used with literal tails"""
        triples = self._triples.values()
        per_source = Counter(t.source.value for t in triples)
        tail_kinds = Counter(t.tail_kind.value for t in triples)
        image_kinds = Counter(a.kind.value for a in self._assets.values())
        keys = self._attributes.values()
        return {
            "nodes": len(self._entities),
            "edges": len(self._triples),
            "images": len(self._assets),
            "distinct_attributes": len({t.relation for t in triples if t.is_attribute}),
            "per_source": {s.value: per_source.get(s.value, 0) for s in KnowledgeSource},
            "tail_kinds": {k.value: tail_kinds.get(k.value, 0) for k in TailKind},
            "image_kinds": {k.value: image_kinds.get(k.value, 0) for k in ImageKind},
            "attribute_keys": {
                "canonical": sum(1 for k in keys if k.canonical),
                "alias": sum(1 for k in keys if not k.canonical),
                **{level.value: sum(1 for k in keys if k.level is level) for level in AttributeLevel},
            },
        }

    def integrity_issues(self) -> List[str]:
        """Full-scan referential integrity check"""
        issues = []
        for entity in self.entities():
            if self.schema is not None and not self.schema.has_concept(entity.concept_id):
                issues.append(f"Entity {entity.id} references unknown concept {entity.concept_id}")
        for triple in self.triples():
            if triple.head not in self._entities:
                issues.append(f"Triple {triple.id} has dangling head {triple.head}")
            if triple.tail_kind is TailKind.ENTITY and triple.tail not in self._entities:
                issues.append(f"Triple {triple.id} has dangling entity tail {triple.tail}")
            if triple.tail_kind is TailKind.IMAGE and triple.tail not in self._assets:
                issues.append(f"Triple {triple.id} has dangling image tail {triple.tail}")
        for key in self.attribute_keys():
            if key.alias_of is None:
                continue
            target = self._attributes.get(key.alias_of)
            if target is None:
                issues.append(f"Attribute {key.name} aliases unknown key {key.alias_of}")
            elif not target.canonical:
                issues.append(f"Attribute {key.name} aliases alias {target.name}")
        return issues

    def check_integrity(self) -> None:
        issues = self.integrity_issues()
        if issues:
            raise IntegrityError(f"{len(issues)} integrity issue(s): {issues[0]}")


def subgraph(graph: SceneMMKG, source: Optional[KnowledgeSource] = None,
             entity_ids: Optional[Iterable[str]] = None) -> SceneMMKG:
    """
    Frozen view restricted to one knowledge source and/or an entity sample

    Triples are kept when their source matches and their head is sampled. Kept
    entities are the sample plus every entity a kept triple references; assets and
    attribute keys follow the kept triples.
    """
    sample = None
    if entity_ids is not None:
        sample = set(entity_ids)
        for entity_id in sorted(sample):
            graph.get_entity(entity_id)
    if source is not None:
        source = KnowledgeSource(source)

    kept = [
        t for t in graph.triples()
        if (source is None or t.source is source) and (sample is None or t.head in sample)
    ]

    view = SceneMMKG(graph.schema)
    view.build_log = [dict(e) for e in graph.build_log]
    entity_ids = set(sample or ())
    for triple in kept:
        entity_ids.add(triple.head)
        if triple.tail_kind is TailKind.ENTITY:
            entity_ids.add(triple.tail)
    for entity_id in sorted(entity_ids):
        view.add_entity(graph.get_entity(entity_id))
    for triple in kept:
        if triple.tail_kind is TailKind.IMAGE:
            view.add_asset(graph.get_asset(triple.tail))

    used = {t.relation for t in kept if t.is_attribute}
    keys = [k for k in graph.attribute_keys() if k.name in used]
    targets = {k.alias_of for k in keys if k.alias_of}
    keys += [k for k in graph.attribute_keys() if k.id in targets and k.name not in used]
    for key in sorted(keys, key=lambda k: (not k.canonical, k.id)):
        view.add_attribute_key(key)

    view.extend(kept)
    view.record_stage("subgraph", source=source.value if source else None,
                      entities=len(entity_ids), edges=len(kept))
    return view.freeze()
