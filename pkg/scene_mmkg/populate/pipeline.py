# ABOUTME: Two-step knowledge population: schema-filtered general ingest, then scene ingest with deconflict
# ABOUTME: Scene knowledge wins over general knowledge on functional relations

import logging
from collections import Counter
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

from ..kgcore.graph import SceneMMKG
from ..kgcore.models import Entity, ImageAsset, KnowledgeSource, TailKind, Triple
from ..schema.models import SceneSchema
from ..shared.exceptions import ContractError
from ..shared.utils import normalize_label, sha256_bytes, sha256_file
from .models import ImageDescriptor, RejectLog, RelationPolicy, SourceRecord
from .sources import parse_source_records

logger = logging.getLogger(__name__)

RecordStream = Iterable[Union[SourceRecord, dict]]


def asset_checksum(descriptor: ImageDescriptor, asset_root: Optional[Path] = None) -> str:
    """sha256 of the image file when it is available locally, else of its URI"""
    path = Path(descriptor.uri)
    if asset_root is not None and not path.is_absolute():
        path = Path(asset_root) / path
    if path.is_file():
        return sha256_file(path)
    return sha256_bytes(descriptor.uri.encode("utf-8"))


class KnowledgeFiller:
    """
    Admits SourceRecords into a graph under the guidance of a scene schema

    A record is admitted iff its head label resolves to a schema concept. Heads
    map to the entity of their canonical concept; label tails outside the schema
    are kept as literal text.
    """

    def __init__(self, graph: SceneMMKG, schema: SceneSchema, expected: KnowledgeSource,
                 reject_log: Optional[RejectLog] = None, asset_root: Optional[Path] = None):
        self.graph = graph
        self.schema = schema
        self.expected = expected
        self.reject_log = reject_log if reject_log is not None else RejectLog()
        self.asset_root = asset_root
        self.counts = Counter()

    def _entity_for(self, surface: str) -> Optional[Entity]:
        concept = self.schema.resolve(surface)
        if concept is None:
            return None
        entity = Entity.create(concept.label, concept.id, aliases=[normalize_label(surface)])
        self.graph.add_entity(entity)
        return entity

    def to_triple(self, record: SourceRecord) -> Optional[Triple]:
        """Admit one record; returns None when it is filtered or rejected"""
        if record.source_kind is not self.expected:
            self.reject_log.add(record, f"Expected a {self.expected.value} record, got {record.source_kind.value}")
            self.counts["rejected"] += 1
            return None

        head = self._entity_for(record.head)
        if head is None:
            logger.debug(f"Filtered record outside the schema: head '{record.head}'")
            self.counts["filtered"] += 1
            return None

        relation = record.relation
        if record.tail_kind is TailKind.IMAGE:
            descriptor = record.tail
            asset = ImageAsset.create(descriptor.uri, asset_checksum(descriptor, self.asset_root),
                                      descriptor.kind, descriptor.caption)
            tail, tail_kind = self.graph.add_asset(asset), TailKind.IMAGE
        elif record.tail_kind is TailKind.LITERAL:
            tail, tail_kind = record.tail, TailKind.LITERAL
        else:
            tail_entity = self._entity_for(record.tail)
            if tail_entity is not None:
                tail, tail_kind = tail_entity.id, TailKind.ENTITY
            else:
                tail, tail_kind = normalize_label(record.tail), TailKind.LITERAL

        self.counts["admitted"] += 1
        return Triple.create(head.id, relation, tail, tail_kind, record.source_kind,
                             provenance=[record.source_id])

    def fill(self, records: RecordStream) -> List[Triple]:
        triples = []
        rejected_before = len(self.reject_log)
        for record in parse_source_records(records, self.reject_log):
            triple = self.to_triple(record)
            if triple is not None:
                triples.append(triple)
        self.counts["rejected"] = len(self.reject_log) - rejected_before
        return triples


def populate_general(schema: SceneSchema, records: RecordStream,
                     reject_log: Optional[RejectLog] = None) -> SceneMMKG:
    """
    Build the intermediate graph K_scene-KG from general-knowledge records

    Args:
        schema: Scene schema bounding which heads are admitted
        records: SourceRecords or decoded JSON objects with source_kind=general
        reject_log: Collects malformed records

    Returns:
        A mutable graph holding the admitted general triples
    """
    graph = SceneMMKG(schema)
    filler = KnowledgeFiller(graph, schema, KnowledgeSource.GENERAL, reject_log)
    graph.extend(filler.fill(records))
    graph.record_stage("populate_general", admitted=filler.counts["admitted"],
                       filtered=filler.counts["filtered"], rejected=filler.counts["rejected"])
    return graph


def deconflict(general: Iterable[Triple], scene: Iterable[Triple], policy: RelationPolicy) -> List[Triple]:
    """
    Merge general and scene triples; scene knowledge wins

    For every functional (head, relation) that scene knowledge asserts, general
    triples with a different tail are dropped. Identical triples merge into one
    scene-sourced triple; everything else is unioned.

    Returns:
        Merged triples sorted by id
    """
    merged: Dict[str, Triple] = {}
    for triple in scene:
        merged[triple.id] = merged[triple.id].merged_with(triple) if triple.id in merged else triple

    contested = {(t.head, t.relation) for t in merged.values() if policy.is_functional(t.relation)}
    dropped = 0
    for triple in general:
        if triple.id in merged:
            merged[triple.id] = merged[triple.id].merged_with(triple)
        elif (triple.head, triple.relation) in contested:
            dropped += 1
        else:
            merged[triple.id] = triple

    if dropped:
        logger.info(f"Deconflict dropped {dropped} general triple(s) contradicted by scene knowledge")
    return [merged[k] for k in sorted(merged)]


def populate_scene(kg: SceneMMKG, records: RecordStream, policy: RelationPolicy,
                   reject_log: Optional[RejectLog] = None,
                   asset_root: Optional[Path] = None) -> SceneMMKG:
    """
    Fill scene-oriented multimodal knowledge into the intermediate graph and freeze it

    Scene records pass the same schema filter; image tails become ImageAssets.
    The input graph is left untouched.

    Args:
        kg: Intermediate graph from populate_general
        records: SourceRecords or decoded JSON objects with source_kind=scene
        policy: Relation policy defining conflicts
        reject_log: Collects malformed records
        asset_root: Directory relative image URIs resolve against for checksums

    Returns:
        The frozen Scene-MMKG
    """
    if kg.schema is None:
        raise ContractError("populate_scene needs a graph built against a schema")
    staging = kg.copy()
    filler = KnowledgeFiller(staging, kg.schema, KnowledgeSource.SCENE, reject_log, asset_root)
    scene_triples = filler.fill(records)

    general_triples = [t for t in kg.triples() if t.source is KnowledgeSource.GENERAL]
    carried = [t for t in kg.triples() if t.source is KnowledgeSource.SCENE]
    merged = deconflict(general_triples, carried + scene_triples, policy)

    graph = SceneMMKG(kg.schema)
    graph.build_log = [dict(e) for e in kg.build_log]
    for entity in staging.entities():
        graph.add_entity(entity)
    for asset in staging.assets():
        graph.add_asset(asset)
    for key in sorted(kg.attribute_keys(), key=lambda k: (not k.canonical, k.id)):
        graph.add_attribute_key(key)
    graph.extend(merged)

    graph.record_stage("populate_scene", admitted=filler.counts["admitted"],
                       filtered=filler.counts["filtered"], rejected=filler.counts["rejected"],
                       edges=len(merged))
    return graph.freeze()
