# ABOUTME: Record types stored in a Scene-MMKG: entities, triples, image assets, attribute keys
# ABOUTME: Also the retrieved-subgraph view H = (H_t, H_v) handed to retrieval and encoding

import posixpath
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple

from ..shared.exceptions import ContractError
from ..shared.utils import stable_id


class TailKind(str, Enum):
    ENTITY = "entity"
    LITERAL = "literal"
    IMAGE = "image"


class KnowledgeSource(str, Enum):
    GENERAL = "general"
    SCENE = "scene"


class ImageKind(str, Enum):
    SYNTHETIC = "synthetic"
    REAL_WORLD = "real_world"


class AttributeLevel(str, Enum):
    ENTITY_LEVEL = "entity_level"
    PART_LEVEL = "part_level"


def _sorted_unique(values: Iterable[str]) -> Tuple[str, ...]:
    return tuple(sorted(set(values)))


@dataclass(frozen=True)
class Entity:
    id: str
    label: str
    concept_id: str
    aliases: Tuple[str, ...] = ()

    @classmethod
    def create(cls, label: str, concept_id: str, aliases: Iterable[str] = ()) -> "Entity":
        return cls(
            id=stable_id("entity", label, concept_id),
            label=label,
            concept_id=concept_id,
            aliases=_sorted_unique(a for a in aliases if a != label),
        )

    def with_aliases(self, aliases: Iterable[str]) -> "Entity":
        return replace(self, aliases=_sorted_unique(
            a for a in (*self.aliases, *aliases) if a != self.label))

    def to_dict(self) -> Dict[str, Any]:
        return {"id": self.id, "label": self.label, "concept_id": self.concept_id,
                "aliases": list(self.aliases)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Entity":
        return cls(id=data["id"], label=data["label"], concept_id=data["concept_id"],
                   aliases=tuple(data.get("aliases", ())))


@dataclass(frozen=True)
class Triple:
    """
    A head/relation/tail record. `tail` holds an entity id, literal text or image asset id
    depending on `tail_kind`; identical (head, relation, tail) records share one id.
    """

    id: str
    head: str
    relation: str
    tail: str
    tail_kind: TailKind
    source: KnowledgeSource
    provenance: Tuple[str, ...] = ()

    @classmethod
    def create(cls, head: str, relation: str, tail: str, tail_kind: TailKind,
               source: KnowledgeSource, provenance: Iterable[str] = ()) -> "Triple":
        tail_kind = TailKind(tail_kind)
        return cls(
            id=stable_id("triple", head, relation, tail_kind.value, tail),
            head=head,
            relation=relation,
            tail=tail,
            tail_kind=tail_kind,
            source=KnowledgeSource(source),
            provenance=_sorted_unique(provenance),
        )

    @property
    def key(self) -> Tuple[str, str, str, str]:
        return (self.head, self.relation, self.tail_kind.value, self.tail)

    @property
    def is_visual(self) -> bool:
        return self.tail_kind is TailKind.IMAGE

    @property
    def is_attribute(self) -> bool:
        return self.tail_kind is TailKind.LITERAL

    def merged_with(self, other: "Triple") -> "Triple":
        """Dedupe merge: provenance union, scene source wins"""
        if other.key != self.key:
            raise ContractError("Only identical triples can be merged")
        source = KnowledgeSource.SCENE if KnowledgeSource.SCENE in (self.source, other.source) \
            else KnowledgeSource.GENERAL
        return replace(self, source=source,
                       provenance=_sorted_unique((*self.provenance, *other.provenance)))

    def with_relation(self, relation: str) -> "Triple":
        return Triple.create(self.head, relation, self.tail, self.tail_kind, self.source, self.provenance)

    def to_dict(self) -> Dict[str, Any]:
        return {"id": self.id, "head": self.head, "relation": self.relation, "tail": self.tail,
                "tail_kind": self.tail_kind.value, "source": self.source.value,
                "provenance": list(self.provenance)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Triple":
        return cls(id=data["id"], head=data["head"], relation=data["relation"], tail=data["tail"],
                   tail_kind=TailKind(data["tail_kind"]), source=KnowledgeSource(data["source"]),
                   provenance=tuple(data.get("provenance", ())))


@dataclass(frozen=True)
class ImageAsset:
    """Image referenced by URI + checksum; bytes are never stored in the graph"""

    id: str
    uri: str
    checksum: str
    kind: ImageKind
    caption: Optional[str] = None

    @classmethod
    def create(cls, uri: str, checksum: str, kind: ImageKind, caption: Optional[str] = None) -> "ImageAsset":
        if kind is None:
            raise ContractError(f"Image asset {uri} has no kind")
        kind = ImageKind(kind)
        return cls(id=stable_id("asset", uri, kind.value), uri=uri, checksum=checksum,
                   kind=kind, caption=caption or None)

    @property
    def display_text(self) -> str:
        """Caption if present, else the URI basename"""
        return self.caption or posixpath.basename(self.uri.rstrip("/")) or self.uri

    def to_dict(self) -> Dict[str, Any]:
        return {"id": self.id, "uri": self.uri, "checksum": self.checksum,
                "kind": self.kind.value, "caption": self.caption}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ImageAsset":
        return cls(id=data["id"], uri=data["uri"], checksum=data["checksum"],
                   kind=ImageKind(data["kind"]), caption=data.get("caption"))


@dataclass(frozen=True)
class AttributeKey:
    id: str
    name: str
    level: AttributeLevel = AttributeLevel.ENTITY_LEVEL
    canonical: bool = True
    alias_of: Optional[str] = None

    @classmethod
    def create(cls, name: str, level: AttributeLevel = AttributeLevel.ENTITY_LEVEL,
               alias_of: Optional[str] = None) -> "AttributeKey":
        return cls(id=attribute_key_id(name), name=name, level=AttributeLevel(level),
                   canonical=alias_of is None, alias_of=alias_of)

    def to_dict(self) -> Dict[str, Any]:
        return {"id": self.id, "name": self.name, "level": self.level.value,
                "canonical": self.canonical, "alias_of": self.alias_of}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "AttributeKey":
        return cls(id=data["id"], name=data["name"], level=AttributeLevel(data["level"]),
                   canonical=bool(data["canonical"]), alias_of=data.get("alias_of"))


def attribute_key_id(name: str) -> str:
    return stable_id("attribute", name)


@dataclass(frozen=True)
class RetrievedSubgraph:
    """
    H = (H_t, H_v) anchored at retrieved entities

    `textual` holds entity- and literal-tailed triples, `visual` image-tailed ones.
    `entities` and `assets` resolve every id the triples reference; `scores` maps
    anchor entity ids and retained visual triple ids to similarity scores.
    """

    anchors: Tuple[str, ...]
    textual: Tuple[Triple, ...] = ()
    visual: Tuple[Triple, ...] = ()
    entities: Mapping[str, Entity] = field(default_factory=dict)
    assets: Mapping[str, ImageAsset] = field(default_factory=dict)
    scores: Mapping[str, float] = field(default_factory=dict)

    @property
    def triples(self) -> Tuple[Triple, ...]:
        return self.textual + self.visual

    def is_empty(self) -> bool:
        return not self.anchors and not self.textual and not self.visual

    def to_dict(self) -> Dict[str, Any]:
        def describe(triple: Triple) -> Dict[str, Any]:
            record = triple.to_dict()
            record["head_label"] = self.entities[triple.head].label
            if triple.tail_kind is TailKind.ENTITY:
                record["tail_label"] = self.entities[triple.tail].label
            elif triple.tail_kind is TailKind.IMAGE:
                record["asset"] = self.assets[triple.tail].to_dict()
            if triple.id in self.scores:
                record["score"] = self.scores[triple.id]
            return record

        return {
            "anchors": [
                {"id": a, "label": self.entities[a].label, "score": self.scores.get(a)}
                for a in self.anchors
            ],
            "textual": [describe(t) for t in self.textual],
            "visual": [describe(t) for t in self.visual],
        }
