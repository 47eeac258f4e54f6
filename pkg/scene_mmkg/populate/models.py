# ABOUTME: Ingest record types for knowledge population and the relation conflict policy
# ABOUTME: Also the reject log collecting malformed records with a reason

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

from ..kgcore.models import ImageKind, KnowledgeSource, TailKind
from ..shared.exceptions import ConfigurationError, ContractError
from ..shared.utils import atomic_file, canonical_json, load_json, normalize_label

logger = logging.getLogger(__name__)

RECORD_FIELDS = {"head", "relation", "tail", "source_id", "source_kind"}
TAIL_FIELDS = {"label", "literal", "image"}
IMAGE_FIELDS = {"uri", "kind", "caption"}


class RecordError(ContractError):
    """A single ingest record is malformed; the stream continues"""


class RelationKind(str, Enum):
    FUNCTIONAL = "functional"
    MULTI_VALUED = "multi_valued"


@dataclass(frozen=True)
class RelationPolicy:
    """
    Relation label -> functional | multi_valued; relations not listed are multi_valued

    Relations are normalized like record relations, so lookups ignore case and spacing.
    """

    kinds: Mapping[str, RelationKind] = field(default_factory=dict)

    def kind(self, relation: str) -> RelationKind:
        return self.kinds.get(normalize_label(relation), RelationKind.MULTI_VALUED)

    def is_functional(self, relation: str) -> bool:
        return self.kind(relation) is RelationKind.FUNCTIONAL

    @classmethod
    def from_dict(cls, data: Mapping[str, str]) -> "RelationPolicy":
        kinds = {}
        for relation, kind in data.items():
            try:
                kinds[normalize_label(relation)] = RelationKind(kind)
            except ValueError:
                raise ConfigurationError(f"Relation '{relation}' has unknown policy '{kind}'")
        return cls(kinds)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "RelationPolicy":
        data = load_json(path)
        if not isinstance(data, dict):
            raise ConfigurationError(f"Relation policy must be a JSON object: {path}")
        return cls.from_dict(data)


@dataclass(frozen=True)
class ImageDescriptor:
    uri: str
    kind: ImageKind
    caption: Optional[str] = None

    @classmethod
    def from_dict(cls, data: Any) -> "ImageDescriptor":
        if not isinstance(data, dict) or set(data) - IMAGE_FIELDS:
            raise RecordError(f"Image descriptor must be an object with fields {sorted(IMAGE_FIELDS)}")
        uri = data.get("uri")
        if not isinstance(uri, str) or not uri.strip():
            raise RecordError("Image descriptor has no uri")
        if data.get("kind") is None:
            raise RecordError("Image descriptor has no kind")
        try:
            kind = ImageKind(data["kind"])
        except ValueError:
            raise RecordError(f"Unknown image kind: {data['kind']!r}")
        caption = data.get("caption")
        if caption is not None and not isinstance(caption, str):
            raise RecordError("Image caption must be text")
        return cls(uri=uri.strip(), kind=kind, caption=(caption or "").strip() or None)

    def to_dict(self) -> Dict[str, Any]:
        return {"uri": self.uri, "kind": self.kind.value, "caption": self.caption}


@dataclass(frozen=True)
class SourceRecord:
    """
    One ingest record: a head label, a relation and one tail

    `tail` is a label (entity candidate), literal text or an ImageDescriptor,
    as named by `tail_kind`. Image tails are only allowed on scene records.
    """

    head: str
    relation: str
    tail_kind: TailKind
    tail: Union[str, ImageDescriptor]
    source_id: str
    source_kind: KnowledgeSource

    @classmethod
    def from_dict(cls, data: Any) -> "SourceRecord":
        if not isinstance(data, dict):
            raise RecordError("Record is not a JSON object")
        missing = RECORD_FIELDS - set(data)
        extra = set(data) - RECORD_FIELDS
        if missing or extra:
            raise RecordError(f"Record fields differ: missing={sorted(missing)} unexpected={sorted(extra)}")

        try:
            source_kind = KnowledgeSource(data["source_kind"])
        except ValueError:
            raise RecordError(f"Unknown source_kind: {data['source_kind']!r}")
        source_id = data["source_id"]
        if not isinstance(source_id, str) or not source_id.strip():
            raise RecordError("Record has no source_id")
        head = data["head"] if isinstance(data["head"], str) else None
        if normalize_label(head) is None:
            raise RecordError("Record has an empty head")

        tail = data["tail"]
        if not isinstance(tail, dict) or len(tail) != 1 or not set(tail) <= TAIL_FIELDS:
            raise RecordError("Tail must be an object with exactly one of 'label', 'literal', 'image'")
        (tail_field, value), = tail.items()

        if tail_field == "image":
            if source_kind is not KnowledgeSource.SCENE:
                raise RecordError("Image tails are only allowed on scene records")
            tail_kind, tail_value = TailKind.IMAGE, ImageDescriptor.from_dict(value)
        elif tail_field == "literal":
            if not isinstance(value, str) or not value.strip():
                raise RecordError("Literal tail is empty")
            tail_kind, tail_value = TailKind.LITERAL, value.strip()
        else:
            if normalize_label(value if isinstance(value, str) else None) is None:
                raise RecordError("Label tail is empty")
            tail_kind, tail_value = TailKind.ENTITY, value

        relation = normalize_label(data["relation"] if isinstance(data["relation"], str) else None)
        if relation is None:
            raise RecordError("Record has an empty relation")
        return cls(head=head, relation=relation, tail_kind=tail_kind, tail=tail_value,
                   source_id=source_id.strip(), source_kind=source_kind)

    def to_dict(self) -> Dict[str, Any]:
        if self.tail_kind is TailKind.IMAGE:
            tail = {"image": self.tail.to_dict()}
        elif self.tail_kind is TailKind.LITERAL:
            tail = {"literal": self.tail}
        else:
            tail = {"label": self.tail}
        return {"head": self.head, "relation": self.relation, "tail": tail,
                "source_id": self.source_id, "source_kind": self.source_kind.value}


class RejectLog:
    """Malformed ingest records with the reason they were rejected"""

    def __init__(self):
        self.entries: List[Dict[str, Any]] = []

    def add(self, record: Any, reason: str) -> None:
        if isinstance(record, SourceRecord):
            record = record.to_dict()
        self.entries.append({"record": record, "reason": reason})
        logger.warning(f"Rejected record: {reason}")

    def __len__(self) -> int:
        return len(self.entries)

    def reasons(self) -> List[str]:
        return [e["reason"] for e in self.entries]

    def write(self, path: Union[str, Path]) -> None:
        """Write the log as JSONL, one {record, reason} object per line"""
        with atomic_file(path) as scratch:
            with open(scratch, "w", encoding="utf-8", newline="\n") as f:
                for entry in self.entries:
                    f.write(canonical_json(entry))
                    f.write("\n")

    @staticmethod
    def read(path: Union[str, Path]) -> List[Dict[str, Any]]:
        with open(path, "r", encoding="utf-8") as f:
            return [json.loads(line) for line in f if line.strip()]
