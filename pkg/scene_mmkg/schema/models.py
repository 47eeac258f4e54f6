# ABOUTME: Scene schema types: scene profiles, concepts with stage and provenance, the schema itself
# ABOUTME: Plus the lexical knowledge base of hypernym/hyponym extracts used for expansion

from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple, Union

import networkx as nx

from ..shared.exceptions import ConfigurationError, ContractError, IntegrityError
from ..shared.utils import load_json, normalize_label, stable_id


@dataclass(frozen=True)
class SceneProfile:
    """A scene name S and its ordered natural-language profiles W_S"""

    scene: str
    profiles: Tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.scene or not self.scene.strip():
            raise ContractError("Scene profile needs a scene name")
        object.__setattr__(self, "profiles", tuple(self.profiles))
        if not self.profiles:
            raise ContractError(f"Scene '{self.scene}' has no profiles")
        if any(not isinstance(p, str) or not p.strip() for p in self.profiles):
            raise ContractError(f"Scene '{self.scene}' has an empty profile entry")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SceneProfile":
        try:
            return cls(scene=data["scene"], profiles=tuple(data["profiles"]))
        except (KeyError, TypeError) as e:
            raise ConfigurationError(f"Scene profile file needs 'scene' and 'profiles': {e}")

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "SceneProfile":
        return cls.from_dict(load_json(path))


class ConceptStage(str, Enum):
    RAW = "raw"
    EXPANDED = "expanded"
    CANONICAL = "canonical"

    @property
    def rank(self) -> int:
        return list(ConceptStage).index(self)


class ProvenanceKind(str, Enum):
    PROMPT = "prompt"
    HYPERNYM_OF = "hypernym_of"
    HYPONYM_OF = "hyponym_of"
    MERGED = "merged"


@dataclass(frozen=True)
class Provenance:
    """Where a concept came from: a prompt index, a lexical relation to another concept, or a merge"""

    kind: ProvenanceKind
    prompt_index: Optional[int] = None
    concept_ids: Tuple[str, ...] = ()

    @classmethod
    def prompt(cls, index: int) -> "Provenance":
        return cls(ProvenanceKind.PROMPT, prompt_index=index)

    @classmethod
    def hypernym_of(cls, concept_id: str) -> "Provenance":
        return cls(ProvenanceKind.HYPERNYM_OF, concept_ids=(concept_id,))

    @classmethod
    def hyponym_of(cls, concept_id: str) -> "Provenance":
        return cls(ProvenanceKind.HYPONYM_OF, concept_ids=(concept_id,))

    @classmethod
    def merged(cls, concept_ids: Iterable[str]) -> "Provenance":
        return cls(ProvenanceKind.MERGED, concept_ids=tuple(sorted(set(concept_ids))))

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind.value}
        if self.kind is ProvenanceKind.PROMPT:
            data["prompt_index"] = self.prompt_index
        else:
            data["concept_ids"] = list(self.concept_ids)
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Provenance":
        return cls(kind=ProvenanceKind(data["kind"]), prompt_index=data.get("prompt_index"),
                   concept_ids=tuple(data.get("concept_ids", ())))


def concept_id(label: str) -> str:
    return stable_id("concept", label)


@dataclass(frozen=True)
class Concept:
    id: str
    label: str
    stage: ConceptStage
    provenance: Provenance
    aliases: Tuple[str, ...] = ()

    @classmethod
    def create(cls, label: str, stage: ConceptStage, provenance: Provenance,
               aliases: Iterable[str] = ()) -> "Concept":
        return cls(id=concept_id(label), label=label, stage=ConceptStage(stage),
                   provenance=provenance, aliases=tuple(sorted(set(aliases) - {label})))

    def advance(self, stage: ConceptStage, **changes: Any) -> "Concept":
        """Move to a later stage; stages only go raw -> expanded -> canonical"""
        stage = ConceptStage(stage)
        if stage.rank < self.stage.rank:
            raise ContractError(f"Concept '{self.label}' cannot move from {self.stage.value} to {stage.value}")
        return replace(self, stage=stage, **changes)

    @property
    def labels(self) -> Tuple[str, ...]:
        return (self.label, *self.aliases)

    def to_dict(self) -> Dict[str, Any]:
        return {"id": self.id, "label": self.label, "stage": self.stage.value,
                "aliases": list(self.aliases), "provenance": self.provenance.to_dict()}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Concept":
        return cls(id=data["id"], label=data["label"], stage=ConceptStage(data["stage"]),
                   provenance=Provenance.from_dict(data["provenance"]),
                   aliases=tuple(data.get("aliases", ())))


@dataclass(frozen=True)
class LexicalKB:
    """
    Hypernym / hyponym extracts keyed by normalized label

    Lookups are total: a label with no entry has no hypernyms or hyponyms.
    """

    hypernyms: Mapping[str, FrozenSet[str]] = field(default_factory=dict)
    hyponyms: Mapping[str, FrozenSet[str]] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "LexicalKB":
        def read(section: str) -> Dict[str, FrozenSet[str]]:
            raw = data.get(section, {}) or {}
            if not isinstance(raw, dict):
                raise ConfigurationError(f"Lexical KB section '{section}' must be a mapping")
            table: Dict[str, set] = {}
            for key, values in raw.items():
                label = normalize_label(key)
                if label is None:
                    continue
                targets = {normalize_label(v) for v in values} - {None, label}
                table.setdefault(label, set()).update(targets)
            return {k: frozenset(v) for k, v in table.items()}

        return cls(hypernyms=read("hypernyms"), hyponyms=read("hyponyms"))

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "LexicalKB":
        return cls.from_dict(load_json(path))

    def hypernyms_of(self, label: str) -> FrozenSet[str]:
        return self.hypernyms.get(label, frozenset())

    def hyponyms_of(self, label: str) -> FrozenSet[str]:
        return self.hyponyms.get(label, frozenset())

    @cached_property
    def taxonomy(self) -> nx.DiGraph:
        """Edges point from the more general label to the more specific one"""
        graph = nx.DiGraph()
        for label, parents in self.hypernyms.items():
            graph.add_edges_from((parent, label) for parent in parents)
        for label, children in self.hyponyms.items():
            graph.add_edges_from((label, child) for child in children)
        return graph

    def is_direct_hypernym(self, general: str, specific: str) -> bool:
        return general in self.hypernyms_of(specific) or specific in self.hyponyms_of(general)

    def is_hypernym(self, general: str, specific: str) -> bool:
        """True when `general` subsumes `specific`, transitively"""
        if general == specific or general not in self.taxonomy or specific not in self.taxonomy:
            return False
        return nx.has_path(self.taxonomy, general, specific)

    def prefer(self, a: str, b: str) -> str:
        """Canonical label for a merged pair: the hypernym, else the lexicographically smaller"""
        a_general = self.is_hypernym(a, b)
        b_general = self.is_hypernym(b, a)
        if a_general and not b_general:
            return a
        if b_general and not a_general:
            return b
        return min(a, b)


@dataclass(frozen=True)
class SceneSchema:
    """
    The canonical concept set C of a scene with its hypernym hierarchy

    `hierarchy` holds (hypernym concept id, hyponym concept id) edges and is acyclic.
    """

    scene: str
    concepts: Tuple[Concept, ...]
    hierarchy: Tuple[Tuple[str, str], ...] = ()
    gamma1: float = 0.7
    max_depth: int = 2

    def __post_init__(self) -> None:
        object.__setattr__(self, "concepts", tuple(sorted(self.concepts, key=lambda c: c.id)))
        object.__setattr__(self, "hierarchy", tuple(sorted(tuple(e) for e in self.hierarchy)))
        ids = {c.id for c in self.concepts}
        if len(ids) != len(self.concepts):
            raise IntegrityError("Schema has duplicate concept ids")
        for concept in self.concepts:
            if concept.stage is not ConceptStage.CANONICAL:
                raise IntegrityError(f"Schema concept '{concept.label}' is not canonical")
        for parent, child in self.hierarchy:
            if parent not in ids or child not in ids:
                raise IntegrityError(f"Schema hierarchy edge {parent}->{child} is dangling")
        if not nx.is_directed_acyclic_graph(self.hierarchy_graph):
            raise IntegrityError("Schema hierarchy contains a cycle")

    @cached_property
    def hierarchy_graph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(c.id for c in self.concepts)
        graph.add_edges_from(self.hierarchy)
        return graph

    @cached_property
    def _by_id(self) -> Dict[str, Concept]:
        return {c.id: c for c in self.concepts}

    @cached_property
    def _by_label(self) -> Dict[str, Concept]:
        table: Dict[str, Concept] = {}
        for concept in self.concepts:
            for label in concept.labels:
                table.setdefault(label, concept)
        return table

    def concept(self, concept_id: str) -> Optional[Concept]:
        return self._by_id.get(concept_id)

    def has_concept(self, concept_id: str) -> bool:
        return concept_id in self._by_id

    def resolve(self, label: Optional[str]) -> Optional[Concept]:
        """Concept whose canonical label or alias equals the normalized label"""
        normalized = normalize_label(label)
        if normalized is None:
            return None
        return self._by_label.get(normalized)

    @property
    def labels(self) -> FrozenSet[str]:
        return frozenset(self._by_label)

    def roots(self) -> List[str]:
        return sorted(n for n in self.hierarchy_graph if self.hierarchy_graph.in_degree(n) == 0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scene": self.scene,
            "concepts": [c.to_dict() for c in self.concepts],
            "hierarchy": [list(edge) for edge in self.hierarchy],
            "thresholds": {"gamma1": self.gamma1},
            "max_depth": self.max_depth,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SceneSchema":
        try:
            return cls(
                scene=data["scene"],
                concepts=tuple(Concept.from_dict(c) for c in data["concepts"]),
                hierarchy=tuple(tuple(edge) for edge in data.get("hierarchy", ())),
                gamma1=float(data.get("thresholds", {}).get("gamma1", 0.7)),
                max_depth=int(data.get("max_depth", 2)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigurationError(f"Malformed schema document: {e}")

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "SceneSchema":
        return cls.from_dict(load_json(path))
