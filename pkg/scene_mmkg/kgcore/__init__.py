"""Typed multimodal graph store: records, the mutable/frozen graph, and its on-disk layout."""

from .graph import SceneMMKG, TriplePredicate, subgraph
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
from .storage import export_triples_csv, load, read_manifest, save, triples_frame

__all__ = [
    "AttributeKey",
    "AttributeLevel",
    "Entity",
    "ImageAsset",
    "ImageKind",
    "KnowledgeSource",
    "RetrievedSubgraph",
    "SceneMMKG",
    "TailKind",
    "Triple",
    "TriplePredicate",
    "attribute_key_id",
    "export_triples_csv",
    "load",
    "read_manifest",
    "save",
    "subgraph",
    "triples_frame",
]
