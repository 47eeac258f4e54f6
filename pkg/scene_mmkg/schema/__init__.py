"""Prompt-based scene schema design: mining, lexical expansion, clustering, hierarchy."""

from .mining import mine_concepts
from .models import (
    Concept,
    ConceptStage,
    LexicalKB,
    Provenance,
    ProvenanceKind,
    SceneProfile,
    SceneSchema,
    concept_id,
)
from .ontology import build_hierarchy, build_schema, cluster_concepts, design_schema, expand_concepts
from .prompts import build_prompt, parse_candidates, prompt_key, validate_template

__all__ = [
    "Concept",
    "ConceptStage",
    "LexicalKB",
    "Provenance",
    "ProvenanceKind",
    "SceneProfile",
    "SceneSchema",
    "build_hierarchy",
    "build_prompt",
    "build_schema",
    "cluster_concepts",
    "concept_id",
    "design_schema",
    "expand_concepts",
    "mine_concepts",
    "parse_candidates",
    "prompt_key",
    "validate_template",
]
