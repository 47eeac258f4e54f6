"""Shared fixtures: kitchen corpus paths, offline/injected providers and small graph factories."""

import random
from pathlib import Path
from typing import Dict, Iterable, List, Optional

import numpy as np
import pytest

from scene_mmkg.kgcore import (
    Entity,
    ImageAsset,
    ImageKind,
    KnowledgeSource,
    SceneMMKG,
    TailKind,
    Triple,
)
from scene_mmkg.populate import RejectLog, RelationPolicy, populate_general, populate_scene, read_source_records
from scene_mmkg.providers import FixtureProvider, OfflineEmbedder, ProviderConfig, StaticEmbeddingProvider
from scene_mmkg.schema import Concept, ConceptStage, Provenance, SceneSchema, concept_id

ROOT = Path(__file__).resolve().parent.parent
KITCHEN = ROOT / "data" / "kitchen"
CONFIG_PATH = ROOT / "config" / "pipeline.yml"

KITCHEN_CONCEPTS = {
    "bowl": [],
    "chair": [],
    "cupboard": ["cupboards"],
    "cutting board": ["cutting boards"],
    "dishwasher": [],
    "kettle": [],
    "knife": [],
    "microwave": ["microwave oven"],
    "mug": [],
    "oven": [],
    "refrigerator": ["refrigerators"],
    "sink": [],
    "spoon": [],
    "stove": [],
    "table": [],
}


def make_schema(concepts: Dict[str, Iterable[str]], scene: str = "kitchen",
                hierarchy: Iterable = ()) -> SceneSchema:
    """Canonical schema from label -> aliases, hierarchy given as (parent label, child label)"""
    return SceneSchema(
        scene=scene,
        concepts=tuple(Concept.create(label, ConceptStage.CANONICAL, Provenance.prompt(0), aliases=aliases)
                       for label, aliases in concepts.items()),
        hierarchy=tuple((concept_id(p), concept_id(c)) for p, c in hierarchy),
    )


def entity(label: str) -> Entity:
    return Entity.create(label, concept_id(label))


def build_graph(labels: Iterable[str], edges: Iterable = (), literals: Iterable = (),
                images: Iterable = (), schema: Optional[SceneSchema] = None,
                source: KnowledgeSource = KnowledgeSource.GENERAL) -> SceneMMKG:
    """
    Graph over entities named by label

    edges: (head, relation, tail) labels; literals: (head, attribute, text);
    images: (head, relation, uri, caption)
    """
    graph = SceneMMKG(schema)
    for label in labels:
        graph.add_entity(entity(label))
    for head, relation, tail in edges:
        graph.add_triple(Triple.create(entity(head).id, relation, entity(tail).id, TailKind.ENTITY, source))
    for head, attribute, text in literals:
        graph.add_triple(Triple.create(entity(head).id, attribute, text, TailKind.LITERAL, source))
    for head, relation, uri, caption in images:
        asset_id = graph.add_asset(ImageAsset.create(uri, f"sha-{uri}", ImageKind.SYNTHETIC, caption))
        graph.add_triple(Triple.create(entity(head).id, relation, asset_id, TailKind.IMAGE,
                                       KnowledgeSource.SCENE))
    return graph


def random_graph(rng: random.Random, n_entities: int, n_triples: int) -> SceneMMKG:
    """Random graph mixing entity, literal and image tails, with one alias attribute key"""
    from scene_mmkg.kgcore import AttributeKey, attribute_key_id

    labels = [f"entity {i:04d}" for i in range(n_entities)]
    graph = build_graph(labels)
    assets = []
    for i in range(max(1, n_entities // 10)):
        kind = rng.choice(list(ImageKind))
        caption = rng.choice([None, f"caption {i}"])
        assets.append(graph.add_asset(ImageAsset.create(f"images/{i}.png", f"sum{i}", kind, caption)))

    graph.add_attribute_key(AttributeKey.create("color"))
    graph.add_attribute_key(AttributeKey.create("colour", alias_of=attribute_key_id("color")))
    for _ in range(n_triples):
        head = entity(rng.choice(labels)).id
        source = rng.choice(list(KnowledgeSource))
        provenance = [f"src-{rng.randrange(5)}"]
        roll = rng.random()
        if roll < 0.4:
            triple = Triple.create(head, rng.choice(["near", "on", "part_of"]), entity(rng.choice(labels)).id,
                                   TailKind.ENTITY, source, provenance)
        elif roll < 0.85:
            triple = Triple.create(head, rng.choice(["color", "material", "height"]), f"value {rng.randrange(20)}",
                                   TailKind.LITERAL, source, provenance)
        else:
            triple = Triple.create(head, "has_image", rng.choice(assets), TailKind.IMAGE, source, provenance)
        graph.add_triple(triple)
    return graph


@pytest.fixture
def kitchen_dir() -> Path:
    return KITCHEN


@pytest.fixture
def offline() -> OfflineEmbedder:
    return OfflineEmbedder()


@pytest.fixture
def kitchen_fixture_config() -> ProviderConfig:
    return ProviderConfig(fixture_path=str(KITCHEN / "fixtures.json"))


@pytest.fixture
def kitchen_provider() -> FixtureProvider:
    return FixtureProvider.from_file(KITCHEN / "fixtures.json")


@pytest.fixture
def injected():
    """Factory for providers with injected embeddings (text -> vector)"""
    def make(vectors: Dict[str, List[float]], fallback: bool = False) -> StaticEmbeddingProvider:
        return StaticEmbeddingProvider(vectors, fallback=OfflineEmbedder(len(next(iter(vectors.values()))))
                                       if fallback else None)
    return make


@pytest.fixture
def kitchen_schema() -> SceneSchema:
    return make_schema(KITCHEN_CONCEPTS)


@pytest.fixture
def kitchen_policy() -> RelationPolicy:
    return RelationPolicy.from_file(KITCHEN / "relation_policy.json")


@pytest.fixture
def kitchen_graph(kitchen_schema, kitchen_policy) -> SceneMMKG:
    """Frozen graph populated from the bundled kitchen ingest files"""
    reject_log = RejectLog()
    general = populate_general(kitchen_schema, read_source_records(KITCHEN / "general.jsonl", reject_log),
                               reject_log)
    return populate_scene(general, read_source_records(KITCHEN / "scene.jsonl", reject_log), kitchen_policy,
                          reject_log, KITCHEN)


@pytest.fixture
def np_rng() -> np.random.Generator:
    return np.random.default_rng(20240611)
