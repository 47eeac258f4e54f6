import random

import networkx as nx
import pytest

from conftest import build_graph, entity, make_schema, random_graph
from scene_mmkg.kgcore import (
    AttributeKey,
    AttributeLevel,
    Entity,
    ImageAsset,
    ImageKind,
    KnowledgeSource,
    SceneMMKG,
    TailKind,
    Triple,
    attribute_key_id,
    subgraph,
)
from scene_mmkg.shared.exceptions import (
    ContractError,
    EntityNotFoundError,
    GraphFrozenError,
    IntegrityError,
)


def literal(head: str, attribute: str, value: str, source=KnowledgeSource.GENERAL, provenance=()):
    return Triple.create(entity(head).id, attribute, value, TailKind.LITERAL, source, provenance)


def test_ids_are_stable():
    assert entity("mug").id == entity("mug").id
    assert entity("mug").id != entity("cup").id
    assert literal("mug", "color", "red").id == literal("mug", "color", "red", KnowledgeSource.SCENE).id


def test_entity_must_reference_a_schema_concept():
    graph = SceneMMKG(make_schema({"mug": []}))
    graph.add_entity(entity("mug"))

    with pytest.raises(IntegrityError):
        graph.add_entity(entity("carburetor"))


def test_triples_need_known_heads_and_tails():
    graph = build_graph(["mug"])

    with pytest.raises(IntegrityError):
        graph.add_triple(literal("sink", "color", "white"))
    with pytest.raises(IntegrityError):
        graph.add_triple(Triple.create(entity("mug").id, "near", entity("sink").id, TailKind.ENTITY,
                                       KnowledgeSource.GENERAL))
    with pytest.raises(IntegrityError):
        graph.add_triple(Triple.create(entity("mug").id, "has_image", "missing-asset", TailKind.IMAGE,
                                       KnowledgeSource.SCENE))
    with pytest.raises(IntegrityError):
        graph.add_triple(literal("mug", "color", ""))


def test_identical_triples_collapse_with_merged_provenance():
    graph = build_graph(["mug"])
    graph.add_triple(literal("mug", "color", "red", provenance=["general.jsonl:1"]))
    graph.add_triple(literal("mug", "color", "red", KnowledgeSource.SCENE, provenance=["scene.jsonl:4"]))

    (triple,) = graph.triples()
    assert triple.source is KnowledgeSource.SCENE
    assert triple.provenance == ("general.jsonl:1", "scene.jsonl:4")


def test_edge_count_equals_distinct_triples():
    rng = random.Random(17)
    labels = ["mug", "sink", "stove", "kettle", "chair"]
    graph = build_graph(labels)
    keys = set()
    for _ in range(1000):
        head = rng.choice(labels)
        relation = rng.choice(["color", "used_for", "near"])
        source = rng.choice(list(KnowledgeSource))
        if relation == "near":
            tail = rng.choice(labels)
            triple = Triple.create(entity(head).id, relation, entity(tail).id, TailKind.ENTITY, source)
        else:
            tail = rng.choice(["red", "white", "tea"])
            triple = literal(head, relation, tail, source)
        keys.add((head, relation, tail))
        graph.add_triple(triple)

    assert len(graph) == len(keys) == len(graph.triples())


def test_literal_triples_register_entity_level_keys():
    graph = build_graph(["mug"], literals=[("mug", "color", "red")])

    key = graph.get_attribute_key("color")
    assert key.level is AttributeLevel.ENTITY_LEVEL
    assert key.canonical


def test_attribute_alias_rules():
    graph = SceneMMKG()
    graph.add_attribute_key(AttributeKey.create("color"))
    graph.add_attribute_key(AttributeKey.create("colour", alias_of=attribute_key_id("color")))

    with pytest.raises(IntegrityError):
        graph.add_attribute_key(AttributeKey.create("hue", alias_of=attribute_key_id("shade")))
    with pytest.raises(IntegrityError):
        graph.add_attribute_key(AttributeKey.create("tint", alias_of=attribute_key_id("colour")))


def test_image_asset_needs_a_kind():
    with pytest.raises(ContractError):
        ImageAsset.create("images/mug.png", "abc", None)


def test_frozen_graph_rejects_mutation():
    graph = build_graph(["mug"]).freeze()

    assert graph.freeze() is graph
    with pytest.raises(GraphFrozenError):
        graph.add_entity(entity("sink"))
    with pytest.raises(GraphFrozenError):
        graph.add_triple(literal("mug", "color", "red"))
    with pytest.raises(GraphFrozenError):
        graph.record_stage("populate")

    clone = graph.copy()
    clone.add_entity(entity("sink"))
    assert len(graph.entities()) == 1


def test_freeze_checks_integrity():
    graph = SceneMMKG()
    graph.add_attribute_key(AttributeKey.create("color"))
    graph._attributes[attribute_key_id("colour")] = AttributeKey.create(
        "colour", alias_of=attribute_key_id("shade"))

    assert graph.integrity_issues()
    with pytest.raises(IntegrityError):
        graph.freeze()


def test_stats_counts_every_record_kind():
    graph = build_graph(
        ["mug", "sink", "stove"],
        edges=[("stove", "located_near", "sink")],
        literals=[("mug", "color", "red"), ("mug", "material", "ceramic"), ("sink", "color", "white")],
        images=[("mug", "has_image", "images/mug.png", "a mug")],
    )

    stats = graph.stats()

    assert stats["nodes"] == 3
    assert stats["edges"] == 5
    assert stats["images"] == 1
    assert stats["distinct_attributes"] == 2
    assert stats["per_source"] == {"general": 4, "scene": 1}
    assert stats["tail_kinds"] == {"entity": 1, "literal": 3, "image": 1}
    assert stats["image_kinds"]["synthetic"] == 1


def test_neighbors_zero_hops_is_just_the_anchor():
    graph = build_graph(["mug", "sink"], edges=[("mug", "near", "sink")])

    result = graph.neighbors(entity("mug").id, hops=0)

    assert result.anchors == (entity("mug").id,)
    assert result.triples == ()
    with pytest.raises(ContractError):
        graph.neighbors(entity("mug").id, hops=-1)
    with pytest.raises(EntityNotFoundError):
        graph.neighbors(entity("kettle").id)


def test_neighbors_of_star_center_cover_all_spokes():
    spokes = [f"spoke {i}" for i in range(8)]
    graph = build_graph(["hub", *spokes], edges=[("hub", "near", s) for s in spokes])

    result = graph.neighbors(entity("hub").id, hops=1)

    assert len(result.textual) == 8
    assert set(result.entities) == {entity(label).id for label in ["hub", *spokes]}


def test_neighbors_collects_but_does_not_traverse_literals_and_images():
    graph = build_graph(["mug", "sink"], edges=[("sink", "near", "mug")],
                        literals=[("mug", "color", "red")],
                        images=[("mug", "has_image", "images/mug.png", None)])

    result = graph.neighbors(entity("mug").id, hops=1)

    assert len(result.textual) == 2
    assert len(result.visual) == 1
    assert len(result.assets) == 1


def test_neighbors_match_breadth_first_oracle():
    rng = random.Random(7)
    for _ in range(20):
        n = rng.randint(2, 40)
        graph = random_graph(rng, n, rng.randint(0, 120))
        undirected = nx.Graph()
        undirected.add_nodes_from(e.id for e in graph.entities())
        undirected.add_edges_from((t.head, t.tail) for t in graph.triples() if t.tail_kind is TailKind.ENTITY)

        start = rng.choice(graph.entities()).id
        hops = rng.randint(0, 3)
        result = graph.neighbors(start, hops=hops)

        expected = set()
        if hops > 0:
            reach = nx.single_source_shortest_path_length(undirected, start, cutoff=hops - 1)
            expected = {
                t.id for t in graph.triples()
                if t.head in reach or (t.tail_kind is TailKind.ENTITY and t.tail in reach)
            }
        assert {t.id for t in result.triples} == expected


def test_neighbors_predicate_limits_traversal():
    graph = build_graph(["a", "b", "c"], edges=[("a", "near", "b"), ("b", "on", "c")])

    result = graph.neighbors(entity("a").id, hops=2, predicate=lambda t: t.relation == "near")

    assert [t.relation for t in result.triples] == ["near"]


def test_subgraph_by_source_is_frozen_and_consistent():
    graph = build_graph(["mug", "sink"], edges=[("mug", "near", "sink")],
                        literals=[("mug", "color", "red")],
                        images=[("mug", "has_image", "images/mug.png", "a mug")]).freeze()

    scene = subgraph(graph, source=KnowledgeSource.SCENE)

    assert scene.frozen
    assert [t.source for t in scene.triples()] == [KnowledgeSource.SCENE]
    assert len(scene.assets()) == 1
    assert scene.integrity_issues() == []


def test_subgraph_by_entities():
    graph = build_graph(["mug", "sink", "stove"], edges=[("stove", "near", "sink")],
                        literals=[("mug", "color", "red")]).freeze()

    view = subgraph(graph, entity_ids=[entity("stove").id])

    assert [t.relation for t in view.triples()] == ["near"]
    assert {e.label for e in view.entities()} == {"stove", "sink"}
    with pytest.raises(EntityNotFoundError):
        subgraph(graph, entity_ids=[entity("kettle").id])


def test_retrieved_subgraph_serializes_labels():
    graph = build_graph(["mug", "sink"], edges=[("mug", "near", "sink")],
                        images=[("mug", "has_image", "images/mug.png", "a mug")])

    data = graph.neighbors(entity("mug").id).to_dict()

    assert data["anchors"][0]["label"] == "mug"
    assert data["textual"][0]["tail_label"] == "sink"
    assert data["visual"][0]["asset"]["uri"] == "images/mug.png"


def test_entity_aliases_are_sorted_and_unique():
    mug = Entity.create("mug", "c1", aliases=["mugs", "Mug", "mugs"])

    assert mug.aliases == ("Mug", "mugs")


def test_image_kinds_are_closed():
    assert {k.value for k in ImageKind} == {"synthetic", "real_world"}
