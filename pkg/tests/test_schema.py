import numpy as np
import pytest

from conftest import KITCHEN, make_schema
from scene_mmkg.providers import EmbeddingVector, FixtureProvider, cosine
from scene_mmkg.schema import (
    Concept,
    ConceptStage,
    LexicalKB,
    Provenance,
    ProvenanceKind,
    SceneProfile,
    SceneSchema,
    build_prompt,
    cluster_concepts,
    concept_id,
    design_schema,
    expand_concepts,
    mine_concepts,
    parse_candidates,
)
from scene_mmkg.shared.exceptions import ContractError, IntegrityError, TemplateError
from scene_mmkg.shared.similarity import fixpoint_merge

TEMPLATE = "Objects in a {S}: {W}"


@pytest.fixture
def lexicon() -> LexicalKB:
    return LexicalKB.from_file(KITCHEN / "lexical_kb.json")


@pytest.fixture
def profile() -> SceneProfile:
    return SceneProfile.from_file(KITCHEN / "profiles.json")


def raw(*labels):
    return [Concept.create(label, ConceptStage.RAW, Provenance.prompt(i)) for i, label in enumerate(labels)]


def oracle_partition(labels, vectors, threshold):
    """Transitive closure of the thresholded similarity relation, relabelled until stable"""
    linked = [(a, b) for a in labels for b in labels
              if a < b and round(cosine(vectors[a], vectors[b]), 12) >= threshold]
    group = {label: label for label in labels}
    changed = True
    while changed:
        changed = False
        for a, b in linked:
            low, high = sorted((group[a], group[b]))
            if low == high:
                continue
            for label in labels:
                if group[label] == high:
                    group[label] = low
            changed = True
    partition = {}
    for label in sorted(labels):
        partition.setdefault(group[label], []).append(label)
    return {min(members): tuple(members) for members in partition.values()}


def test_template_slots_must_appear_once(profile):
    with pytest.raises(TemplateError):
        build_prompt(profile, "Objects in a {S}")
    with pytest.raises(TemplateError):
        build_prompt(profile, "{S} {S} {W}")


def test_one_prompt_per_profile(profile):
    prompts = build_prompt(profile, TEMPLATE)

    assert len(prompts) == 5
    assert prompts[0].startswith("Objects in a kitchen: A home kitchen")


def test_slot_markers_in_values_stay_literal():
    profile = SceneProfile(scene="{W} room", profiles=("tiles and a {S} sign",))

    assert build_prompt(profile, TEMPLATE) == ["Objects in a {W} room: tiles and a {S} sign"]


def test_empty_profile_is_rejected():
    with pytest.raises(ContractError):
        SceneProfile(scene="kitchen", profiles=())


def test_parse_candidates_strips_list_noise():
    outputs = ["1. Mug\n- sink, \"Stove\".", "* mug\n\n2) Cutting   Board"]

    assert parse_candidates(outputs) == ["mug", "sink", "stove", "cutting board"]


def test_mining_unions_labels_with_first_prompt(profile, kitchen_provider):
    concepts = mine_concepts(profile, TEMPLATE, kitchen_provider)
    by_label = {c.label: c for c in concepts}

    assert [c.label for c in concepts] == sorted(by_label)
    assert "mug" in by_label and "Mug" not in by_label
    assert by_label["mug"].provenance == Provenance.prompt(0)
    assert by_label["kettle"].provenance == Provenance.prompt(1)
    assert all(c.stage is ConceptStage.RAW for c in concepts)


def test_mining_is_independent_of_worker_count(profile, kitchen_provider):
    assert mine_concepts(profile, TEMPLATE, kitchen_provider, max_workers=1) == \
        mine_concepts(profile, TEMPLATE, kitchen_provider, max_workers=8)


def test_expansion_respects_depth(lexicon):
    concepts = raw("mug")

    assert [c.label for c in expand_concepts(concepts, lexicon, 0)] == ["mug"]
    assert [c.label for c in expand_concepts(concepts, lexicon, 1)] == ["cup", "mug"]
    depth_two = {c.label: c for c in expand_concepts(concepts, lexicon, 2)}
    assert set(depth_two) == {"container", "cup", "mug"}
    assert depth_two["cup"].provenance.kind is ProvenanceKind.HYPERNYM_OF
    assert depth_two["container"].provenance.concept_ids == (concept_id("cup"),)
    assert depth_two["mug"].stage is ConceptStage.EXPANDED
    with pytest.raises(ContractError):
        expand_concepts(concepts, lexicon, -1)


def test_expansion_follows_hyponyms(lexicon):
    labels = {c.label for c in expand_concepts(raw("appliance"), lexicon, 1)}

    assert {"toaster", "refrigerator", "device"} <= labels


def test_expansion_reaches_siblings_through_hypernyms():
    tableware = LexicalKB.from_dict({
        "hypernyms": {"disposable chopsticks": ["tableware", "disposable cutlery"]},
        "hyponyms": {"tableware": ["spoon", "flatware"],
                     "disposable cutlery": ["disposable bowl", "plastic tablecloth"]},
    })

    one = {c.label for c in expand_concepts(raw("disposable chopsticks"), tableware, 1)}
    two = {c.label: c for c in expand_concepts(raw("disposable chopsticks"), tableware, 2)}

    assert one == {"disposable chopsticks", "tableware", "disposable cutlery"}
    assert set(two) - {"disposable chopsticks"} == {
        "tableware", "disposable cutlery", "spoon", "flatware", "disposable bowl", "plastic tablecloth"}
    assert two["spoon"].provenance.kind is ProvenanceKind.HYPONYM_OF
    assert two["spoon"].provenance.concept_ids == (concept_id("tableware"),)


def test_stages_only_move_forward():
    concept = Concept.create("mug", ConceptStage.CANONICAL, Provenance.prompt(0))

    with pytest.raises(ContractError):
        concept.advance(ConceptStage.RAW)


def test_lexicon_prefers_the_hypernym(lexicon):
    assert lexicon.prefer("mug", "cup") == "cup"
    assert lexicon.prefer("container", "mug") == "container"
    assert lexicon.prefer("refrigerators", "refrigerator") == "refrigerator"


def test_clustering_merges_surface_variants(offline):
    concepts = raw("refrigerator", "refrigerators", "stove", "cupboards", "cupboard")

    canonical = cluster_concepts(concepts, 0.7, offline)

    by_label = {c.label: c for c in canonical}
    assert sorted(by_label) == ["cupboard", "refrigerator", "stove"]
    assert by_label["refrigerator"].aliases == ("refrigerators",)
    assert by_label["refrigerator"].provenance.kind is ProvenanceKind.MERGED
    assert by_label["stove"].provenance == Provenance.prompt(2)
    assert all(c.stage is ConceptStage.CANONICAL for c in canonical)


def test_clustering_uses_hypernym_as_canonical(injected, lexicon):
    provider = injected({"mug": [1.0, 0.0], "cup": [0.95, 0.05], "sink": [0.0, 1.0]})

    canonical = cluster_concepts(raw("mug", "cup", "sink"), 0.9, provider, lexicon)

    assert [(c.label, c.aliases) for c in canonical] == [("cup", ("mug",)), ("sink", ())]


def test_clustering_reaches_a_fixpoint(np_rng, injected):
    for _ in range(20):
        n = int(np_rng.integers(2, 30))
        labels = [f"c{i:02d}" for i in range(n)]
        provider = injected({label: np_rng.normal(size=6).tolist() for label in labels})
        threshold = float(np_rng.uniform(0.3, 0.9))

        canonical = cluster_concepts(raw(*labels), threshold, provider)
        again = cluster_concepts(canonical, threshold, provider)

        assert [c.label for c in again] == [c.label for c in canonical]
        assert fixpoint_merge([c.label for c in canonical], provider.embed, threshold).merges == 0
        assert sorted(m for c in canonical for m in c.labels) == labels


def test_merge_partition_matches_loop_oracle(np_rng):
    for _ in range(100):
        n = int(np_rng.integers(1, 31))
        labels = [f"c{i:02d}" for i in range(n)]
        centers = np_rng.normal(size=(max(1, n // 4), 8))
        vectors = {
            label: EmbeddingVector.from_values(centers[i % len(centers)] + 0.6 * np_rng.normal(size=8))
            for i, label in enumerate(labels)
        }
        threshold = float(np_rng.uniform(0.2, 0.95))

        result = fixpoint_merge(labels, vectors.__getitem__, threshold)

        assert result.members == oracle_partition(labels, vectors, threshold)


def test_canonical_count_grows_with_threshold(np_rng):
    thresholds = [0.0, 0.05, 0.3, 0.5, 0.7, 0.9, 0.95, 1.0]
    for _ in range(100):
        n = int(np_rng.integers(1, 31))
        groups = int(np_rng.integers(1, 8))
        labels = [f"c{i:02d}" for i in range(n)]
        vectors = {}
        for i, label in enumerate(labels):
            values = np_rng.uniform(0.0, 0.01, size=8)
            values[i % groups] += 1.0
            vectors[label] = EmbeddingVector.from_values(values, normalize=False)

        counts = [len(fixpoint_merge(labels, vectors.__getitem__, t).members) for t in thresholds]

        assert counts == sorted(counts)
        assert counts[0] == 1
        assert counts[3] == min(n, groups)


def test_canonical_count_grows_with_threshold_on_scattered_vectors():
    rng = np.random.default_rng(0)
    labels = [f"c{i}" for i in range(6)]
    for _ in range(2000):
        vectors = {label: EmbeddingVector.from_values(rng.normal(size=3)) for label in labels}
        thresholds = sorted(float(t) for t in rng.uniform(0.0, 1.0, size=4))

        counts = [len(fixpoint_merge(labels, vectors.__getitem__, t).members) for t in thresholds]

        assert counts == sorted(counts)


def test_bridge_label_links_clusters_at_every_lower_threshold():
    def planar(degrees):
        return [np.cos(np.radians(degrees)), np.sin(np.radians(degrees)), 0.0]

    vectors = {
        "a": EmbeddingVector.from_values([0.5, 0.0, np.sqrt(0.75)]),
        "b": EmbeddingVector.from_values(planar(0)),
        "c": EmbeddingVector.from_values(planar(40)),
        "d": EmbeddingVector.from_values(planar(-40)),
        "e": EmbeddingVector.from_values(planar(45)),
        "f": EmbeddingVector.from_values(planar(-45)),
    }

    loose = fixpoint_merge(vectors, vectors.__getitem__, 0.45)
    tight = fixpoint_merge(vectors, vectors.__getitem__, 0.7)

    assert loose.members == {"a": ("a", "b", "c", "d", "e", "f")}
    assert tight.members == {"a": ("a",), "b": ("b", "c", "d", "e", "f")}
    assert (loose.merges, tight.merges) == (5, 4)


def test_clustering_merges_close_pair_and_keeps_the_far_one(injected):
    provider = injected({"c1": [1.0, 0.0], "c2": [0.8, 0.6], "c3": [0.0, 1.0]})

    canonical = cluster_concepts(raw("c1", "c2", "c3"), 0.7, provider)

    assert [(c.label, c.aliases) for c in canonical] == [("c1", ("c2",)), ("c3", ())]


def test_threshold_out_of_range(offline):
    with pytest.raises(ContractError):
        cluster_concepts(raw("mug"), 1.5, offline)


def test_schema_rejects_cycles_and_dangling_edges():
    concepts = (Concept.create("cup", ConceptStage.CANONICAL, Provenance.prompt(0)),
                Concept.create("mug", ConceptStage.CANONICAL, Provenance.prompt(0)))
    cup, mug = concept_id("cup"), concept_id("mug")

    with pytest.raises(IntegrityError):
        SceneSchema("kitchen", concepts, hierarchy=((cup, mug), (mug, cup)))
    with pytest.raises(IntegrityError):
        SceneSchema("kitchen", concepts, hierarchy=((cup, concept_id("jar")),))
    with pytest.raises(IntegrityError):
        SceneSchema("kitchen", raw("mug"))


def test_schema_resolves_aliases():
    schema = make_schema({"refrigerator": ["refrigerators"]})

    assert schema.resolve("  Refrigerators ").label == "refrigerator"
    assert schema.resolve("carburetor") is None
    assert schema.labels == frozenset({"refrigerator", "refrigerators"})


def test_design_kitchen_schema(profile, kitchen_fixture_config, lexicon):
    template = (KITCHEN / "template.txt").read_text(encoding="utf-8")

    schema = design_schema(profile, template, kitchen_fixture_config, lexicon, max_depth=2, gamma1=0.7)

    assert schema.scene == "kitchen"
    assert schema.resolve("refrigerators").label == "refrigerator"
    assert schema.resolve("cutting boards").label == "cutting board"
    assert schema.resolve("mug").label == "mug"
    assert schema.resolve("container") is not None
    assert schema.resolve("carburetor") is None
    assert (concept_id("cup"), concept_id("mug")) in schema.hierarchy
    assert (concept_id("container"), concept_id("cup")) in schema.hierarchy
    assert SceneSchema.from_dict(schema.to_dict()) == schema


def test_design_is_deterministic(profile, kitchen_fixture_config, lexicon):
    template = (KITCHEN / "template.txt").read_text(encoding="utf-8")

    first = design_schema(profile, template, kitchen_fixture_config, lexicon)
    second = design_schema(profile, template, FixtureProvider.from_file(KITCHEN / "fixtures.json"), lexicon)

    assert first.to_dict() == second.to_dict()


def test_fixture_miss_surfaces_from_mining(profile, lexicon):
    from scene_mmkg.shared.exceptions import ProviderConfigError

    provider = FixtureProvider({"kitchen-profile-0": ["mug"]})

    with pytest.raises(ProviderConfigError, match="kitchen-profile-1"):
        mine_concepts(profile, TEMPLATE, provider)


def test_cluster_of_nothing_is_empty(offline):
    assert cluster_concepts([], 0.7, offline) == []
