# ABOUTME: Quality control & refinement of a frozen graph: hierarchicalize attributes, then aggregate keys
# ABOUTME: Produces a new frozen graph and a before/after report; the input graph is never modified

import logging
from collections import defaultdict
from typing import Dict, List, Set, Tuple

from ..kgcore.graph import SceneMMKG
from ..kgcore.models import AttributeKey, AttributeLevel, Entity, TailKind, Triple, attribute_key_id
from ..shared.exceptions import ContractError
from .aggregation import DEFAULT_GAMMA2, aggregate_attributes, rewrite_triples
from .hierarchy import hierarchicalize, subdivide
from .long_tail import attribute_cdf
from .models import PartLexicon, QcrReport

logger = logging.getLogger(__name__)

PART_RELATION = "has_part"


def part_label(entity: Entity, part: str) -> str:
    return f"{entity.label} {part}"


def _hierarchicalize_graph(graph: SceneMMKG, lexicon: PartLexicon) -> Tuple[SceneMMKG, Dict[str, AttributeLevel], int, int]:
    """Rebuild `graph` with composite attribute triples split into part links and part attributes"""
    work = SceneMMKG(graph.schema)
    work.build_log = [dict(e) for e in graph.build_log]
    for entity in graph.entities():
        work.add_entity(entity)
    for asset in graph.assets():
        work.add_asset(asset)

    by_entity: Dict[str, List[Triple]] = defaultdict(list)
    for triple in graph.triples():
        if triple.is_attribute:
            by_entity[triple.head].append(triple)
        else:
            work.add_triple(triple)

    levels: Dict[str, AttributeLevel] = {}
    part_triples: List[Triple] = []
    subdivided = 0
    linked: Set[str] = set()

    for entity_id in sorted(by_entity):
        entity = graph.get_entity(entity_id)
        triples = by_entity[entity_id]
        hierarchy = hierarchicalize(entity.label, (t.relation for t in triples), lexicon)
        direct = set(hierarchy.direct)
        for triple in triples:
            if triple.relation in direct:
                work.add_triple(triple)
                levels[triple.relation] = AttributeLevel.ENTITY_LEVEL
                continue

            split = subdivide(triple.relation, lexicon)
            subdivided += 1
            for part in split.parts:
                part_entity = Entity.create(part_label(entity, part), entity.concept_id)
                work.add_entity(part_entity)
                linked.add(part_entity.id)
                work.add_triple(Triple.create(entity.id, PART_RELATION, part_entity.id, TailKind.ENTITY,
                                              triple.source, triple.provenance))
                for general in split.general:
                    part_triples.append(Triple.create(part_entity.id, general, triple.tail, TailKind.LITERAL,
                                                      triple.source, triple.provenance))

    for triple in part_triples:
        levels.setdefault(triple.relation, AttributeLevel.PART_LEVEL)
        work.add_triple(triple)
    return work, levels, subdivided, len(linked)


def qcr(graph: SceneMMKG, lexicon: PartLexicon, gamma2: float = DEFAULT_GAMMA2,
        provider=None) -> Tuple[SceneMMKG, QcrReport]:
    """
    Quality control & refinement

    Hierarchicalizes every entity's attribute triples, aggregates the resulting
    attribute keys at `gamma2`, rewrites triples to canonical keys and dedupes.

    Args:
        graph: Frozen input graph, left untouched
        lexicon: Part lexicon driving subdivision
        gamma2: Attribute aggregation threshold in [0, 1]
        provider: ProviderConfig or embedding provider handle

    Returns:
        (refined frozen graph, report)
    """
    if not graph.frozen:
        raise ContractError("qcr needs a frozen input graph")

    cdf_before = attribute_cdf(graph)
    work, levels, subdivided, parts_linked = _hierarchicalize_graph(graph, lexicon)
    hierarchical_keys = sorted({t.relation for t in work.literal_triples()})

    aggregation = aggregate_attributes(hierarchical_keys, gamma2, provider)
    canonical_of = {key: aggregation.resolve(key) for key in hierarchical_keys}

    refined = SceneMMKG(graph.schema)
    refined.build_log = work.build_log
    for entity in work.entities():
        refined.add_entity(entity)
    for asset in work.assets():
        refined.add_asset(asset)

    # a canonical key is entity-level if any of its members is
    canonical_levels: Dict[str, AttributeLevel] = {}
    for key in hierarchical_keys:
        target = canonical_of[key]
        if canonical_levels.get(target) is not AttributeLevel.ENTITY_LEVEL:
            canonical_levels[target] = levels.get(key, AttributeLevel.ENTITY_LEVEL)
    for name in sorted(canonical_levels):
        refined.add_attribute_key(AttributeKey.create(name, canonical_levels[name]))
    for alias in sorted(aggregation.alias_map):
        target = aggregation.alias_map[alias]
        refined.add_attribute_key(AttributeKey.create(alias, canonical_levels[target],
                                                      alias_of=attribute_key_id(target)))

    # aliases from earlier refinements follow their canonical key if it still exists
    input_keys = {k.id: k for k in graph.attribute_keys()}
    for key in input_keys.values():
        if key.canonical or refined.get_attribute_key(key.name) is not None:
            continue
        previous = input_keys.get(key.alias_of)
        target = canonical_of.get(previous.name) if previous else None
        if target is not None:
            refined.add_attribute_key(AttributeKey.create(key.name, canonical_levels[target],
                                                          alias_of=attribute_key_id(target)))

    refined.extend(rewrite_triples(work.triples(), aggregation.alias_map))
    cdf_after = attribute_cdf(refined)

    report = QcrReport(
        edges_before=len(graph),
        edges_after=len(refined),
        distinct_attrs_before=len(cdf_before),
        distinct_attrs_hierarchical=len(hierarchical_keys),
        distinct_attrs_after=len(cdf_after),
        composites_subdivided=subdivided,
        parts_linked=parts_linked,
        gamma2=gamma2,
        alias_map=aggregation.alias_map,
        cdf_before=cdf_before,
        cdf_after=cdf_after,
    )
    refined.record_stage("qcr", gamma2=gamma2, edges_before=report.edges_before,
                         edges_after=report.edges_after,
                         distinct_attrs_before=report.distinct_attrs_before,
                         distinct_attrs_after=report.distinct_attrs_after)
    logger.info(f"QC&R: edges {report.edges_before} -> {report.edges_after}, attributes "
                f"{report.distinct_attrs_before} -> {report.distinct_attrs_hierarchical} -> "
                f"{report.distinct_attrs_after}")
    return refined.freeze(), report
