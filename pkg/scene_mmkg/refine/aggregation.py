# ABOUTME: Semantic aggregation of attribute keys by embedding similarity into canonical keys + aliases
# ABOUTME: Shares the fixpoint merge used by concept clustering

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Tuple

from ..kgcore.models import Triple
from ..providers import resolve_provider
from ..shared.similarity import fixpoint_merge

logger = logging.getLogger(__name__)

DEFAULT_GAMMA2 = 0.7


@dataclass(frozen=True)
class AggregationResult:
    canonical: Tuple[str, ...] = ()
    alias_map: Mapping[str, str] = field(default_factory=dict)
    merges: int = 0

    def resolve(self, key: str) -> str:
        return self.alias_map.get(key, key)


def aggregate_attributes(keys: Iterable[str], gamma2: float = DEFAULT_GAMMA2, provider=None) -> AggregationResult:
    """
    Merge attribute keys whose name embeddings reach cosine >= gamma2

    Args:
        keys: Attribute names
        gamma2: Similarity threshold in [0, 1]
        provider: ProviderConfig or embedding provider handle

    Returns:
        Canonical keys and the alias -> canonical map
    """
    names = sorted(set(keys))
    embedder = resolve_provider(provider) if names else None
    result = fixpoint_merge(names, embedder.embed if embedder else None, gamma2)
    alias_map = {alias: canonical for canonical in result.canonical_labels
                 for alias in result.aliases(canonical)}
    logger.info(f"Aggregated {len(names)} attribute keys into {len(result.members)} "
                f"({len(alias_map)} aliases, gamma2={gamma2})")
    return AggregationResult(canonical=tuple(result.canonical_labels),
                             alias_map=dict(sorted(alias_map.items())), merges=result.merges)


def rewrite_triples(triples: Iterable[Triple], alias_map: Mapping[str, str]) -> List[Triple]:
    """Point attribute triples at canonical keys, merging triples that become identical"""
    rewritten: Dict[str, Triple] = {}
    for triple in triples:
        if triple.is_attribute and triple.relation in alias_map:
            triple = triple.with_relation(alias_map[triple.relation])
        existing = rewritten.get(triple.id)
        rewritten[triple.id] = existing.merged_with(triple) if existing else triple
    return [rewritten[k] for k in sorted(rewritten)]
