"""Long-tail analysis of attribute usage."""

from collections import Counter
from typing import Mapping, Union

from ..kgcore.graph import SceneMMKG
from .models import CdfSeries


def attribute_frequencies(graph: SceneMMKG) -> Counter:
    """Number of literal-tailed triples per attribute key"""
    return Counter(t.relation for t in graph.literal_triples())


def attribute_cdf(source: Union[SceneMMKG, Mapping[str, int]]) -> CdfSeries:
    """
    CDF of attribute usage, most used attribute first (ties by name)

    Args:
        source: A graph, or a precomputed attribute -> frequency mapping

    Returns:
        CdfSeries; empty when there are no attributes
    """
    frequencies = attribute_frequencies(source) if isinstance(source, SceneMMKG) else Counter(source)
    ranked = sorted(((name, count) for name, count in frequencies.items() if count > 0),
                    key=lambda item: (-item[1], item[0]))
    return CdfSeries(attributes=tuple(name for name, _ in ranked),
                     frequencies=tuple(int(count) for _, count in ranked))
