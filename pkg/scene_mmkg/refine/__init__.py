"""Quality control & refinement: attribute hierarchicalization, aggregation, long-tail analysis."""

from .aggregation import AggregationResult, aggregate_attributes, rewrite_triples
from .hierarchy import hierarchicalize, subdivide
from .long_tail import attribute_cdf, attribute_frequencies
from .models import CdfSeries, HierarchicalAttributeSet, PartLexicon, QcrReport, Subdivision
from .pipeline import PART_RELATION, qcr

__all__ = [
    "AggregationResult",
    "CdfSeries",
    "HierarchicalAttributeSet",
    "PART_RELATION",
    "PartLexicon",
    "QcrReport",
    "Subdivision",
    "aggregate_attributes",
    "attribute_cdf",
    "attribute_frequencies",
    "hierarchicalize",
    "qcr",
    "rewrite_triples",
    "subdivide",
]
