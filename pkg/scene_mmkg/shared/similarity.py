# ABOUTME: Threshold merging of labels by embedding cosine, as connected components
# ABOUTME: One implementation backs both concept clustering and attribute aggregation

import logging
from dataclasses import dataclass, field
from functools import reduce
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import networkx as nx
import numpy as np

from ..providers.vectors import EmbeddingVector, cosine_matrix
from .exceptions import ContractError

logger = logging.getLogger(__name__)

Preference = Callable[[str, str], str]


def lexicographic_preference(a: str, b: str) -> str:
    return min(a, b)


def check_threshold(name: str, threshold: float, low: float = 0.0, high: float = 1.0) -> float:
    """Validate a similarity threshold against its closed range"""
    try:
        value = float(threshold)
    except (TypeError, ValueError):
        raise ContractError(f"{name} must be a number, got {threshold!r}")
    if not np.isfinite(value) or value < low or value > high:
        raise ContractError(f"{name} must lie in [{low}, {high}], got {threshold}")
    return value


@dataclass
class MergeResult:
    """
    Outcome of a fixpoint merge

    Attributes:
        members: canonical label -> sorted member labels (canonical included)
        merges: number of labels absorbed into another
        passes: number of similarity matrices scored
    """

    members: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    merges: int = 0
    passes: int = 0

    @property
    def canonical_labels(self) -> List[str]:
        return sorted(self.members)

    def canonical_of(self) -> Dict[str, str]:
        """Every input label mapped to its canonical label"""
        return {m: c for c, group in self.members.items() for m in group}

    def aliases(self, canonical: str) -> Tuple[str, ...]:
        return tuple(m for m in self.members[canonical] if m != canonical)


def fixpoint_merge(labels: Iterable[str], embed: Callable[[str], EmbeddingVector],
                   threshold: float, prefer: Optional[Preference] = None) -> MergeResult:
    """
    Merge labels until no two canonical labels reach `threshold` cosine

    Labels are linked when their rounded cosine reaches `threshold`; each
    connected component of that graph becomes one cluster. `prefer(a, b)` folds
    over the sorted members of a cluster to name its canonical label.

    Args:
        labels: Labels to merge; duplicates are ignored
        embed: Label -> embedding, called once per distinct label
        threshold: Merge when rounded cosine >= threshold, in [0, 1]
        prefer: Picks the canonical label of a merged pair

    Returns:
        MergeResult with the final partition
    """
    threshold = check_threshold("threshold", threshold)
    prefer = prefer or lexicographic_preference

    active = sorted(set(labels))
    graph = nx.Graph()
    graph.add_nodes_from(active)
    result = MergeResult()
    if active:
        sims = cosine_matrix([embed(label) for label in active])
        rows, cols = np.nonzero(np.triu(sims >= threshold, k=1))
        graph.add_edges_from((active[i], active[j]) for i, j in zip(rows, cols))
        result.passes = 1

    for component in nx.connected_components(graph):
        group = tuple(sorted(component))
        canonical = reduce(prefer, group)
        result.members[canonical] = group
        result.merges += len(group) - 1
        for member in group:
            if member != canonical:
                logger.debug(f"Merged '{member}' into '{canonical}'")

    result.members = dict(sorted(result.members.items()))
    return result
