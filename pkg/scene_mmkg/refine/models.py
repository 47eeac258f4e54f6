# ABOUTME: Refinement types: part lexicon, attribute subdivisions, hierarchical attribute sets
# ABOUTME: Plus the attribute CDF series and the quality control & refinement report

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, FrozenSet, List, Mapping, Tuple, Union

import numpy as np
import pandas as pd

from ..shared.exceptions import ConfigurationError
from ..shared.utils import atomic_file, load_json, normalize_label

# tolerance for comparing cumulative fractions computed over different totals
CDF_TOLERANCE = 1e-12


@dataclass(frozen=True)
class PartLexicon:
    """Part labels and general attribute labels that composite attributes are built from"""

    parts: FrozenSet[str]
    general_attributes: FrozenSet[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "parts", frozenset(self.parts))
        object.__setattr__(self, "general_attributes", frozenset(self.general_attributes))
        overlap = self.parts & self.general_attributes
        if overlap:
            raise ConfigurationError(f"Part lexicon labels are both parts and attributes: {sorted(overlap)}")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PartLexicon":
        def labels(section: str) -> FrozenSet[str]:
            values = data.get(section, [])
            if not isinstance(values, list):
                raise ConfigurationError(f"Part lexicon section '{section}' must be a list")
            return frozenset(filter(None, (normalize_label(v) for v in values)))

        return cls(parts=labels("parts"), general_attributes=labels("general_attributes"))

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "PartLexicon":
        return cls.from_dict(load_json(path))


@dataclass(frozen=True)
class Subdivision:
    """A composite attribute split into parts P and general attributes AP"""

    attribute: str
    parts: Tuple[str, ...]
    general: Tuple[str, ...]


@dataclass(frozen=True)
class HierarchicalAttributeSet:
    """
    A_hiera for one entity

    Attributes:
        entity: The entity the attributes describe
        direct: Attributes kept directly on the entity
        parts: Parts linked to the entity
        part_attributes: (part, general attribute) links
        origin: Output element -> input attributes it came from. Elements are
            named "direct:<a>", "part:<p>" and "part_attribute:<p>/<a>".
    """

    entity: str
    direct: Tuple[str, ...] = ()
    parts: Tuple[str, ...] = ()
    part_attributes: Tuple[Tuple[str, str], ...] = ()
    origin: Mapping[str, Tuple[str, ...]] = field(default_factory=dict)

    def is_empty(self) -> bool:
        return not self.direct and not self.parts

    def covered_inputs(self) -> FrozenSet[str]:
        return frozenset(a for sources in self.origin.values() for a in sources)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "entity": self.entity,
            "direct": list(self.direct),
            "parts": list(self.parts),
            "part_attributes": [list(pair) for pair in self.part_attributes],
            "origin": {k: list(v) for k, v in sorted(self.origin.items())},
        }


@dataclass(frozen=True)
class CdfSeries:
    """
    Cumulative usage fraction of attributes ranked by descending frequency

    `points` holds (rank, cumulative_fraction), rank starting at 1.
    """

    attributes: Tuple[str, ...] = ()
    frequencies: Tuple[int, ...] = ()

    @property
    def fractions(self) -> np.ndarray:
        counts = np.asarray(self.frequencies, dtype=np.int64)
        if counts.size == 0:
            return np.zeros(0)
        return np.cumsum(counts) / counts.sum()

    @property
    def points(self) -> List[Tuple[int, float]]:
        return [(rank, float(f)) for rank, f in enumerate(self.fractions, start=1)]

    def __len__(self) -> int:
        return len(self.frequencies)

    def at(self, rank: int) -> float:
        """Cumulative fraction at `rank`; 1.0 past the last rank, 0.0 before the first"""
        if rank <= 0 or not self.frequencies:
            return 0.0
        if rank >= len(self.frequencies):
            return 1.0
        return float(self.fractions[rank - 1])

    def dominates(self, other: "CdfSeries") -> bool:
        """Pointwise >= at every rank both series share"""
        shared = min(len(self), len(other))
        if shared == 0:
            return True
        return bool(np.all(self.fractions[:shared] >= other.fractions[:shared] - CDF_TOLERANCE))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "rank": np.arange(1, len(self) + 1),
            "attribute": list(self.attributes),
            "frequency": list(self.frequencies),
            "cumulative_fraction": self.fractions,
        })

    def to_csv(self, path: Union[str, Path]) -> None:
        with atomic_file(path) as scratch:
            self.to_frame().to_csv(scratch, index=False, lineterminator="\n")

    def to_dict(self) -> Dict[str, Any]:
        return {"points": [[rank, fraction] for rank, fraction in self.points],
                "attributes": list(self.attributes), "frequencies": list(self.frequencies)}


@dataclass(frozen=True)
class QcrReport:
    edges_before: int
    edges_after: int
    distinct_attrs_before: int
    distinct_attrs_hierarchical: int
    distinct_attrs_after: int
    composites_subdivided: int
    parts_linked: int
    gamma2: float
    alias_map: Mapping[str, str] = field(default_factory=dict)
    cdf_before: CdfSeries = field(default_factory=CdfSeries)
    cdf_after: CdfSeries = field(default_factory=CdfSeries)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "edges_before": self.edges_before,
            "edges_after": self.edges_after,
            "distinct_attrs_before": self.distinct_attrs_before,
            "distinct_attrs_hierarchical": self.distinct_attrs_hierarchical,
            "distinct_attrs_after": self.distinct_attrs_after,
            "composites_subdivided": self.composites_subdivided,
            "parts_linked": self.parts_linked,
            "thresholds": {"gamma2": self.gamma2},
            "alias_map": dict(sorted(self.alias_map.items())),
            "cdf_before": self.cdf_before.to_dict(),
            "cdf_after": self.cdf_after.to_dict(),
        }
