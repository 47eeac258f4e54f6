"""Embedding vectors and the cosine similarity every pipeline stage shares."""

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..shared.exceptions import ContractError
from .settings import NORM_TOLERANCE, SIMILARITY_DECIMALS


@dataclass(frozen=True, eq=False)
class EmbeddingVector:
    """A real vector of fixed dimension; `normalized` means unit L2 norm."""

    values: np.ndarray
    normalized: bool = False

    def __post_init__(self) -> None:
        array = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(array)):
            raise ContractError("Embedding contains non-finite values")
        array = array.copy()
        array.setflags(write=False)
        object.__setattr__(self, "values", array)
        if self.normalized:
            norm = float(np.linalg.norm(array))
            if abs(norm - 1.0) > NORM_TOLERANCE:
                raise ContractError(f"Vector flagged normalized has norm {norm}")

    @classmethod
    def from_values(cls, values: Iterable[float], normalize: bool = True) -> "EmbeddingVector":
        """Build a vector, L2-normalizing it when requested and the norm is nonzero"""
        array = np.asarray(list(values) if not isinstance(values, np.ndarray) else values,
                           dtype=np.float64).reshape(-1)
        if normalize:
            norm = float(np.linalg.norm(array))
            if norm > 0:
                return cls(array / norm, normalized=True)
        return cls(array, normalized=False)

    @property
    def dimension(self) -> int:
        return int(self.values.shape[0])

    def to_list(self) -> list:
        return [float(v) for v in self.values]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmbeddingVector):
            return NotImplemented
        return self.normalized == other.normalized and np.array_equal(self.values, other.values)

    def __hash__(self) -> int:
        return hash((self.normalized, self.values.tobytes()))


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """
    Cosine similarity dot(a,b)/(|a||b|), 0 when either norm is 0

    Raises:
        ContractError: on dimension mismatch
    """
    if a.dimension != b.dimension:
        raise ContractError(f"Dimension mismatch: {a.dimension} vs {b.dimension}")
    norm_a = float(np.linalg.norm(a.values))
    norm_b = float(np.linalg.norm(b.values))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    value = float(np.dot(a.values, b.values)) / (norm_a * norm_b)
    return min(1.0, max(-1.0, value))


def cosine_matrix(vectors: Sequence[EmbeddingVector]) -> np.ndarray:
    """Pairwise cosine matrix, rounded to SIMILARITY_DECIMALS; zero-norm rows score 0"""
    if not vectors:
        return np.zeros((0, 0))
    dimensions = {v.dimension for v in vectors}
    if len(dimensions) != 1:
        raise ContractError(f"Mixed embedding dimensions: {sorted(dimensions)}")
    matrix = np.vstack([v.values for v in vectors])
    norms = np.linalg.norm(matrix, axis=1)
    safe = np.where(norms == 0.0, 1.0, norms)
    unit = matrix / safe[:, None]
    unit[norms == 0.0] = 0.0
    sims = np.clip(unit @ unit.T, -1.0, 1.0)
    return np.round(sims, SIMILARITY_DECIMALS)


def rounded(score: float) -> float:
    return round(score, SIMILARITY_DECIMALS)
