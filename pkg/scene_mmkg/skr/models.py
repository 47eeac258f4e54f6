# ABOUTME: Scene knowledge retrieval types: queries, scored entities, GCN parameters, feature matrices
# ABOUTME: GCN parameters and feature matrices serialize to JSON / CSV for the CLI

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..providers.vectors import EmbeddingVector
from ..shared.exceptions import ConfigurationError, ContractError, NumericError
from ..shared.utils import atomic_file, load_json


class Activation(str, Enum):
    RELU = "relu"
    IDENTITY = "identity"

    def apply(self, values: np.ndarray) -> np.ndarray:
        if self is Activation.RELU:
            return np.maximum(values, 0.0)
        return values


@dataclass(frozen=True)
class Query:
    """Instruction text and/or an observation embedding, plus the number of anchors wanted"""

    text: Optional[str] = None
    observation: Optional[EmbeddingVector] = None
    k: int = 1

    def __post_init__(self) -> None:
        if not self.text and self.observation is None:
            raise ContractError("Query needs text or an observation")
        if int(self.k) < 1:
            raise ContractError(f"k must be >= 1, got {self.k}")


class ScoredEntity(NamedTuple):
    entity_id: str
    label: str
    score: float


@dataclass(frozen=True, eq=False)
class GcnParameters:
    """
    Weights W_0..W_{n-1} of an n-layer GCN, W_m shaped d_m x d_{m+1}

    `dims` is [d_0, ..., d_n]; d_0 must equal the embedding dimension.
    """

    dims: Tuple[int, ...]
    weights: Tuple[np.ndarray, ...] = ()
    activation: Activation = Activation.RELU

    def __post_init__(self) -> None:
        object.__setattr__(self, "activation", Activation(self.activation))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if not self.dims or any(d <= 0 for d in self.dims):
            raise ContractError(f"GCN dims must be positive, got {list(self.dims)}")
        if len(self.weights) != len(self.dims) - 1:
            raise ContractError(f"{len(self.dims)} dims need {len(self.dims) - 1} weight matrices, "
                                f"got {len(self.weights)}")
        matrices = []
        for m, weight in enumerate(self.weights):
            matrix = np.asarray(weight, dtype=np.float64)
            expected = (self.dims[m], self.dims[m + 1])
            if matrix.ndim == 1 and matrix.size == expected[0] * expected[1]:
                matrix = matrix.reshape(expected)
            if matrix.shape != expected:
                raise ContractError(f"Layer {m} weight is {matrix.shape}, expected {expected}")
            if not np.all(np.isfinite(matrix)):
                raise ContractError(f"Layer {m} weight has non-finite entries")
            matrix = matrix.copy()
            matrix.setflags(write=False)
            matrices.append(matrix)
        object.__setattr__(self, "weights", tuple(matrices))

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def input_dimension(self) -> int:
        return self.dims[0]

    @property
    def output_dimension(self) -> int:
        return self.dims[-1]

    @classmethod
    def identity(cls, dimension: int, layers: int = 1,
                 activation: Activation = Activation.IDENTITY) -> "GcnParameters":
        return cls(dims=(dimension,) * (layers + 1),
                   weights=tuple(np.eye(dimension) for _ in range(layers)), activation=activation)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "GcnParameters":
        try:
            params = cls(dims=tuple(data["dims"]), weights=tuple(data.get("weights", ())),
                         activation=data.get("activation", Activation.RELU.value))
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigurationError(f"Malformed GCN parameters: {e}")
        if "n" in data and int(data["n"]) != params.n:
            raise ConfigurationError(f"GCN parameters declare n={data['n']} but carry {params.n} layers")
        return params

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "GcnParameters":
        return cls.from_dict(load_json(path))

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "dims": list(self.dims), "activation": self.activation.value,
                "weights": [w.reshape(-1).tolist() for w in self.weights]}


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Knowledge features F_H: one row per node, nodes in canonical (sorted id) order"""

    node_ids: Tuple[str, ...]
    rows: np.ndarray
    labels: Tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[0] != len(self.node_ids):
            raise ContractError(f"Feature matrix has {rows.shape} rows for {len(self.node_ids)} nodes")
        if not np.all(np.isfinite(rows)):
            raise NumericError("Feature matrix has non-finite entries")
        object.__setattr__(self, "rows", rows)

    @property
    def shape(self) -> Tuple[int, int]:
        return tuple(self.rows.shape)

    def row(self, node_id: str) -> np.ndarray:
        return self.rows[self.node_ids.index(node_id)]

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.rows, columns=[f"f{i}" for i in range(self.rows.shape[1])])
        frame.insert(0, "node_id", list(self.node_ids))
        if self.labels:
            frame.insert(1, "label", list(self.labels))
        return frame

    def to_csv(self, path: Union[str, Path]) -> None:
        with atomic_file(path) as scratch:
            self.to_frame().to_csv(scratch, index=False, lineterminator="\n", float_format="%.17g")

    def to_dict(self) -> Dict[str, Any]:
        return {"node_ids": list(self.node_ids), "labels": list(self.labels),
                "rows": self.rows.tolist(), "shape": list(self.shape)}


def anchor_ids(anchors: Sequence[Union[str, ScoredEntity]]) -> List[str]:
    return [a.entity_id if isinstance(a, ScoredEntity) else a for a in anchors]
