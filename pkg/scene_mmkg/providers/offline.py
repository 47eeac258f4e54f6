# ABOUTME: Deterministic offline providers used by fixture mode and by tests
# ABOUTME: Canned prompt responses, trigram-hashing embedder and injected embedding tables

import hashlib
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from ..shared.exceptions import ConfigurationError, ContractError, ProviderConfigError
from ..shared.utils import load_json
from .settings import DEFAULT_DIMENSION, TRIGRAM_PAD
from .vectors import EmbeddingVector


def trigram_embedding(text: str, dimension: int = DEFAULT_DIMENSION) -> EmbeddingVector:
    """
    Character-trigram feature hashing into `dimension` buckets, L2-normalized

    The text is padded with one space on each side so word boundaries form trigrams.
    All components are >= 0, so cosine between two such vectors lies in [0, 1].
    """
    if not text:
        raise ContractError("embed requires non-empty text")
    padded = f"{TRIGRAM_PAD}{text}{TRIGRAM_PAD}"
    counts = np.zeros(dimension, dtype=np.float64)
    for i in range(len(padded) - 2):
        digest = hashlib.blake2b(padded[i:i + 3].encode("utf-8"), digest_size=8).digest()
        counts[int.from_bytes(digest, "big") % dimension] += 1.0
    return EmbeddingVector.from_values(counts, normalize=True)


class OfflineEmbedder:
    """Embedding-only provider backed by trigram hashing"""

    def __init__(self, dimension: int = DEFAULT_DIMENSION):
        self.dimension = dimension

    def embed(self, text: str) -> EmbeddingVector:
        return trigram_embedding(text, self.dimension)


class StaticEmbeddingProvider:
    """
    Embedding provider with injected vectors

    Texts in `vectors` get their injected vector; anything else falls back to
    `fallback` (an embedder) or raises ProviderConfigError.
    """

    def __init__(self, vectors: Mapping[str, Union[Sequence[float], EmbeddingVector]],
                 fallback: Optional[OfflineEmbedder] = None, normalize: bool = False):
        self._vectors: Dict[str, EmbeddingVector] = {}
        for text, value in vectors.items():
            if isinstance(value, EmbeddingVector):
                self._vectors[text] = value
            else:
                self._vectors[text] = EmbeddingVector.from_values(value, normalize=normalize)
        dimensions = {v.dimension for v in self._vectors.values()}
        if len(dimensions) > 1:
            raise ConfigurationError(f"Injected embeddings mix dimensions: {sorted(dimensions)}")
        self.dimension = dimensions.pop() if dimensions else (
            fallback.dimension if fallback else DEFAULT_DIMENSION)
        if fallback is not None and fallback.dimension != self.dimension:
            raise ConfigurationError("Fallback embedder dimension differs from injected vectors")
        self._fallback = fallback

    @classmethod
    def from_file(cls, path: Union[str, Path], fallback: Optional[OfflineEmbedder] = None) -> "StaticEmbeddingProvider":
        data = load_json(path)
        if not isinstance(data, dict):
            raise ConfigurationError(f"Embedding fixture must map text to vectors: {path}")
        return cls(data, fallback=fallback)

    def embed(self, text: str) -> EmbeddingVector:
        if not text:
            raise ContractError("embed requires non-empty text")
        vector = self._vectors.get(text)
        if vector is not None:
            return vector
        if self._fallback is None:
            raise ProviderConfigError(f"No injected embedding for key: {text!r}")
        return self._fallback.embed(text)


class FixtureProvider:
    """Fixture mode: prompts answered from a JSON map, embeddings computed offline"""

    def __init__(self, responses: Mapping[str, Sequence[str]], embedder=None):
        self._responses = {key: tuple(value) for key, value in responses.items()}
        self._embedder = embedder or OfflineEmbedder()
        self.dimension = self._embedder.dimension

    @classmethod
    def from_file(cls, path: Union[str, Path], embedder=None) -> "FixtureProvider":
        data = load_json(path)
        if not isinstance(data, dict) or not all(isinstance(v, list) for v in data.values()):
            raise ConfigurationError(f"Fixture file must map prompt keys to lists: {path}")
        return cls(data, embedder=embedder)

    def complete(self, prompt: str, key: Optional[str] = None) -> List[str]:
        if not prompt:
            raise ContractError("complete_prompt requires a non-empty prompt")
        lookup = key if key is not None else prompt
        if lookup in self._responses:
            return list(self._responses[lookup])
        if key is not None and prompt in self._responses:
            return list(self._responses[prompt])
        raise ProviderConfigError(f"Fixture has no response for prompt key: {lookup!r}")

    def embed(self, text: str) -> EmbeddingVector:
        return self._embedder.embed(text)
