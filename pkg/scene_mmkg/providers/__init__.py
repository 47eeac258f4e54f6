"""Pluggable access to an LLM completion endpoint and an embedding endpoint.

Every other stage talks to models only through the two protocols below, so each
one runs offline against fixture providers.
"""

from functools import lru_cache
from typing import List, Optional, Protocol, runtime_checkable

from ..shared.exceptions import ContractError
from .config import ProviderConfig, ProviderMode
from .helpers import HttpProviderApi
from .offline import FixtureProvider, OfflineEmbedder, StaticEmbeddingProvider, trigram_embedding
from .vectors import EmbeddingVector, cosine, cosine_matrix, rounded


@runtime_checkable
class CompletionProvider(Protocol):
    def complete(self, prompt: str, key: Optional[str] = None) -> List[str]:
        """Ordered candidate outputs for a prompt"""
        ...


@runtime_checkable
class EmbeddingProvider(Protocol):
    dimension: int

    def embed(self, text: str) -> EmbeddingVector:
        ...


@lru_cache(maxsize=32)
def build_provider(cfg: ProviderConfig):
    """Build (and cache) the provider handle for a config; handles are immutable and shareable"""
    if cfg.mode is ProviderMode.HTTP:
        return HttpProviderApi(cfg)

    embedder = OfflineEmbedder(cfg.dimension)
    if cfg.embeddings_path:
        embedder = StaticEmbeddingProvider.from_file(cfg.embeddings_path, fallback=embedder)
    return FixtureProvider.from_file(cfg.fixture_path, embedder=embedder)


def resolve_provider(provider):
    """Accept either a ProviderConfig or an already-built provider handle"""
    if isinstance(provider, ProviderConfig):
        return build_provider(provider)
    return provider


def complete_prompt(prompt: str, cfg: ProviderConfig, key: Optional[str] = None) -> List[str]:
    """
    Ordered candidate outputs for `prompt`

    Fixture mode answers from the fixture map (looked up by `key` when given, else by
    the prompt text); http mode returns the endpoint's decoded candidates.
    """
    if not prompt:
        raise ContractError("complete_prompt requires a non-empty prompt")
    return build_provider(cfg).complete(prompt, key=key)


def embed(text: str, cfg: ProviderConfig) -> EmbeddingVector:
    if not text:
        raise ContractError("embed requires non-empty text")
    return build_provider(cfg).embed(text)


__all__ = [
    "CompletionProvider",
    "EmbeddingProvider",
    "EmbeddingVector",
    "FixtureProvider",
    "HttpProviderApi",
    "OfflineEmbedder",
    "ProviderConfig",
    "ProviderMode",
    "StaticEmbeddingProvider",
    "build_provider",
    "complete_prompt",
    "cosine",
    "cosine_matrix",
    "embed",
    "resolve_provider",
    "rounded",
    "trigram_embedding",
]
