"""Provider configuration: which backend answers prompts and embeddings."""

import os
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, Optional

from ..shared.exceptions import ConfigurationError
from .settings import DEFAULT_DIMENSION, DEFAULT_MAX_RETRIES, DEFAULT_TIMEOUT_MS, PROVIDER_ENV_VAR


class ProviderMode(str, Enum):
    FIXTURE = "fixture"
    HTTP = "http"


@dataclass(frozen=True)
class ProviderConfig:
    """
    Args:
        mode: fixture (canned responses, offline embedder) or http
        endpoint: Base URI of the remote service (http mode)
        timeout_ms: Per-request timeout in milliseconds
        fixture_path: JSON map prompt-key -> candidates (fixture mode)
        max_retries: Retries after the first failed attempt (http mode)
        dimension: Embedding dimension d for the whole graph build
        embeddings_path: Optional JSON map text -> vector overriding the offline embedder
    """

    mode: ProviderMode = ProviderMode.FIXTURE
    endpoint: Optional[str] = None
    timeout_ms: int = DEFAULT_TIMEOUT_MS
    fixture_path: Optional[str] = None
    max_retries: int = DEFAULT_MAX_RETRIES
    dimension: int = DEFAULT_DIMENSION
    embeddings_path: Optional[str] = None

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "mode", ProviderMode(self.mode))
        except ValueError:
            raise ConfigurationError(f"Unknown provider mode: {self.mode!r}")
        if self.timeout_ms <= 0:
            raise ConfigurationError(f"timeout_ms must be > 0, got {self.timeout_ms}")
        if self.max_retries < 0:
            raise ConfigurationError(f"max_retries must be >= 0, got {self.max_retries}")
        if self.dimension <= 0:
            raise ConfigurationError(f"dimension must be > 0, got {self.dimension}")
        if self.mode is ProviderMode.HTTP and not self.endpoint:
            raise ConfigurationError("http provider mode requires 'endpoint'")
        if self.mode is ProviderMode.FIXTURE and not self.fixture_path:
            raise ConfigurationError("fixture provider mode requires 'fixture_path'")

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any], base_dir: Optional[Path] = None) -> "ProviderConfig":
        """Build from a config-file section; relative paths resolve against base_dir"""
        known = {"mode", "endpoint", "timeout_ms", "fixture_path", "max_retries",
                 "dimension", "embeddings_path"}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"Unknown provider fields: {', '.join(sorted(unknown))}")

        values = dict(data)
        for key in ("fixture_path", "embeddings_path"):
            if values.get(key) and base_dir is not None:
                values[key] = str((base_dir / values[key]).resolve())
        for key in ("timeout_ms", "max_retries", "dimension"):
            if key in values:
                values[key] = int(values[key])
        return cls(**values)

    def with_environment(self) -> "ProviderConfig":
        """Apply the SCENE_MMKG_PROVIDER mode override, if set"""
        override = os.environ.get(PROVIDER_ENV_VAR)
        if not override or override == self.mode.value:
            return self
        return replace(self, mode=override)

    @property
    def timeout_seconds(self) -> float:
        return self.timeout_ms / 1000.0
