"""HTTP provider helpers"""
from typing import Any, Dict, List, Optional
from urllib.parse import urljoin

from dlt.sources.helpers.requests import Client
from requests.exceptions import RequestException

from ..shared.exceptions import ContractError, ProviderTransportError
from .config import ProviderConfig
from .settings import REQUEST_BACKOFF_FACTOR, REQUEST_MAX_RETRY_DELAY
from .vectors import EmbeddingVector


class HttpProviderApi:
    """
    A client for a completion/embedding endpoint speaking the scene_mmkg wire format.

    Completions: POST {"prompt": text} -> {"candidates": [text, ...]}
    Embeddings:  POST {"input": text}  -> {"embedding": [real, ...]}
    """

    def __init__(self, config: ProviderConfig) -> None:
        """
        Args:
            config: An http-mode provider config; endpoint, timeout and retries are taken from it.
        """
        self.config = config
        self.dimension = config.dimension
        self._client = Client(
            request_timeout=config.timeout_seconds,
            request_max_attempts=config.max_retries + 1,
            request_backoff_factor=REQUEST_BACKOFF_FACTOR,
            request_max_retry_delay=REQUEST_MAX_RETRY_DELAY,
            raise_for_status=True,
        )

    def _post(self, path: str, payload: Dict[str, Any]) -> Dict[str, Any]:
        url = urljoin(self.config.endpoint.rstrip("/") + "/", path)
        try:
            response = self._client.session.post(url, json=payload, timeout=self.config.timeout_seconds)
            response.raise_for_status()
            data = response.json()
        except (RequestException, ValueError) as e:
            raise ProviderTransportError(f"Provider endpoint {url} failed: {e}")
        if not isinstance(data, dict):
            raise ProviderTransportError(f"Provider endpoint {url} returned a non-object body")
        return data

    def complete(self, prompt: str, key: Optional[str] = None) -> List[str]:
        """Return the endpoint's candidates in endpoint order; `key` is unused over http"""
        if not prompt:
            raise ContractError("complete_prompt requires a non-empty prompt")
        data = self._post("complete", {"prompt": prompt})
        candidates = data.get("candidates")
        if not isinstance(candidates, list):
            raise ProviderTransportError("Completion response lacks a 'candidates' list")
        return [str(c) for c in candidates]

    def embed(self, text: str) -> EmbeddingVector:
        if not text:
            raise ContractError("embed requires non-empty text")
        data = self._post("embed", {"input": text})
        values = data.get("embedding")
        if not isinstance(values, list):
            raise ProviderTransportError("Embedding response lacks an 'embedding' list")
        if len(values) != self.dimension:
            raise ContractError(f"Endpoint returned dimension {len(values)}, expected {self.dimension}")
        return EmbeddingVector.from_values(values, normalize=True)
