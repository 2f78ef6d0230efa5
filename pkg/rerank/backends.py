"""
Chat backends: an OpenAI-compatible HTTP client and a ground-truth oracle.

Both expose ``complete(request) -> ChatResponse`` and may be shared across
threads.
"""
import functools
import logging
import os
import re
import threading
from dataclasses import dataclass
from typing import Mapping, Optional

import backoff
import requests
from django.conf import settings

from retrieval.types import Qrels

from .chat import ChatRequest, ChatResponse, estimate_tokens
from .exceptions import (
    EndpointError,
    MissingCredentialsError,
    ProtocolError,
    RetriesExhaustedError,
    RetryableEndpointError,
    UnrecognizedPromptError,
)
from .prompts import LISTWISE_INSTRUCTION, PAIRWISE_INSTRUCTION, POINTWISE_INSTRUCTION

logger = logging.getLogger(__name__)

COMPLETIONS_PATH = '/v1/chat/completions'
BODY_EXCERPT_CHARS = 200


@dataclass(frozen=True)
class BackendConfig:
    base_url: str
    api_key_env: str = 'GENRANK_API_KEY'
    timeout_ms: int = 60000
    max_retries: int = 3
    retry_base_ms: int = 500
    max_in_flight: int = 4

    def __post_init__(self):
        if self.timeout_ms <= 0:
            raise ValueError(f"timeout_ms must be > 0, got {self.timeout_ms}")
        if self.max_retries < 0:
            raise ValueError(f"max_retries must be >= 0, got {self.max_retries}")
        if self.retry_base_ms <= 0:
            raise ValueError(f"retry_base_ms must be > 0, got {self.retry_base_ms}")
        if self.max_in_flight < 1:
            raise ValueError(f"max_in_flight must be >= 1, got {self.max_in_flight}")

    @classmethod
    def from_settings(cls, **overrides) -> 'BackendConfig':
        defaults = settings.GENRANK
        values = {
            'base_url': defaults['BASE_URL'],
            'api_key_env': defaults['API_KEY_ENV'],
            'timeout_ms': defaults['TIMEOUT_MS'],
            'max_retries': defaults['MAX_RETRIES'],
            'retry_base_ms': defaults['RETRY_BASE_MS'],
            'max_in_flight': defaults['MAX_IN_FLIGHT'],
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)

    @property
    def url(self) -> str:
        return self.base_url.rstrip('/') + COMPLETIONS_PATH


class ChatBackend:
    name = 'backend'
    max_in_flight = 1

    def complete(self, request: ChatRequest) -> ChatResponse:
        raise NotImplementedError


class HTTPChatBackend(ChatBackend):
    name = 'http'

    def __init__(self, config: BackendConfig):
        self.config = config
        self.max_in_flight = config.max_in_flight
        if config.api_key_env not in os.environ:
            raise MissingCredentialsError(
                f"environment variable {config.api_key_env} is not set "
                "(set it to an empty string for unauthenticated servers)"
            )
        self._api_key = os.environ[config.api_key_env]
        self._slots = threading.BoundedSemaphore(config.max_in_flight)

    def _headers(self):
        headers = {'Content-Type': 'application/json'}
        if self._api_key:
            headers['Authorization'] = f'Bearer {self._api_key}'
        return headers

    def complete(self, request: ChatRequest) -> ChatResponse:
        body = request.serialize()
        attempts = 0

        def attempt():
            nonlocal attempts
            with self._slots:
                attempts += 1
                return self._post(body)

        retrying = backoff.on_exception(
            backoff.expo,
            RetryableEndpointError,
            max_tries=self.config.max_retries + 1,
            jitter=backoff.full_jitter,
            on_backoff=self._log_backoff,
            logger=None,
            factor=self.config.retry_base_ms / 1000.0,
        )(attempt)

        # slots are held per attempt, never across a backoff sleep
        try:
            return retrying()
        except RetryableEndpointError as exc:
            raise RetriesExhaustedError(attempts, exc) from exc

    def _log_backoff(self, details):
        logger.warning(
            "retrying chat completion url=%s attempt=%d wait=%.3fs error=%s",
            self.config.url, details['tries'], details['wait'], details.get('exception'),
        )

    def _post(self, body: bytes) -> ChatResponse:
        try:
            response = requests.post(
                self.config.url,
                data=body,
                headers=self._headers(),
                timeout=self.config.timeout_ms / 1000.0,
            )
        except requests.Timeout as exc:
            raise RetryableEndpointError(f"timed out: {exc}") from exc
        except requests.ConnectionError as exc:
            raise RetryableEndpointError(f"connection failed: {exc}") from exc
        except requests.RequestException as exc:
            raise RetryableEndpointError(f"transport error: {exc}") from exc

        status = response.status_code
        if status == 429 or status >= 500:
            raise RetryableEndpointError(f"HTTP {status}", status=status)
        if status >= 400:
            raise EndpointError(status, response.text[:BODY_EXCERPT_CHARS])

        try:
            result = response.json()
            content = result['choices'][0]['message']['content']
            usage = result.get('usage') or {}
            if not isinstance(content, str):
                raise TypeError(f"message content is {type(content).__name__}")
            return ChatResponse(
                content=content,
                prompt_tokens=int(usage.get('prompt_tokens') or 0),
                completion_tokens=int(usage.get('completion_tokens') or 0),
            )
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProtocolError(f"malformed completion response: {exc}") from exc


@functools.lru_cache(maxsize=None)
def http_backend(config: BackendConfig) -> HTTPChatBackend:
    """
    One shared client per config, so every caller of ``complete`` draws on
    the same in-flight slots. The API key is read when the client is first
    built; call ``http_backend.cache_clear()`` after changing it.
    """
    return HTTPChatBackend(config)


def complete(config: BackendConfig, request: ChatRequest) -> ChatResponse:
    return http_backend(config).complete(request)


_LISTWISE_ID = re.compile(r'^\[(\d+)\] ', re.MULTILINE)


class OracleBackend(ChatBackend):
    """
    Answers reranking prompts from known relevance grades.

    Grades come from ``grade_lookup`` when it knows the document, otherwise
    from ``qrels`` for the request's query. Prompts that match none of the
    three reranking shapes are rejected.
    """

    name = 'oracle'

    def __init__(self, qrels: Optional[Qrels] = None, grade_lookup: Optional[Mapping[str, int]] = None):
        self.qrels = qrels or Qrels()
        self.grade_lookup = dict(grade_lookup or {})

    def grade(self, query_id: Optional[str], doc_id: str) -> int:
        if doc_id in self.grade_lookup:
            return self.grade_lookup[doc_id]
        if query_id is None:
            return 0
        return self.qrels.grade(query_id, doc_id)

    def complete(self, request: ChatRequest) -> ChatResponse:
        content = request.user_content
        doc_ids = request.doc_ids
        if POINTWISE_INSTRUCTION in content and len(doc_ids) == 1:
            answer = str(self.grade(request.query_id, doc_ids[0]))
        elif PAIRWISE_INSTRUCTION in content and len(doc_ids) == 2:
            grade_a = self.grade(request.query_id, doc_ids[0])
            grade_b = self.grade(request.query_id, doc_ids[1])
            answer = 'A' if grade_a >= grade_b else 'B'
        elif LISTWISE_INSTRUCTION in content and self._listwise_ids(content) == list(range(1, len(doc_ids) + 1)):
            order = sorted(
                range(1, len(doc_ids) + 1),
                key=lambda position: (-self.grade(request.query_id, doc_ids[position - 1]), position),
            )
            answer = ' > '.join(f'[{position}]' for position in order)
        else:
            raise UnrecognizedPromptError(
                f"oracle cannot answer this prompt (query {request.query_id}, {len(doc_ids)} documents)"
            )
        prompt_text = ''.join(message.content for message in request.messages)
        return ChatResponse(
            content=answer,
            prompt_tokens=estimate_tokens(prompt_text),
            completion_tokens=estimate_tokens(answer),
        )

    @staticmethod
    def _listwise_ids(content: str):
        return [int(match) for match in _LISTWISE_ID.findall(content)]


def oracle_backend(qrels: Optional[Qrels] = None, grade_lookup: Optional[Mapping[str, int]] = None) -> OracleBackend:
    return OracleBackend(qrels=qrels, grade_lookup=grade_lookup)
