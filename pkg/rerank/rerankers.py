"""
Second-stage generative rerankers.

Every strategy reorders only the head (``rerank_depth`` documents) and
appends the tail untouched. Output scores are synthetic (n, n-1, ..., 1)
because models return orders, not calibrated scores. Ties always fall back
to the first-stage order.
"""
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Mapping, Optional, Sequence, TypeVar

from django.conf import settings

from retrieval.types import Document, Query, Ranking, ranking_from_order

from .backends import ChatBackend
from .chat import ChatResponse
from .exceptions import BackendError, RerankError, UnparseableResponseError
from .parsing import parse_pairwise_verdict, parse_permutation, parse_pointwise_score
from .prompts import (
    LISTWISE,
    MAX_WINDOW,
    PAIRWISE,
    POINTWISE,
    PromptTemplateSet,
    TruncationPolicy,
    build_listwise_prompt,
    build_pairwise_prompt,
    build_pointwise_prompt,
    load_templates,
)

logger = logging.getLogger(__name__)

STRATEGIES = (POINTWISE, PAIRWISE, LISTWISE)

T = TypeVar('T')


@dataclass(frozen=True)
class RerankerConfig:
    strategy: str = LISTWISE
    rerank_depth: int = 100
    window_size: int = 20
    stride: int = 10
    model: str = 'gpt-4o-mini'
    truncation: TruncationPolicy = field(default_factory=TruncationPolicy)
    passes: int = 1
    max_grade: int = 3
    temperature: float = 0.0
    max_tokens: Optional[int] = None
    # parallel calls per query for pointwise/pairwise; None follows the backend bound
    concurrency: Optional[int] = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if self.rerank_depth < 1:
            raise ValueError(f"rerank_depth must be >= 1, got {self.rerank_depth}")
        if self.window_size < 1 or self.stride < 1:
            raise ValueError("window_size and stride must be >= 1")
        if self.stride > self.window_size:
            raise ValueError(f"stride {self.stride} exceeds window size {self.window_size}")
        if self.strategy == LISTWISE and not 2 <= self.window_size <= MAX_WINDOW:
            raise ValueError(f"listwise window_size must be in 2..{MAX_WINDOW}, got {self.window_size}")
        if self.passes < 1:
            raise ValueError(f"passes must be >= 1, got {self.passes}")

    @classmethod
    def from_settings(cls, **overrides) -> 'RerankerConfig':
        defaults = settings.GENRANK
        values = {
            'rerank_depth': defaults['RERANK_DEPTH'],
            'window_size': defaults['WINDOW_SIZE'],
            'stride': defaults['STRIDE'],
            'model': defaults['MODEL'],
            'truncation': TruncationPolicy(max_doc_tokens=defaults['MAX_DOC_TOKENS']),
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


class RerankStats:
    """Per-query counters; safe to update from worker threads."""

    def __init__(self):
        self._lock = threading.Lock()
        self.calls = 0
        self.unparseable = 0
        self.prompt_tokens = 0
        self.completion_tokens = 0

    def record(self, response: ChatResponse) -> None:
        with self._lock:
            self.calls += 1
            self.prompt_tokens += response.prompt_tokens
            self.completion_tokens += response.completion_tokens

    def record_unparseable(self) -> None:
        with self._lock:
            self.unparseable += 1


@dataclass
class RerankOutcome:
    ranking: Ranking
    stats: RerankStats


def window_starts(head: int, window_size: int, stride: int) -> List[int]:
    """Back-to-front window starts: head - w, then down by stride, ending at 0."""
    if head <= window_size:
        return [0]
    starts = []
    start = head - window_size
    while start > 0:
        starts.append(start)
        start -= stride
    starts.append(0)
    return starts


def estimate_calls(cfg: RerankerConfig, n: int) -> int:
    """Backend calls needed to rerank a ranking of ``n`` documents."""
    head = min(cfg.rerank_depth, n)
    if cfg.strategy == POINTWISE:
        return head
    if cfg.strategy == PAIRWISE:
        return head * (head - 1) if head >= 2 else 0
    if head < 2:
        return 0
    return cfg.passes * len(window_starts(head, cfg.window_size, cfg.stride))


def _head(ranking: Ranking, cfg: RerankerConfig, texts: Mapping[str, str], query: Query) -> List[str]:
    head = list(ranking.doc_ids[:cfg.rerank_depth])
    missing = [doc_id for doc_id in head if doc_id not in texts]
    if missing:
        raise ValueError(f"query {query.id}: no text for {len(missing)} head documents, e.g. {missing[0]}")
    return head


def _run_all(tasks: Sequence[Callable[[], T]], workers: int) -> List[T]:
    if workers <= 1 or len(tasks) <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(lambda task: task(), tasks))


def _workers(backend: ChatBackend, cfg: RerankerConfig) -> int:
    return cfg.concurrency or getattr(backend, 'max_in_flight', 1)


def _max_tokens(cfg: RerankerConfig, default: int) -> int:
    return cfg.max_tokens or default


def rerank_pointwise(backend: ChatBackend, query: Query, ranking: Ranking, texts: Mapping[str, str],
                     cfg: RerankerConfig, stats: Optional[RerankStats] = None,
                     templates: Optional[PromptTemplateSet] = None) -> Ranking:
    stats = stats if stats is not None else RerankStats()
    templates = templates or load_templates()
    head = _head(ranking, cfg, texts, query)

    def judge(doc_id: str) -> Callable[[], int]:
        def call() -> int:
            bundle = build_pointwise_prompt(query, Document(id=doc_id, text=texts[doc_id]), cfg.truncation, templates)
            try:
                response = backend.complete(bundle.to_request(cfg.model, cfg.temperature, _max_tokens(cfg, 8)))
            except BackendError as exc:
                raise RerankError(query.id, f"document {doc_id}", exc) from exc
            stats.record(response)
            try:
                return parse_pointwise_score(response.content, cfg.max_grade)
            except UnparseableResponseError:
                stats.record_unparseable()
                logger.warning("unparseable pointwise grade query_id=%s doc_id=%s; using 0", query.id, doc_id)
                return 0
        return call

    grades = _run_all([judge(doc_id) for doc_id in head], _workers(backend, cfg))
    order = sorted(range(len(head)), key=lambda position: (-grades[position], position))
    reordered = [head[position] for position in order]
    return ranking_from_order(query.id, reordered + list(ranking.doc_ids[len(head):]))


def rerank_pairwise_allpairs(backend: ChatBackend, query: Query, ranking: Ranking, texts: Mapping[str, str],
                             cfg: RerankerConfig, stats: Optional[RerankStats] = None,
                             templates: Optional[PromptTemplateSet] = None) -> Ranking:
    stats = stats if stats is not None else RerankStats()
    templates = templates or load_templates()
    head = _head(ranking, cfg, texts, query)
    if len(head) < 2:
        return ranking

    def compare(first: int, second: int) -> Callable[[], int]:
        doc_a, doc_b = head[first], head[second]

        def call() -> int:
            bundle = build_pairwise_prompt(
                query, Document(id=doc_a, text=texts[doc_a]), Document(id=doc_b, text=texts[doc_b]),
                cfg.truncation, templates,
            )
            try:
                response = backend.complete(bundle.to_request(cfg.model, cfg.temperature, _max_tokens(cfg, 8)))
            except BackendError as exc:
                raise RerankError(query.id, f"pair ({doc_a}, {doc_b})", exc) from exc
            stats.record(response)
            try:
                verdict = parse_pairwise_verdict(response.content)
            except UnparseableResponseError:
                stats.record_unparseable()
                logger.warning("unparseable pairwise verdict query_id=%s pair=(%s,%s); counting A", query.id, doc_a, doc_b)
                verdict = 'A'
            return first if verdict == 'A' else second
        return call

    # both orderings of every pair, to cancel position bias
    tasks = [compare(i, j) for i in range(len(head)) for j in range(len(head)) if i != j]
    wins = [0] * len(head)
    for winner in _run_all(tasks, _workers(backend, cfg)):
        wins[winner] += 1
    order = sorted(range(len(head)), key=lambda position: (-wins[position], position))
    reordered = [head[position] for position in order]
    return ranking_from_order(query.id, reordered + list(ranking.doc_ids[len(head):]))


def rerank_listwise_sliding(backend: ChatBackend, query: Query, ranking: Ranking, texts: Mapping[str, str],
                            cfg: RerankerConfig, stats: Optional[RerankStats] = None,
                            templates: Optional[PromptTemplateSet] = None) -> Ranking:
    if cfg.window_size < 2:
        raise ValueError(f"listwise reranking needs window_size >= 2, got {cfg.window_size}")
    stats = stats if stats is not None else RerankStats()
    templates = templates or load_templates()
    head = _head(ranking, cfg, texts, query)
    if len(head) < 2:
        return ranking

    order = list(head)
    # windows are sequential: each one sees the previous reorder
    for _pass in range(cfg.passes):
        for start in window_starts(len(order), cfg.window_size, cfg.stride):
            end = min(start + cfg.window_size, len(order))
            window = order[start:end]
            bundle = build_listwise_prompt(query, [(doc_id, texts[doc_id]) for doc_id in window],
                                           cfg.truncation, templates)
            request = bundle.to_request(cfg.model, cfg.temperature, _max_tokens(cfg, 8 * len(window) + 16))
            try:
                response = backend.complete(request)
            except BackendError as exc:
                raise RerankError(query.id, f"window start {start}", exc) from exc
            stats.record(response)
            try:
                permutation = parse_permutation(response.content, len(window))
            except UnparseableResponseError:
                stats.record_unparseable()
                logger.warning("unparseable listwise response query_id=%s window_start=%d; window kept", query.id, start)
                continue
            order[start:end] = [window[index - 1] for index in permutation.order]
    return ranking_from_order(query.id, order + list(ranking.doc_ids[len(head):]))


_STRATEGY_FUNCTIONS = {
    POINTWISE: rerank_pointwise,
    PAIRWISE: rerank_pairwise_allpairs,
    LISTWISE: rerank_listwise_sliding,
}


class GenerativeReranker:
    """Binds a backend and config; dispatches to the configured strategy."""

    def __init__(self, backend: ChatBackend, config: RerankerConfig,
                 templates: Optional[PromptTemplateSet] = None):
        self.backend = backend
        self.config = config
        self.templates = templates or load_templates()

    @property
    def prompt_version(self) -> str:
        return self.templates.version

    def rerank(self, query: Query, ranking: Ranking, texts: Mapping[str, str]) -> RerankOutcome:
        stats = RerankStats()
        rerank = _STRATEGY_FUNCTIONS[self.config.strategy]
        reranked = rerank(self.backend, query, ranking, texts, self.config, stats=stats, templates=self.templates)
        logger.info(
            "reranked query_id=%s strategy=%s calls=%d unparseable=%d",
            query.id, self.config.strategy, stats.calls, stats.unparseable,
        )
        return RerankOutcome(ranking=reranked, stats=stats)

    def metadata(self, query_id: str, stats: RerankStats) -> dict:
        return {
            'query_id': query_id,
            'strategy': self.config.strategy,
            'model': self.config.model,
            'window_size': self.config.window_size,
            'stride': self.config.stride,
            'rerank_depth': self.config.rerank_depth,
            'passes': self.config.passes,
            'prompt_version': self.prompt_version,
            'backend': self.backend.name,
            'calls': stats.calls,
            'unparseable': stats.unparseable,
            'prompt_tokens': stats.prompt_tokens,
            'completion_tokens': stats.completion_tokens,
        }
