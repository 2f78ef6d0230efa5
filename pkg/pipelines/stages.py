"""
Composable retrieval stages.

A pipeline is written the way retrieval experiments read::

    pipeline = bm25 >> GetTextStage(index) >> RerankStage(reranker) >> cut(10)
    ranking = run_pipeline(pipeline, Query('q1', 'Indian restaurants'))

Texts travel next to the ranking as a side map filled by ``get_text``;
a reranker placed before any ``get_text`` is rejected before the first
backend call.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from rerank.rerankers import GenerativeReranker, estimate_calls
from retrieval.index import BM25Params, InvertedIndex, get_text, retrieve
from retrieval.trec import top_k
from retrieval.types import Query, Ranking, validate_ranking

from .exceptions import PipelineConfigurationError, StageError

logger = logging.getLogger(__name__)

Texts = Optional[Dict[str, str]]


@dataclass
class StageOutput:
    ranking: Ranking
    texts: Texts = None
    metadata: dict = field(default_factory=dict)


class Stage:
    name = 'stage'
    is_source = False
    provides_texts = False
    requires_texts = False

    def apply(self, query: Query, ranking: Ranking, texts: Texts) -> StageOutput:
        raise NotImplementedError

    def estimate_calls(self, n: int) -> int:
        return 0

    def __rshift__(self, other):
        return compose(self, other)

    def __repr__(self):
        return self.name


class RetrieveStage(Stage):
    is_source = True

    def __init__(self, index: InvertedIndex, params: BM25Params = None, k: int = 1000):
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        self.index = index
        self.params = params or BM25Params()
        self.k = k
        self.name = f'bm25(k={k})'

    def apply(self, query, ranking, texts):
        return StageOutput(ranking=retrieve(self.index, self.params, query, self.k))


class RunFileStage(Stage):
    """Source stage replaying an existing run; unknown queries get an empty ranking."""

    is_source = True

    def __init__(self, rankings: Sequence[Ranking], name: str = 'run_file'):
        self.rankings = {ranking.query_id: ranking for ranking in rankings}
        self.name = name

    def apply(self, query, ranking, texts):
        return StageOutput(ranking=self.rankings.get(query.id, Ranking(query_id=query.id)))


class GetTextStage(Stage):
    name = 'get_text'
    provides_texts = True

    def __init__(self, index: InvertedIndex):
        self.index = index

    def apply(self, query, ranking, texts):
        return StageOutput(ranking=ranking, texts=dict(get_text(self.index, ranking)))


class RerankStage(Stage):
    requires_texts = True

    def __init__(self, reranker: GenerativeReranker):
        self.reranker = reranker
        self.name = f'rerank({reranker.config.strategy})'

    def apply(self, query, ranking, texts):
        outcome = self.reranker.rerank(query, ranking, texts)
        return StageOutput(
            ranking=outcome.ranking,
            texts=texts,
            metadata=self.reranker.metadata(query.id, outcome.stats),
        )

    def estimate_calls(self, n):
        return estimate_calls(self.reranker.config, n)


class CutStage(Stage):
    def __init__(self, k: int):
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        self.k = k
        self.name = f'cut({k})'

    def apply(self, query, ranking, texts):
        return StageOutput(ranking=top_k(ranking, self.k), texts=texts)


class IdentityStage(Stage):
    name = 'identity'

    def apply(self, query, ranking, texts):
        return StageOutput(ranking=ranking, texts=texts)


def cut(k: int) -> CutStage:
    return CutStage(k)


@dataclass
class PipelineResult:
    query_id: str
    ranking: Ranking
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Pipeline:
    stages: Tuple[Stage, ...]

    def __post_init__(self):
        object.__setattr__(self, 'stages', tuple(self.stages))
        if not self.stages:
            raise PipelineConfigurationError("a pipeline needs at least one stage")

    def __rshift__(self, other):
        return compose(self, other)

    def __repr__(self):
        return ' >> '.join(stage.name for stage in self.stages)

    def validate(self) -> None:
        if not self.stages[0].is_source:
            raise PipelineConfigurationError(
                f"first stage must be a retriever or run-file source, got {self.stages[0].name}"
            )
        has_texts = False
        for stage in self.stages:
            if stage.is_source:
                has_texts = False
            if stage.requires_texts and not has_texts:
                raise PipelineConfigurationError(
                    f"stage {stage.name} needs document texts; add a get_text stage before it"
                )
            if stage.provides_texts:
                has_texts = True

    def execute(self, query: Query) -> PipelineResult:
        self.validate()
        ranking = Ranking(query_id=query.id)
        texts: Texts = None
        metadata = {}
        for stage in self.stages:
            try:
                output = stage.apply(query, ranking, texts)
                if not stage.is_source:
                    invented = set(output.ranking.doc_ids) - set(ranking.doc_ids)
                    if invented:
                        raise PipelineConfigurationError(
                            f"stage produced unknown documents, e.g. {sorted(invented)[0]}"
                        )
            except Exception as exc:
                logger.error("stage failed stage=%s query_id=%s error=%s", stage.name, query.id, exc)
                raise StageError(stage.name, query.id, exc) from exc
            ranking, texts = output.ranking, output.texts
            metadata.update(output.metadata)
        validate_ranking(ranking)
        return PipelineResult(query_id=query.id, ranking=ranking, metadata=metadata)

    def estimate_calls(self, n: int) -> int:
        """Upper bound on backend calls for one query whose source returns ``n`` documents."""
        total = 0
        for stage in self.stages:
            if isinstance(stage, RetrieveStage):
                n = stage.k
            elif isinstance(stage, CutStage):
                n = min(n, stage.k)
            total += stage.estimate_calls(n)
        return total


def compose(a: Union[Stage, Pipeline], b: Union[Stage, Pipeline]) -> Pipeline:
    left = a.stages if isinstance(a, Pipeline) else (a,)
    right = b.stages if isinstance(b, Pipeline) else (b,)
    return Pipeline(stages=left + right)


def run_pipeline(pipeline: Pipeline, query: Query) -> Ranking:
    return pipeline.execute(query).ranking


@dataclass
class BatchResult:
    results: List[PipelineResult]
    failures: List[StageError]

    @property
    def rankings(self) -> List[Ranking]:
        return [result.ranking for result in self.results]


def run_batch(pipeline: Pipeline, queries: Sequence[Query], workers: int = 1,
              continue_on_error: bool = False) -> BatchResult:
    """Run every query in isolation; results keep query order."""
    pipeline.validate()

    def run_one(query: Query):
        try:
            return pipeline.execute(query)
        except StageError as exc:
            if not continue_on_error and workers <= 1:
                raise
            return exc

    if workers > 1 and len(queries) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            outcomes = list(executor.map(run_one, queries))
    else:
        outcomes = [run_one(query) for query in queries]

    results, failures = [], []
    for outcome in outcomes:
        if isinstance(outcome, StageError):
            if not continue_on_error:
                raise outcome
            failures.append(outcome)
        else:
            results.append(outcome)
    logger.info("batch finished queries=%d failed=%d", len(queries), len(failures))
    return BatchResult(results=results, failures=failures)


def describe(pipeline: Pipeline) -> List[str]:
    return [stage.name for stage in pipeline.stages]
