"""
Shared plumbing for the ``genrank_*`` management commands.

Exit codes are a stable contract: 0 success, 1 configuration or parse
error, 2 backend (auth/transport/endpoint) error.
"""
import json
import logging
from pathlib import Path
from typing import Iterable, List, Optional

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from evaluation.exceptions import EvaluationError
from pipelines.config import RunConfig, load_run_config
from pipelines.exceptions import PipelineConfigurationError, RunConfigError, StageError
from pipelines.stages import PipelineResult
from rerank.exceptions import BackendError, PromptError, RerankError
from retrieval.corpus import load_corpus
from retrieval.exceptions import RetrievalError
from retrieval.index import InvertedIndex, build_index, load_index
from retrieval.trec import parse_qrels, parse_queries, read_text
from retrieval.types import Qrels, Query

logger = logging.getLogger(__name__)

EXIT_CONFIG = 1
EXIT_BACKEND = 2

# CLI flag -> dotted RunConfig key
OVERRIDE_FLAGS = {
    'corpus': 'corpus_path',
    'index': 'index_path',
    'queries': 'queries_path',
    'qrels': 'qrels_path',
    'output': 'output_run_path',
    'tag': 'run_tag',
    'workers': 'workers',
    'strategy': 'reranker.strategy',
    'window': 'reranker.window_size',
    'stride': 'reranker.stride',
    'depth': 'reranker.rerank_depth',
    'model': 'reranker.model',
    'base_url': 'backend.base_url',
    'backend': 'backend.kind',
}

CONFIG_ERRORS = (
    RunConfigError,
    PipelineConfigurationError,
    RetrievalError,
    EvaluationError,
    PromptError,
    OSError,
    ValueError,
)


def _backend_cause(exc: BaseException) -> Optional[BaseException]:
    seen = set()
    while exc is not None and id(exc) not in seen:
        seen.add(id(exc))
        if isinstance(exc, (BackendError, RerankError)):
            return exc
        exc = exc.__cause__
    return None


class GenRankCommand(BaseCommand):
    """Base command: maps domain errors onto exit codes."""

    def add_config_argument(self, parser):
        parser.add_argument('--config', help='JSON run config file')

    def add_path_arguments(self, parser, *names):
        helps = {
            'corpus': 'corpus file (.jsonl or id<TAB>text)',
            'index': 'index file',
            'queries': 'queries TSV (qid<TAB>text)',
            'qrels': 'TREC qrels file',
            'output': 'output TREC run file',
            'tag': 'run tag written in the last run column',
        }
        for name in names:
            parser.add_argument(f'--{name}', help=helps[name])

    def add_reranker_arguments(self, parser):
        parser.add_argument('--strategy', choices=['pointwise', 'pairwise', 'listwise'])
        parser.add_argument('--window', type=int, help='listwise window size')
        parser.add_argument('--stride', type=int, help='listwise stride')
        parser.add_argument('--depth', type=int, help='number of head documents to rerank')
        parser.add_argument('--model', help='model name sent to the endpoint')
        parser.add_argument('--base-url', dest='base_url', help='OpenAI-compatible endpoint base URL')
        parser.add_argument('--backend', choices=['http', 'oracle'])
        parser.add_argument('--workers', type=int, help='queries processed in parallel')

    def load_config(self, options, pipeline=None) -> RunConfig:
        overrides = {dotted: options.get(flag) for flag, dotted in OVERRIDE_FLAGS.items()}
        overrides['pipeline'] = pipeline
        return load_run_config(options.get('config'), overrides)

    def eval_cutoff(self, options) -> int:
        k = options.get('k')
        if k is None:
            return settings.GENRANK['K_EVAL']
        if k < 1:
            raise CommandError(f"--k must be >= 1, got {k}", returncode=EXIT_CONFIG)
        return k

    def handle(self, *args, **options):
        try:
            self.run(*args, **options)
        except CommandError:
            raise
        except Exception as exc:
            backend_error = _backend_cause(exc)
            if backend_error is not None:
                logger.error("backend failure: %s", exc)
                raise CommandError(f"backend error: {exc}", returncode=EXIT_BACKEND) from exc
            if isinstance(exc, StageError) or isinstance(exc, CONFIG_ERRORS):
                raise CommandError(str(exc), returncode=EXIT_CONFIG) from exc
            raise

    def run(self, *args, **options):
        raise NotImplementedError


def read_queries(config: RunConfig) -> List[Query]:
    config.require('queries_path')
    return parse_queries(read_text(config.queries_path))


def read_qrels(config: RunConfig) -> Optional[Qrels]:
    if not config.qrels_path:
        return None
    return parse_qrels(read_text(config.qrels_path))


def open_index(config: RunConfig, allow_build: bool = False) -> InvertedIndex:
    if config.index_path and Path(config.index_path).exists():
        return load_index(config.index_path)
    if allow_build and config.corpus_path:
        logger.info("index %s missing; building in memory from %s", config.index_path, config.corpus_path)
        return build_index(load_corpus(config.corpus_path))
    raise RunConfigError(f"index not found: {config.index_path or '(index_path not set)'}")


def write_metadata(path: str, results: Iterable[PipelineResult]) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open('w', encoding='utf-8', newline='\n') as handle:
        for result in results:
            if result.metadata:
                handle.write(json.dumps(result.metadata, sort_keys=True) + '\n')
