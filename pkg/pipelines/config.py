"""
Run configuration: one JSON file with ``backend``, ``reranker`` and
``pipeline`` sections, overridable from the command line.

Example::

    {
      "corpus_path": "corpus.jsonl",
      "index_path": "index.json",
      "queries_path": "queries.tsv",
      "qrels_path": "qrels.txt",
      "output_run_path": "runs/listwise.run",
      "run_tag": "listwise",
      "backend": {"kind": "http", "base_url": "http://localhost:8000"},
      "reranker": {"strategy": "listwise", "window_size": 20, "stride": 10},
      "pipeline": [{"stage": "bm25", "k": 100}, {"stage": "get_text"}, {"stage": "rerank"}]
    }
"""
import copy
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

from rerank.backends import BackendConfig, ChatBackend, HTTPChatBackend, oracle_backend
from rerank.rerankers import GenerativeReranker, RerankerConfig
from rerank.serializers import BackendConfigSerializer, RerankerConfigSerializer
from retrieval.index import BM25Params, InvertedIndex
from retrieval.trec import parse_trec_run, read_text
from retrieval.types import Qrels

from .exceptions import PipelineConfigurationError, RunConfigError
from .serializers import RunConfigSerializer, default_stages
from .stages import (
    CutStage,
    GetTextStage,
    IdentityStage,
    Pipeline,
    RerankStage,
    RetrieveStage,
    RunFileStage,
)

logger = logging.getLogger(__name__)

PATH_FIELDS = (
    'corpus_path', 'index_path', 'queries_path', 'qrels_path',
    'output_run_path', 'metadata_path', 'report_csv_path',
)


@dataclass(frozen=True)
class RunConfig:
    corpus_path: Optional[str]
    index_path: Optional[str]
    queries_path: Optional[str]
    qrels_path: Optional[str]
    output_run_path: Optional[str]
    metadata_path: Optional[str]
    report_csv_path: Optional[str]
    run_tag: str
    k_eval: int
    workers: int
    continue_on_error: bool
    backend_kind: str
    backend: BackendConfig
    reranker: RerankerConfig
    pipeline: Tuple[dict, ...]

    def require(self, *names: str) -> None:
        missing = [name for name in names if not getattr(self, name)]
        if missing:
            raise RunConfigError(f"missing configuration: {', '.join(missing)}")

    @property
    def resolved_metadata_path(self) -> Optional[str]:
        if self.metadata_path:
            return self.metadata_path
        if self.output_run_path:
            return f'{self.output_run_path}.meta.jsonl'
        return None


def _resolve_paths(raw: dict, base_dir: Path) -> None:
    for name in PATH_FIELDS:
        value = raw.get(name)
        if value and not Path(value).is_absolute():
            raw[name] = str(base_dir / value)
    for spec in raw.get('pipeline') or []:
        if isinstance(spec, dict) and spec.get('path') and not Path(spec['path']).is_absolute():
            spec['path'] = str(base_dir / spec['path'])


def _apply_overrides(raw: dict, overrides: dict) -> None:
    """Overrides use dotted keys (``reranker.window_size``); ``None`` means not given."""
    for dotted, value in overrides.items():
        if value is None:
            continue
        target = raw
        *parents, leaf = dotted.split('.')
        for parent in parents:
            target = target.setdefault(parent, {})
        target[leaf] = value


def load_run_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> RunConfig:
    raw = {}
    if path:
        config_path = Path(path)
        try:
            raw = json.loads(config_path.read_text(encoding='utf-8'))
        except OSError as exc:
            raise RunConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise RunConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise RunConfigError(f"config {path} must hold a JSON object")
        _resolve_paths(raw, config_path.resolve().parent)
    raw = copy.deepcopy(raw)
    raw.setdefault('backend', {})
    raw.setdefault('reranker', {})
    raw.setdefault('pipeline', default_stages())
    _apply_overrides(raw, overrides or {})

    serializer = RunConfigSerializer(data=raw)
    if not serializer.is_valid():
        raise RunConfigError(f"invalid run config: {json.dumps(serializer.errors)}", serializer.errors)
    data = serializer.validated_data
    return RunConfig(
        corpus_path=data['corpus_path'],
        index_path=data['index_path'],
        queries_path=data['queries_path'],
        qrels_path=data['qrels_path'],
        output_run_path=data['output_run_path'],
        metadata_path=data['metadata_path'],
        report_csv_path=data['report_csv_path'],
        run_tag=data['run_tag'],
        k_eval=data['k_eval'],
        workers=data['workers'],
        continue_on_error=data['continue_on_error'],
        backend_kind=data['backend']['kind'],
        backend=BackendConfigSerializer.build(data['backend']),
        reranker=RerankerConfigSerializer.build(data['reranker']),
        pipeline=tuple(dict(spec) for spec in data['pipeline']),
    )


def make_backend(config: RunConfig, qrels: Optional[Qrels] = None) -> ChatBackend:
    if config.backend_kind == 'oracle':
        if qrels is None:
            raise RunConfigError("the oracle backend answers from qrels; set qrels_path")
        return oracle_backend(qrels=qrels)
    return HTTPChatBackend(config.backend)


def needs_backend(config: RunConfig) -> bool:
    return any(spec['stage'] == 'rerank' for spec in config.pipeline)


def build_pipeline(config: RunConfig, index: Optional[InvertedIndex],
                   backend: Optional[ChatBackend] = None) -> Pipeline:
    """Turn the stage specs into a validated Pipeline.

    ``backend`` may be None only when no rerank stage is configured or the
    pipeline is built for a dry run.
    """
    stages = []
    bm25_defaults = BM25Params.from_settings()
    for spec in config.pipeline:
        name = spec['stage']
        if name in ('bm25', 'get_text') and index is None:
            raise RunConfigError(f"stage {name} needs an index; set index_path or corpus_path")
        if name == 'bm25':
            params = BM25Params(k1=spec.get('k1', bm25_defaults.k1), b=spec.get('b', bm25_defaults.b))
            stages.append(RetrieveStage(index, params, k=spec.get('k', 1000)))
        elif name == 'run_file':
            stages.append(RunFileStage(parse_trec_run(read_text(spec['path'])), name=f"run_file({Path(spec['path']).name})"))
        elif name == 'get_text':
            stages.append(GetTextStage(index))
        elif name == 'rerank':
            stages.append(RerankStage(GenerativeReranker(backend, config.reranker)))
        elif name == 'cut':
            stages.append(CutStage(spec['k']))
        elif name == 'identity':
            stages.append(IdentityStage())
    pipeline = Pipeline(stages=tuple(stages))
    try:
        pipeline.validate()
    except PipelineConfigurationError as exc:
        raise RunConfigError(str(exc)) from exc
    return pipeline
