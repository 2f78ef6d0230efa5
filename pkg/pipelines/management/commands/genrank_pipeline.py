import logging

from evaluation.metrics import mean_ndcg
from evaluation.models import EvaluationRecord
from evaluation.report import render_report, report_csv
from genrankbench.commands import GenRankCommand, open_index, read_qrels, read_queries, write_metadata
from pipelines.config import build_pipeline, make_backend, needs_backend
from pipelines.stages import RunFileStage, describe, run_batch
from retrieval.trec import write_text, write_trec_run

logger = logging.getLogger(__name__)


class Command(GenRankCommand):
    help = 'Run a configured retrieve/rerank pipeline end to end and score it'

    def add_arguments(self, parser):
        self.add_config_argument(parser)
        self.add_path_arguments(parser, 'corpus', 'index', 'queries', 'qrels', 'output', 'tag')
        self.add_reranker_arguments(parser)
        parser.add_argument('--dry-run', action='store_true',
                            help='print the stages and an upper bound on backend calls, then exit')
        parser.add_argument('--record', action='store_true', help='store the score in the database')

    def run(self, *args, **options):
        config = self.load_config(options)
        queries = read_queries(config)
        qrels = read_qrels(config)
        index = open_index(config, allow_build=True)

        if options['dry_run']:
            pipeline = build_pipeline(config, index, backend=None)
            source = pipeline.stages[0]
            n = max((len(r) for r in source.rankings.values()), default=0) if isinstance(source, RunFileStage) else 0
            per_query = pipeline.estimate_calls(n)
            self.stdout.write('\n'.join(describe(pipeline)))
            self.stdout.write(
                f"queries={len(queries)} calls_per_query<={per_query} total_calls<={per_query * len(queries)}"
            )
            return

        config.require('output_run_path')
        # stage order is checked before any credentials are looked up
        build_pipeline(config, index, backend=None)
        backend = make_backend(config, qrels) if needs_backend(config) else None
        pipeline = build_pipeline(config, index, backend)
        logger.info("running pipeline=%r queries=%d workers=%d", pipeline, len(queries), config.workers)

        batch = run_batch(pipeline, queries, workers=config.workers, continue_on_error=config.continue_on_error)
        write_text(config.output_run_path, write_trec_run(batch.rankings, config.run_tag))
        write_metadata(config.resolved_metadata_path, batch.results)
        self.stdout.write(f"wrote {len(batch.results)} rankings -> {config.output_run_path}")
        for failure in batch.failures:
            self.stderr.write(f"skipped {failure}")

        if qrels is None:
            return
        result = mean_ndcg(batch.rankings, qrels, config.k_eval)
        results = {config.run_tag: result}
        self.stdout.write(render_report(results, config.k_eval), ending='')
        if config.report_csv_path:
            write_text(config.report_csv_path, report_csv(results, config.k_eval))
        if options['record']:
            EvaluationRecord.from_result(config.run_tag, result, run_path=config.output_run_path,
                                         qrels_path=config.qrels_path)
