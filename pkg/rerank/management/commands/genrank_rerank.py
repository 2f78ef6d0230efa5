import logging
from pathlib import Path

from genrankbench.commands import GenRankCommand, open_index, read_qrels, read_queries, write_metadata
from pipelines.config import build_pipeline, make_backend
from pipelines.stages import run_batch
from retrieval.trec import write_text, write_trec_run

logger = logging.getLogger(__name__)


class Command(GenRankCommand):
    help = 'Rerank the head of an existing TREC run with a generative reranker'

    def add_arguments(self, parser):
        parser.add_argument('input_run', help='TREC run to rerank')
        self.add_config_argument(parser)
        self.add_path_arguments(parser, 'index', 'queries', 'qrels', 'output', 'tag')
        self.add_reranker_arguments(parser)

    def run(self, *args, **options):
        source = str(Path(options['input_run']).resolve())
        stages = [{'stage': 'run_file', 'path': source}, {'stage': 'get_text'}, {'stage': 'rerank'}]
        config = self.load_config(options, pipeline=stages)
        config.require('output_run_path')

        index = open_index(config)
        queries = read_queries(config)
        backend = make_backend(config, read_qrels(config))
        pipeline = build_pipeline(config, index, backend)
        logger.info("reranking run=%s pipeline=%r queries=%d", source, pipeline, len(queries))

        batch = run_batch(pipeline, queries, workers=config.workers, continue_on_error=config.continue_on_error)
        write_text(config.output_run_path, write_trec_run(batch.rankings, config.run_tag))
        write_metadata(config.resolved_metadata_path, batch.results)
        self.stdout.write(f"wrote {len(batch.results)} rankings -> {config.output_run_path}")
        for failure in batch.failures:
            self.stderr.write(f"skipped {failure}")
