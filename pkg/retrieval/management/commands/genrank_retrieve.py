from genrankbench.commands import GenRankCommand, open_index, read_queries
from pipelines.stages import Pipeline, RetrieveStage, run_batch
from retrieval.index import BM25Params
from retrieval.trec import write_text, write_trec_run


class Command(GenRankCommand):
    help = 'Retrieve the top-k documents per query with BM25 and write a TREC run'

    def add_arguments(self, parser):
        self.add_config_argument(parser)
        self.add_path_arguments(parser, 'index', 'queries', 'output', 'tag')
        parser.add_argument('--k', type=int, default=1000, help='documents per query (default 1000)')
        parser.add_argument('--k1', type=float, help='BM25 k1')
        parser.add_argument('--b', type=float, help='BM25 b')
        parser.add_argument('--workers', type=int)

    def run(self, *args, **options):
        config = self.load_config(options)
        config.require('output_run_path')
        defaults = BM25Params.from_settings()
        params = BM25Params(
            k1=defaults.k1 if options['k1'] is None else options['k1'],
            b=defaults.b if options['b'] is None else options['b'],
        )
        index = open_index(config)
        queries = read_queries(config)

        pipeline = Pipeline(stages=(RetrieveStage(index, params, k=options['k']),))
        batch = run_batch(pipeline, queries, workers=config.workers)
        write_text(config.output_run_path, write_trec_run(batch.rankings, config.run_tag))
        self.stdout.write(f"wrote {len(batch.results)} rankings -> {config.output_run_path}")
