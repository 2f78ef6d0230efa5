from pathlib import Path

from evaluation.metrics import mean_ndcg
from evaluation.models import EvaluationRecord
from evaluation.report import render_report, report_csv
from genrankbench.commands import GenRankCommand
from retrieval.trec import parse_qrels, parse_trec_run, read_text, write_text


class Command(GenRankCommand):
    help = 'Score one or more TREC runs with nDCG@k against a qrels file'

    def add_arguments(self, parser):
        parser.add_argument('run', help='TREC run file; the file stem names the run')
        parser.add_argument('qrels', help='TREC qrels file')
        parser.add_argument('--also', action='append', default=[], metavar='RUN',
                            help='another run to put in the same table (repeatable)')
        parser.add_argument('--k', type=int, default=None, help='cutoff (default GENRANK K_EVAL)')
        parser.add_argument('--csv', help='also write the comparison table as CSV')
        parser.add_argument('--record', action='store_true', help='store the scores in the database')

    def run(self, *args, **options):
        k = self.eval_cutoff(options)
        qrels = parse_qrels(read_text(options['qrels']))
        results = {}
        for path in [options['run'], *options['also']]:
            name = Path(path).stem
            results[name] = result = mean_ndcg(parse_trec_run(read_text(path)), qrels, k)
            if result.skipped_queries:
                self.stderr.write(f"{name}: skipped {len(result.skipped_queries)} queries without relevant documents")
            if options['record']:
                EvaluationRecord.from_result(name, result, run_path=str(path), qrels_path=str(options['qrels']))

        self.stdout.write(render_report(results, k), ending='')
        if options['csv']:
            write_text(options['csv'], report_csv(results, k))
