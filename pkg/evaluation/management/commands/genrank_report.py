from django.core.management.base import CommandError

from evaluation.models import EvaluationRecord
from evaluation.report import render_report, report_csv
from genrankbench.commands import EXIT_CONFIG, GenRankCommand
from retrieval.trec import write_text


class Command(GenRankCommand):
    help = 'Print the latest recorded nDCG@k for every run'

    def add_arguments(self, parser):
        parser.add_argument('--k', type=int, default=None, help='cutoff (default GENRANK K_EVAL)')
        parser.add_argument('--csv', help='also write the table as CSV')

    def run(self, *args, **options):
        k = self.eval_cutoff(options)
        records = EvaluationRecord.latest_per_run(k)
        if not records:
            raise CommandError(f"no evaluations recorded for k={k}", returncode=EXIT_CONFIG)
        results = {name: record.to_result() for name, record in records.items()}
        self.stdout.write(render_report(results, k), ending='')
        if options['csv']:
            write_text(options['csv'], report_csv(results, k))
