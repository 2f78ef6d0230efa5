import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import TestCase

from evaluation.models import EvaluationRecord
from evaluation.report import parse_report_csv


class EvaluateCommandTests(TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.root = Path(self.tmp.name)
        self.qrels = self.root / 'qrels.txt'
        self.qrels.write_text('q1 0 a 3\nq1 0 b 1\nq2 0 c 2\n', encoding='utf-8')
        self.ideal = self.root / 'ideal.run'
        self.ideal.write_text('q1 Q0 a 1 2.0 t\nq1 Q0 b 2 1.0 t\nq2 Q0 c 1 1.0 t\n', encoding='utf-8')
        self.reversed = self.root / 'reversed.run'
        self.reversed.write_text('q1 Q0 b 1 2.0 t\nq1 Q0 a 2 1.0 t\nq2 Q0 x 1 1.0 t\n', encoding='utf-8')

    def test_ideal_run_scores_one(self):
        out = StringIO()
        call_command('genrank_evaluate', str(self.ideal), str(self.qrels), stdout=out)
        self.assertIn('ideal  1.000', out.getvalue())

    def test_several_runs_and_csv(self):
        csv_path = self.root / 'report.csv'
        call_command('genrank_evaluate', str(self.ideal), str(self.qrels), also=[str(self.reversed)],
                     csv=str(csv_path), stdout=StringIO())
        values = parse_report_csv(csv_path.read_text(encoding='utf-8'))
        self.assertEqual(list(values), ['ideal', 'reversed'])
        self.assertEqual(values['ideal'], 1.0)
        self.assertLess(values['reversed'], 1.0)

    def test_no_shared_queries(self):
        other = self.root / 'other.txt'
        other.write_text('q9 0 a 1\n', encoding='utf-8')
        out = StringIO()
        call_command('genrank_evaluate', str(self.ideal), str(other), stdout=out, stderr=StringIO())
        self.assertIn('n/a', out.getvalue())

    def test_parse_failure(self):
        broken = self.root / 'broken.run'
        broken.write_text('q1 Q0 a 1 abc t\n', encoding='utf-8')
        with self.assertRaises(CommandError) as ctx:
            call_command('genrank_evaluate', str(broken), str(self.qrels), stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 1)

    def test_missing_file(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('genrank_evaluate', str(self.root / 'nope.run'), str(self.qrels), stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 1)

    def test_record_then_report(self):
        call_command('genrank_evaluate', str(self.ideal), str(self.qrels), record=True, stdout=StringIO())
        call_command('genrank_evaluate', str(self.reversed), str(self.qrels), record=True, stdout=StringIO())
        self.assertEqual(EvaluationRecord.objects.count(), 2)
        out = StringIO()
        call_command('genrank_report', stdout=out)
        lines = out.getvalue().splitlines()
        self.assertEqual(lines[1], 'ideal     1.000')
        self.assertTrue(lines[2].startswith('reversed  0.'))

    def test_report_without_records(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('genrank_report', stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 1)

    def test_zero_cutoff_rejected(self):
        for command, args in (('genrank_evaluate', [str(self.ideal), str(self.qrels)]), ('genrank_report', [])):
            with self.subTest(command=command):
                with self.assertRaises(CommandError) as ctx:
                    call_command(command, *args, k=0, stdout=StringIO())
                self.assertEqual(ctx.exception.returncode, 1)
        self.assertEqual(EvaluationRecord.objects.count(), 0)

    def test_explicit_cutoff_is_used(self):
        out = StringIO()
        call_command('genrank_evaluate', str(self.ideal), str(self.qrels), k=1, stdout=out)
        self.assertIn('nDCG@1', out.getvalue())
