from django.test import SimpleTestCase

from evaluation.exceptions import EvaluationError
from evaluation.metrics import EvalResult
from evaluation.report import parse_report_csv, render_report, report_csv


def result(mean, k=10):
    return EvalResult(per_query={'q1': mean} if mean is not None else {}, mean=mean, k=k)


class RenderReportTests(SimpleTestCase):
    def test_row_format(self):
        self.assertIn('BM25  0.480', render_report({'BM25': result(0.48)}).splitlines())

    def test_header_only(self):
        self.assertEqual(render_report({}), 'run  nDCG@10\n')

    def test_columns_align(self):
        lines = render_report({'BM25': result(0.48), 'gpt-4o-mini': result(0.71)}).splitlines()
        self.assertEqual(lines[1], 'BM25         0.480')
        self.assertEqual(lines[2], 'gpt-4o-mini  0.710')

    def test_undefined_mean(self):
        self.assertIn('n/a', render_report({'x': result(None)}))

    def test_mixed_k(self):
        with self.assertRaises(EvaluationError):
            render_report({'a': result(0.5, k=10), 'b': result(0.5, k=5)})


class ReportCSVTests(SimpleTestCase):
    def test_round_trip(self):
        results = {'BM25': result(0.48), 'listwise': result(0.7123456789), 'empty': result(None)}
        text = report_csv(results)
        self.assertTrue(text.startswith('run_name,ndcg@10\n'))
        self.assertEqual(parse_report_csv(text), {'BM25': 0.48, 'listwise': 0.7123456789, 'empty': None})

    def test_rejects_other_csv(self):
        with self.assertRaises(EvaluationError):
            parse_report_csv('a,b\n1,2\n')
