import json
import os
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import TestCase

from evaluation.models import EvaluationRecord
from evaluation.report import parse_report_csv
from genrankbench.testing import FakeChatServer, synthetic_collection
from retrieval.trec import parse_trec_run


class PipelineCommandTests(TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.root = Path(self.tmp.name)
        collection = self.collection = synthetic_collection()
        (self.root / 'corpus.jsonl').write_text(''.join(
            json.dumps({'id': doc.id, 'text': doc.text}) + '\n' for doc in collection.documents
        ), encoding='utf-8')
        (self.root / 'queries.tsv').write_text(
            ''.join(f'{q.id}\t{q.text}\n' for q in collection.queries), encoding='utf-8')
        (self.root / 'qrels.txt').write_text(''.join(
            f'{qid} 0 {did} {grade}\n' for (qid, did), grade in collection.qrels.judgments.items()
        ), encoding='utf-8')
        env = mock.patch.dict(os.environ, {'GENRANK_API_KEY': 'test'})
        env.start()
        self.addCleanup(env.stop)

    def write_config(self, **overrides):
        payload = {
            'corpus_path': 'corpus.jsonl',
            'index_path': 'index.json',
            'queries_path': 'queries.tsv',
            'qrels_path': 'qrels.txt',
            'output_run_path': 'runs/listwise.run',
            'report_csv_path': 'runs/report.csv',
            'run_tag': 'listwise',
            'backend': {'kind': 'oracle'},
            'reranker': {'strategy': 'listwise', 'window_size': 20, 'stride': 10, 'rerank_depth': 50},
            'pipeline': [{'stage': 'bm25', 'k': 50}, {'stage': 'get_text'}, {'stage': 'rerank'}],
        }
        payload.update(overrides)
        path = self.root / 'config.json'
        path.write_text(json.dumps(payload), encoding='utf-8')
        return str(path)

    def test_oracle_end_to_end(self):
        out = StringIO()
        call_command('genrank_pipeline', config=self.write_config(), record=True, stdout=out)
        self.assertIn('listwise  1.000', out.getvalue())
        rankings = parse_trec_run((self.root / 'runs' / 'listwise.run').read_text(encoding='utf-8'))
        self.assertEqual(len(rankings), 10)
        self.assertEqual(parse_report_csv((self.root / 'runs' / 'report.csv').read_text(encoding='utf-8')),
                         {'listwise': 1.0})
        self.assertTrue((self.root / 'runs' / 'listwise.run.meta.jsonl').exists())
        self.assertEqual(EvaluationRecord.objects.get().mean_ndcg, 1.0)

    def test_flags_override_config(self):
        call_command('genrank_pipeline', config=self.write_config(), strategy='pointwise', stdout=StringIO())
        record = json.loads(
            (self.root / 'runs' / 'listwise.run.meta.jsonl').read_text(encoding='utf-8').splitlines()[0])
        self.assertEqual(record['strategy'], 'pointwise')

    def test_dry_run_makes_no_requests(self):
        with FakeChatServer() as server:
            out = StringIO()
            call_command('genrank_pipeline', config=self.write_config(backend={'kind': 'http'}),
                         base_url=server.base_url, dry_run=True, stdout=out)
        self.assertEqual(server.request_count, 0)
        self.assertIn('rerank(listwise)', out.getvalue())
        self.assertIn('total_calls<=40', out.getvalue())
        self.assertFalse((self.root / 'runs' / 'listwise.run').exists())

    def test_missing_get_text_fails_before_backend(self):
        config = self.write_config(backend={'kind': 'http'},
                                   pipeline=[{'stage': 'bm25', 'k': 50}, {'stage': 'rerank'}])
        with FakeChatServer() as server:
            with self.assertRaises(CommandError) as ctx:
                call_command('genrank_pipeline', config=config, base_url=server.base_url, stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertEqual(server.request_count, 0)

    def test_missing_get_text_without_credentials_is_config_error(self):
        config = self.write_config(backend={'kind': 'http'},
                                   pipeline=[{'stage': 'bm25', 'k': 50}, {'stage': 'rerank'}])
        with mock.patch.dict(os.environ):
            os.environ.pop('GENRANK_API_KEY', None)
            with self.assertRaises(CommandError) as ctx:
                call_command('genrank_pipeline', config=config, stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn('get_text', str(ctx.exception))

    def test_unreachable_endpoint_is_exit_2(self):
        config = self.write_config(backend={'kind': 'http', 'max_retries': 0, 'timeout_ms': 500})
        with FakeChatServer(default=(503, {})) as server:
            with self.assertRaises(CommandError) as ctx:
                call_command('genrank_pipeline', config=config, base_url=server.base_url, stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)
