from django.test import SimpleTestCase
from hypothesis import given, settings as hypothesis_settings, strategies as st

from genrankbench.testing import CountingBackend, ScriptedBackend, assert_valid_ranking, synthetic_collection
from rerank.backends import OracleBackend
from rerank.exceptions import EndpointError, RerankError
from rerank.rerankers import (
    GenerativeReranker,
    RerankerConfig,
    RerankStats,
    estimate_calls,
    rerank_listwise_sliding,
    rerank_pairwise_allpairs,
    rerank_pointwise,
    window_starts,
)
from retrieval.index import BM25Params, build_index, get_text, retrieve
from retrieval.types import Query, ranking_from_order

QUERY = Query('q1', 'anything')


def texts_for(doc_ids):
    return {doc_id: f'text of {doc_id}' for doc_id in doc_ids}


def oracle(grades):
    return OracleBackend(grade_lookup=grades)


class WindowStartTests(SimpleTestCase):
    def test_single_window_when_head_fits(self):
        self.assertEqual(window_starts(3, 20, 10), [0])
        self.assertEqual(window_starts(20, 20, 10), [0])

    def test_back_to_front(self):
        self.assertEqual(window_starts(4, 2, 1), [2, 1, 0])
        self.assertEqual(window_starts(50, 20, 10), [30, 20, 10, 0])
        self.assertEqual(window_starts(25, 20, 10), [5, 0])


class PointwiseTests(SimpleTestCase):
    def test_sorted_by_grade(self):
        ranking = ranking_from_order('q1', ['d1', 'd2'])
        result = rerank_pointwise(oracle({'d1': 1, 'd2': 3}), QUERY, ranking, texts_for(['d1', 'd2']),
                                  RerankerConfig(strategy='pointwise'))
        self.assertEqual(result.doc_ids, ('d2', 'd1'))

    def test_equal_grades_keep_order(self):
        doc_ids = ['d1', 'd2', 'd3']
        ranking = ranking_from_order('q1', doc_ids)
        result = rerank_pointwise(oracle(dict.fromkeys(doc_ids, 1)), QUERY, ranking, texts_for(doc_ids),
                                  RerankerConfig(strategy='pointwise'))
        self.assertEqual(result.doc_ids, tuple(doc_ids))

    def test_depth_limits_calls_and_tail_stays(self):
        doc_ids = [f'd{i:02d}' for i in range(1, 31)]
        grades = {doc_id: i % 4 for i, doc_id in enumerate(doc_ids)}
        backend = CountingBackend(oracle(grades))
        result = rerank_pointwise(backend, QUERY, ranking_from_order('q1', doc_ids), texts_for(doc_ids),
                                  RerankerConfig(strategy='pointwise', rerank_depth=10))
        self.assertEqual(backend.calls, 10)
        self.assertEqual(result.doc_ids[10:], tuple(doc_ids[10:]))
        assert_valid_ranking(self, result)

    def test_unparseable_grade_is_zero(self):
        stats = RerankStats()
        backend = ScriptedBackend('no idea')
        doc_ids = ['d1', 'd2']
        result = rerank_pointwise(backend, QUERY, ranking_from_order('q1', doc_ids), texts_for(doc_ids),
                                  RerankerConfig(strategy='pointwise'), stats=stats)
        self.assertEqual(result.doc_ids, ('d1', 'd2'))
        self.assertEqual(stats.unparseable, 2)

    def test_concurrency_bounded_by_backend(self):
        doc_ids = [f'd{i}' for i in range(12)]
        backend = CountingBackend(oracle({}), delay=0.01, max_in_flight=3)
        rerank_pointwise(backend, QUERY, ranking_from_order('q1', doc_ids), texts_for(doc_ids),
                         RerankerConfig(strategy='pointwise'))
        self.assertEqual(backend.calls, 12)
        self.assertLessEqual(backend.peak_in_flight, 3)

    def test_backend_failure_names_query_and_doc(self):
        backend = ScriptedBackend(error=EndpointError(401, 'denied'))
        with self.assertRaises(RerankError) as ctx:
            rerank_pointwise(backend, QUERY, ranking_from_order('q1', ['d1']), texts_for(['d1']),
                             RerankerConfig(strategy='pointwise'))
        self.assertIn('q1', str(ctx.exception))
        self.assertIn('d1', str(ctx.exception))


class PairwiseTests(SimpleTestCase):
    def test_all_pairs_example(self):
        doc_ids = ['d1', 'd2', 'd3']
        backend = CountingBackend(oracle({'d1': 0, 'd2': 2, 'd3': 1}))
        result = rerank_pairwise_allpairs(backend, QUERY, ranking_from_order('q1', doc_ids), texts_for(doc_ids),
                                          RerankerConfig(strategy='pairwise'))
        self.assertEqual(result.doc_ids, ('d2', 'd3', 'd1'))
        self.assertEqual(backend.calls, 6)

    def test_two_docs_two_calls(self):
        backend = CountingBackend(oracle({'d1': 0, 'd2': 1}))
        result = rerank_pairwise_allpairs(backend, QUERY, ranking_from_order('q1', ['d1', 'd2']),
                                          texts_for(['d1', 'd2']), RerankerConfig(strategy='pairwise'))
        self.assertEqual(backend.calls, 2)
        self.assertEqual(result.doc_ids, ('d2', 'd1'))

    def test_both_orders_are_asked(self):
        backend = CountingBackend(oracle({}))
        rerank_pairwise_allpairs(backend, QUERY, ranking_from_order('q1', ['d1', 'd2']),
                                 texts_for(['d1', 'd2']), RerankerConfig(strategy='pairwise'))
        self.assertEqual(sorted(request.doc_ids for request in backend.requests), [('d1', 'd2'), ('d2', 'd1')])

    def test_equal_grades_keep_order(self):
        doc_ids = ['d1', 'd2', 'd3', 'd4']
        result = rerank_pairwise_allpairs(oracle(dict.fromkeys(doc_ids, 2)), QUERY, ranking_from_order('q1', doc_ids),
                                          texts_for(doc_ids), RerankerConfig(strategy='pairwise'))
        self.assertEqual(result.doc_ids, tuple(doc_ids))

    def test_unparseable_counts_for_a(self):
        stats = RerankStats()
        doc_ids = ['d1', 'd2', 'd3']
        result = rerank_pairwise_allpairs(ScriptedBackend('maybe?'), QUERY, ranking_from_order('q1', doc_ids),
                                          texts_for(doc_ids), RerankerConfig(strategy='pairwise'), stats=stats)
        self.assertEqual(result.doc_ids, tuple(doc_ids))
        self.assertEqual(stats.unparseable, 6)

    def test_single_doc_untouched(self):
        backend = CountingBackend(oracle({}))
        ranking = ranking_from_order('q1', ['d1'])
        result = rerank_pairwise_allpairs(backend, QUERY, ranking, texts_for(['d1']), RerankerConfig(strategy='pairwise'))
        self.assertEqual(result, ranking)
        self.assertEqual(backend.calls, 0)


class ListwiseTests(SimpleTestCase):
    def test_single_window_sort(self):
        backend = CountingBackend(oracle({'a': 1, 'b': 3, 'c': 2}))
        result = rerank_listwise_sliding(backend, QUERY, ranking_from_order('q1', ['a', 'b', 'c']),
                                         texts_for('abc'), RerankerConfig(window_size=20, stride=10))
        self.assertEqual(result.doc_ids, ('b', 'c', 'a'))
        self.assertEqual(backend.calls, 1)

    def test_windows_slide_back_to_front(self):
        doc_ids = ['d1', 'd2', 'd3', 'd4']
        backend = CountingBackend(oracle({'d1': 0, 'd2': 1, 'd3': 2, 'd4': 3}))
        result = rerank_listwise_sliding(backend, QUERY, ranking_from_order('q1', doc_ids), texts_for(doc_ids),
                                         RerankerConfig(window_size=2, stride=1))
        self.assertEqual(backend.calls, 3)
        self.assertEqual([request.doc_ids for request in backend.requests],
                         [('d3', 'd4'), ('d2', 'd4'), ('d1', 'd4')])
        self.assertEqual(result.doc_ids, ('d4', 'd1', 'd2', 'd3'))

    def test_more_passes_finish_the_sort(self):
        doc_ids = ['d1', 'd2', 'd3', 'd4']
        result = rerank_listwise_sliding(oracle({'d1': 0, 'd2': 1, 'd3': 2, 'd4': 3}), QUERY,
                                         ranking_from_order('q1', doc_ids), texts_for(doc_ids),
                                         RerankerConfig(window_size=2, stride=1, passes=3))
        self.assertEqual(result.doc_ids, ('d4', 'd3', 'd2', 'd1'))

    def test_unparseable_window_kept(self):
        stats = RerankStats()
        doc_ids = ['d1', 'd2', 'd3']
        result = rerank_listwise_sliding(ScriptedBackend('I cannot rank these.'), QUERY,
                                         ranking_from_order('q1', doc_ids), texts_for(doc_ids),
                                         RerankerConfig(), stats=stats)
        self.assertEqual(result.doc_ids, tuple(doc_ids))
        self.assertEqual(stats.unparseable, 1)

    def test_backend_failure_names_window(self):
        backend = ScriptedBackend(error=EndpointError(403, 'nope'))
        with self.assertRaises(RerankError) as ctx:
            rerank_listwise_sliding(backend, QUERY, ranking_from_order('q1', ['d1', 'd2']), texts_for(['d1', 'd2']),
                                    RerankerConfig())
        self.assertIn('window start 0', str(ctx.exception))

    def test_missing_texts(self):
        with self.assertRaises(ValueError):
            rerank_listwise_sliding(oracle({}), QUERY, ranking_from_order('q1', ['d1', 'd2']), {'d1': 'x'},
                                    RerankerConfig())

    @hypothesis_settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(min_value=0, max_value=3), min_size=2, max_size=20))
    def test_one_window_sorts_by_grade(self, grade_list):
        doc_ids = [f'd{i:02d}' for i in range(len(grade_list))]
        grades = dict(zip(doc_ids, grade_list))
        result = rerank_listwise_sliding(oracle(grades), QUERY, ranking_from_order('q1', doc_ids), texts_for(doc_ids),
                                         RerankerConfig(window_size=20, stride=10))
        expected = sorted(doc_ids, key=lambda doc_id: (-grades[doc_id], doc_ids.index(doc_id)))
        self.assertEqual(list(result.doc_ids), expected)


class CallCountTests(SimpleTestCase):
    """Counted calls match both the closed forms and estimate_calls."""

    def run_strategy(self, function, m, cfg):
        doc_ids = [f'd{i:02d}' for i in range(m)]
        backend = CountingBackend(oracle({doc_id: i % 4 for i, doc_id in enumerate(doc_ids)}))
        function(backend, QUERY, ranking_from_order('q1', doc_ids), texts_for(doc_ids), cfg)
        return backend.calls

    def test_pointwise(self):
        for m in (2, 5, 20):
            cfg = RerankerConfig(strategy='pointwise')
            self.assertEqual(self.run_strategy(rerank_pointwise, m, cfg), m)
            self.assertEqual(estimate_calls(cfg, m), m)

    def test_pairwise(self):
        for m in (2, 5, 20):
            cfg = RerankerConfig(strategy='pairwise')
            self.assertEqual(self.run_strategy(rerank_pairwise_allpairs, m, cfg), m * (m - 1))
            self.assertEqual(estimate_calls(cfg, m), m * (m - 1))

    def test_listwise(self):
        expected = {
            (2, 2, 1): 1, (5, 2, 1): 4, (20, 2, 1): 19,
            (2, 20, 10): 1, (5, 20, 10): 1, (20, 20, 10): 1, (50, 20, 10): 4,
        }
        for (m, w, s), calls in expected.items():
            with self.subTest(m=m, w=w, s=s):
                cfg = RerankerConfig(window_size=w, stride=s)
                self.assertEqual(self.run_strategy(rerank_listwise_sliding, m, cfg), calls)
                self.assertEqual(estimate_calls(cfg, m), calls)


class StrategyAgreementTests(SimpleTestCase):
    def test_oracle_strategies_agree_on_head(self):
        collection = synthetic_collection()
        index = build_index(collection.documents)
        backend = OracleBackend(qrels=collection.qrels)
        for query in collection.queries:
            ranking = retrieve(index, BM25Params(), query, k=50)
            texts = dict(get_text(index, ranking))
            heads = {}
            for strategy in ('pointwise', 'pairwise', 'listwise'):
                cfg = RerankerConfig(strategy=strategy, rerank_depth=10, window_size=20, stride=10)
                outcome = GenerativeReranker(backend, cfg).rerank(query, ranking, texts)
                assert_valid_ranking(self, outcome.ranking)
                heads[strategy] = outcome.ranking.doc_ids[:10]
            self.assertEqual(heads['pointwise'], heads['pairwise'])
            self.assertEqual(heads['pointwise'], heads['listwise'])


class GenerativeRerankerTests(SimpleTestCase):
    def test_metadata(self):
        reranker = GenerativeReranker(oracle({'d1': 1}), RerankerConfig(window_size=20, stride=10))
        outcome = reranker.rerank(QUERY, ranking_from_order('q1', ['d1', 'd2']), texts_for(['d1', 'd2']))
        metadata = reranker.metadata('q1', outcome.stats)
        self.assertEqual(metadata['window_size'], 20)
        self.assertEqual(metadata['stride'], 10)
        self.assertEqual(metadata['strategy'], 'listwise')
        self.assertEqual(metadata['prompt_version'], 'v1')
        self.assertEqual(metadata['backend'], 'oracle')
        self.assertEqual(metadata['calls'], 1)

    def test_config_validation(self):
        with self.assertRaises(ValueError):
            RerankerConfig(strategy='setwise')
        with self.assertRaises(ValueError):
            RerankerConfig(window_size=10, stride=11)

    def test_listwise_window_bounds(self):
        for window_size in (1, 101):
            with self.subTest(window_size=window_size):
                with self.assertRaises(ValueError):
                    RerankerConfig(strategy='listwise', window_size=window_size, stride=1)
        self.assertEqual(RerankerConfig(strategy='listwise', window_size=100, stride=10).window_size, 100)
        self.assertEqual(RerankerConfig(strategy='pointwise', window_size=101, stride=1).window_size, 101)
