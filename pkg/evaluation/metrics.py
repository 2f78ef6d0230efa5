"""
nDCG@k with the usual TREC conventions: gain 2^g - 1, discount log2(i + 1),
ideal DCG over every judged document of the query. Queries without a
single positive judgment are skipped rather than scored 0.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

from retrieval.types import Qrels, Ranking

from .exceptions import EvaluationError


@dataclass(frozen=True)
class EvalResult:
    per_query: Dict[str, float]
    mean: Optional[float]
    k: int
    skipped_queries: List[str] = field(default_factory=list)

    @property
    def evaluated(self) -> int:
        return len(self.per_query)


def dcg_at_k(grades: Sequence[int], k: int) -> float:
    if k < 1:
        raise EvaluationError(f"k must be >= 1, got {k}")
    if any(grade < 0 for grade in grades):
        raise EvaluationError(f"negative grade in {list(grades)[:10]}")
    return float(sum(
        (2 ** grade - 1) / math.log2(position + 1)
        for position, grade in enumerate(grades[:k], start=1)
    ))


def ndcg_at_k(ranking: Ranking, qrels: Qrels, k: int) -> Optional[float]:
    """nDCG@k for one ranking, or None when the query has nothing relevant to find."""
    judged = qrels.for_query(ranking.query_id)
    ideal = sorted((grade for grade in judged.values() if grade > 0), reverse=True)
    if not ideal:
        return None
    gains = [judged.get(doc_id, 0) for doc_id in ranking.doc_ids]
    return dcg_at_k(gains, k) / dcg_at_k(ideal, k)


def mean_ndcg(rankings: Iterable[Ranking], qrels: Qrels, k: int) -> EvalResult:
    per_query: Dict[str, float] = {}
    skipped: List[str] = []
    seen = set()
    for ranking in rankings:
        if ranking.query_id in seen:
            raise EvaluationError(f"duplicate ranking for query {ranking.query_id}")
        seen.add(ranking.query_id)
        value = ndcg_at_k(ranking, qrels, k)
        if value is None:
            skipped.append(ranking.query_id)
        else:
            per_query[ranking.query_id] = value
    mean = sum(per_query.values()) / len(per_query) if per_query else None
    return EvalResult(per_query=per_query, mean=mean, k=k, skipped_queries=skipped)
