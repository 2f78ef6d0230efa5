"""
Value types shared by every stage: queries, documents, rankings and qrels.

All of them are frozen after construction and validate their invariants in
``__post_init__``, so any Ranking that exists is a valid one.
"""
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterator, Mapping, Optional, Sequence, Tuple

from .exceptions import RankingInvariantError


def _has_whitespace(value: str) -> bool:
    return any(ch.isspace() for ch in value)


@dataclass(frozen=True)
class Query:
    id: str
    text: str

    def __post_init__(self):
        if not self.id or _has_whitespace(self.id):
            raise ValueError(f"query id must be non-empty without whitespace: {self.id!r}")
        if not self.text.strip():
            raise ValueError(f"query {self.id} has empty text")


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    title: Optional[str] = None

    def __post_init__(self):
        if not self.id or _has_whitespace(self.id):
            raise ValueError(f"document id must be non-empty without whitespace: {self.id!r}")


@dataclass(frozen=True)
class ScoredDoc:
    doc_id: str
    score: float
    rank: int


@dataclass(frozen=True)
class Ranking:
    query_id: str
    entries: Tuple[ScoredDoc, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'entries', tuple(self.entries))
        validate_ranking(self)

    def __len__(self):
        return len(self.entries)

    def __iter__(self) -> Iterator[ScoredDoc]:
        return iter(self.entries)

    @property
    def doc_ids(self) -> Tuple[str, ...]:
        return tuple(entry.doc_id for entry in self.entries)


def validate_ranking(ranking: Ranking) -> None:
    """Raise RankingInvariantError unless ids are unique, scores finite and
    non-increasing, and ranks run 1..n."""
    seen = set()
    previous = math.inf
    for position, entry in enumerate(ranking.entries, start=1):
        if entry.doc_id in seen:
            raise RankingInvariantError(
                f"query {ranking.query_id}: duplicate doc id {entry.doc_id}"
            )
        seen.add(entry.doc_id)
        if not math.isfinite(entry.score):
            raise RankingInvariantError(
                f"query {ranking.query_id}: non-finite score for {entry.doc_id}"
            )
        if entry.score > previous:
            raise RankingInvariantError(
                f"query {ranking.query_id}: score increases at rank {position}"
            )
        if entry.rank != position:
            raise RankingInvariantError(
                f"query {ranking.query_id}: expected rank {position}, got {entry.rank}"
            )
        previous = entry.score


def ranking_from_order(query_id: str, doc_ids: Sequence[str]) -> Ranking:
    """Ranking over ``doc_ids`` in the given order with synthetic scores n, n-1, ..., 1."""
    total = len(doc_ids)
    return Ranking(
        query_id=query_id,
        entries=tuple(
            ScoredDoc(doc_id=doc_id, score=float(total - position), rank=position + 1)
            for position, doc_id in enumerate(doc_ids)
        ),
    )


@dataclass(frozen=True)
class Qrels:
    """Graded judgments keyed by (query id, doc id)."""

    judgments: Mapping[Tuple[str, str], int] = field(default_factory=dict)

    def __post_init__(self):
        for (query_id, doc_id), grade in self.judgments.items():
            if grade < 0:
                raise ValueError(f"negative grade {grade} for ({query_id}, {doc_id})")

    @cached_property
    def by_query(self) -> Dict[str, Dict[str, int]]:
        grouped: Dict[str, Dict[str, int]] = {}
        for (query_id, doc_id), grade in self.judgments.items():
            grouped.setdefault(query_id, {})[doc_id] = grade
        return grouped

    def has_query(self, query_id: str) -> bool:
        return query_id in self.by_query

    def grade(self, query_id: str, doc_id: str) -> int:
        # unjudged pairs read as 0; use has_query to tell an absent query apart
        return self.judgments.get((query_id, doc_id), 0)

    def for_query(self, query_id: str) -> Dict[str, int]:
        return dict(self.by_query.get(query_id, {}))

    @property
    def query_ids(self) -> Tuple[str, ...]:
        return tuple(sorted(self.by_query))
