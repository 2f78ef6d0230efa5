"""
TREC run and qrels formats, plus the ranking helpers built on them.

Run lines:    ``qid Q0 docid rank score tag``
Qrels lines:  ``qid 0 docid grade``
Queries TSV:  ``qid<TAB>text``
"""
import math
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Mapping, Tuple, Union

from .exceptions import DuplicateEntryError, TrecFormatError
from .types import Qrels, Query, Ranking, ScoredDoc

SCORE_DECIMALS = 6


def _numbered_lines(text: str) -> Iterator[Tuple[int, str]]:
    # splitlines also swallows \r\n
    for line_no, line in enumerate(text.splitlines(), start=1):
        if line.strip():
            yield line_no, line


def parse_trec_run(text: str) -> List[Ranking]:
    rows: Dict[str, List[Tuple[float, int, str]]] = {}
    seen = set()
    for line_no, line in _numbered_lines(text):
        parts = line.split()
        if len(parts) != 6:
            raise TrecFormatError(line_no, f"expected 6 fields, got {len(parts)}")
        query_id, _q0, doc_id, rank_field, score_field, _tag = parts
        try:
            rank = int(rank_field)
        except ValueError:
            raise TrecFormatError(line_no, f"unparseable rank {rank_field!r}") from None
        try:
            score = float(score_field)
        except ValueError:
            raise TrecFormatError(line_no, f"unparseable score {score_field!r}") from None
        if not math.isfinite(score):
            raise TrecFormatError(line_no, f"non-finite score {score_field!r}")
        if (query_id, doc_id) in seen:
            raise DuplicateEntryError(f"line {line_no}: duplicate entry ({query_id}, {doc_id})")
        seen.add((query_id, doc_id))
        rows.setdefault(query_id, []).append((score, rank, doc_id))

    rankings = []
    for query_id, entries in rows.items():
        entries.sort(key=lambda row: (-row[0], row[1], row[2]))
        rankings.append(Ranking(
            query_id=query_id,
            entries=tuple(
                ScoredDoc(doc_id=doc_id, score=score, rank=position)
                for position, (score, _rank, doc_id) in enumerate(entries, start=1)
            ),
        ))
    return rankings


def write_trec_run(rankings: Iterable[Ranking], tag: str) -> str:
    if not tag or any(ch.isspace() for ch in tag):
        raise ValueError(f"run tag must be non-empty without whitespace: {tag!r}")
    lines = []
    for ranking in rankings:
        for entry in ranking.entries:
            lines.append(
                f"{ranking.query_id} Q0 {entry.doc_id} {entry.rank} "
                f"{entry.score:.{SCORE_DECIMALS}f} {tag}\n"
            )
    return ''.join(lines)


def parse_qrels(text: str) -> Qrels:
    judgments: Dict[Tuple[str, str], int] = {}
    for line_no, line in _numbered_lines(text):
        parts = line.split()
        if len(parts) != 4:
            raise TrecFormatError(line_no, f"expected 4 fields, got {len(parts)}")
        query_id, _iteration, doc_id, grade_field = parts
        try:
            grade = int(grade_field)
        except ValueError:
            raise TrecFormatError(line_no, f"unparseable grade {grade_field!r}") from None
        if grade < 0:
            raise TrecFormatError(line_no, f"negative grade {grade}")
        # last line for a pair wins
        judgments[(query_id, doc_id)] = grade
    return Qrels(judgments=judgments)


def parse_queries(text: str) -> List[Query]:
    queries = []
    seen = set()
    for line_no, line in _numbered_lines(text):
        if '\t' not in line:
            raise TrecFormatError(line_no, "expected 'qid<TAB>text'")
        query_id, query_text = line.split('\t', 1)
        query_id = query_id.strip()
        if query_id in seen:
            raise DuplicateEntryError(f"line {line_no}: duplicate query id {query_id}")
        seen.add(query_id)
        try:
            queries.append(Query(id=query_id, text=query_text.strip()))
        except ValueError as exc:
            raise TrecFormatError(line_no, str(exc)) from None
    return queries


def ranking_from_scores(query_id: str, scores: Mapping[str, float]) -> Ranking:
    for doc_id, score in scores.items():
        if not math.isfinite(score):
            raise ValueError(f"non-finite score {score!r} for {doc_id}")
    ordered = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return Ranking(
        query_id=query_id,
        entries=tuple(
            ScoredDoc(doc_id=doc_id, score=float(score), rank=position)
            for position, (doc_id, score) in enumerate(ordered, start=1)
        ),
    )


def top_k(ranking: Ranking, k: int) -> Ranking:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return Ranking(query_id=ranking.query_id, entries=ranking.entries[:k])


def read_text(path: Union[str, Path]) -> str:
    return Path(path).read_text(encoding='utf-8')


def write_text(path: Union[str, Path], text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8', newline='\n') as handle:
        handle.write(text)
