"""
Inverted index and BM25 scoring for first-stage retrieval.

BM25 here uses the non-negative idf ``ln((N - df + 0.5) / (df + 0.5) + 1)``,
no stemming and no stopwords.
"""
import json
import logging
import math
import re
from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

from django.conf import settings

from .exceptions import IndexBuildError, IndexFormatError, UnknownDocumentError
from .trec import ranking_from_scores, top_k
from .types import Document, Query, Ranking

logger = logging.getLogger(__name__)

INDEX_FORMAT = 'genrank-index'
INDEX_VERSION = 1

_SPLIT = re.compile(r'[\W_]+')


def tokenize(text: str) -> List[str]:
    return [token for token in _SPLIT.split(text.lower()) if token]


@dataclass(frozen=True)
class BM25Params:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self):
        if self.k1 < 0:
            raise ValueError(f"k1 must be >= 0, got {self.k1}")
        if not 0 <= self.b <= 1:
            raise ValueError(f"b must be in [0, 1], got {self.b}")

    @classmethod
    def from_settings(cls) -> 'BM25Params':
        return cls(k1=settings.GENRANK['BM25_K1'], b=settings.GENRANK['BM25_B'])


@dataclass(frozen=True)
class InvertedIndex:
    postings: Mapping[str, Tuple[Tuple[str, int], ...]]
    doc_lengths: Mapping[str, int]
    num_docs: int
    avg_doc_length: float
    doc_store: Mapping[str, Document]

    @property
    def vocabulary_size(self) -> int:
        return len(self.postings)

    def df(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    def tf(self, term: str, doc_id: str) -> int:
        plist = self.postings.get(term, ())
        position = bisect_left(plist, (doc_id,))
        if position < len(plist) and plist[position][0] == doc_id:
            return plist[position][1]
        return 0

    def idf(self, term: str) -> float:
        df = self.df(term)
        return math.log((self.num_docs - df + 0.5) / (df + 0.5) + 1)


def build_index(corpus: Iterable[Document]) -> InvertedIndex:
    doc_store: Dict[str, Document] = {}
    for document in corpus:
        if document.id in doc_store:
            raise IndexBuildError(f"duplicate document id: {document.id}")
        doc_store[document.id] = document
    if not doc_store:
        raise IndexBuildError("cannot index an empty corpus")

    postings: Dict[str, List[Tuple[str, int]]] = {}
    doc_lengths: Dict[str, int] = {}
    # sorted ids make postings order independent of insertion order
    for doc_id in sorted(doc_store):
        tokens = tokenize(doc_store[doc_id].text)
        doc_lengths[doc_id] = len(tokens)
        for term, count in Counter(tokens).items():
            postings.setdefault(term, []).append((doc_id, count))

    num_docs = len(doc_lengths)
    avg_doc_length = sum(doc_lengths.values()) / num_docs
    if avg_doc_length <= 0:
        raise IndexBuildError("every document is empty; average document length is 0")

    logger.info("built index num_docs=%d avgdl=%.4f vocabulary=%d", num_docs, avg_doc_length, len(postings))
    return InvertedIndex(
        postings={term: tuple(plist) for term, plist in sorted(postings.items())},
        doc_lengths=doc_lengths,
        num_docs=num_docs,
        avg_doc_length=avg_doc_length,
        doc_store={doc_id: doc_store[doc_id] for doc_id in sorted(doc_store)},
    )


def _term_weight(index: InvertedIndex, params: BM25Params, tf: int, doc_id: str) -> float:
    norm = 1 - params.b + params.b * index.doc_lengths[doc_id] / index.avg_doc_length
    return tf * (params.k1 + 1) / (tf + params.k1 * norm)


def bm25_score(index: InvertedIndex, params: BM25Params, query_terms: Sequence[str], doc_id: str) -> float:
    if doc_id not in index.doc_lengths:
        raise UnknownDocumentError(doc_id)
    score = 0.0
    for term in dict.fromkeys(query_terms):
        tf = index.tf(term, doc_id)
        if tf:
            score += index.idf(term) * _term_weight(index, params, tf, doc_id)
    return score


def retrieve(index: InvertedIndex, params: BM25Params, query: Query, k: int) -> Ranking:
    scores: Dict[str, float] = {}
    for term in dict.fromkeys(tokenize(query.text)):
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = index.idf(term)
        for doc_id, tf in plist:
            scores[doc_id] = scores.get(doc_id, 0.0) + idf * _term_weight(index, params, tf, doc_id)
    matched = {doc_id: score for doc_id, score in scores.items() if score > 0}
    return top_k(ranking_from_scores(query.id, matched), k)


def get_text(index: InvertedIndex, ranking: Ranking) -> List[Tuple[str, str]]:
    texts = []
    for doc_id in ranking.doc_ids:
        document = index.doc_store.get(doc_id)
        if document is None:
            raise UnknownDocumentError(doc_id)
        texts.append((doc_id, document.text))
    return texts


def save_index(index: InvertedIndex, path: Union[str, Path]) -> None:
    payload = {
        'format': INDEX_FORMAT,
        'version': INDEX_VERSION,
        'num_docs': index.num_docs,
        'avg_doc_length': index.avg_doc_length,
        'documents': [
            {'id': doc.id, 'text': doc.text, 'title': doc.title}
            for doc in index.doc_store.values()
        ],
        'doc_lengths': dict(index.doc_lengths),
        'postings': {term: [list(pair) for pair in plist] for term, plist in index.postings.items()},
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, ensure_ascii=False), encoding='utf-8')


def load_index(path: Union[str, Path]) -> InvertedIndex:
    try:
        payload = json.loads(Path(path).read_text(encoding='utf-8'))
    except json.JSONDecodeError as exc:
        raise IndexFormatError(f"{path}: not a JSON index file ({exc})") from exc
    if not isinstance(payload, dict) or payload.get('format') != INDEX_FORMAT:
        raise IndexFormatError(f"{path}: not a {INDEX_FORMAT} file")
    if payload.get('version') != INDEX_VERSION:
        raise IndexFormatError(
            f"{path}: index version {payload.get('version')} unsupported (expected {INDEX_VERSION})"
        )
    try:
        return InvertedIndex(
            postings={
                term: tuple((doc_id, int(tf)) for doc_id, tf in plist)
                for term, plist in payload['postings'].items()
            },
            doc_lengths={doc_id: int(length) for doc_id, length in payload['doc_lengths'].items()},
            num_docs=int(payload['num_docs']),
            avg_doc_length=float(payload['avg_doc_length']),
            doc_store={
                item['id']: Document(id=item['id'], text=item['text'], title=item.get('title'))
                for item in payload['documents']
            },
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise IndexFormatError(f"{path}: malformed index ({exc})") from exc
