"""
Helpers shared by the app test suites: a synthetic corpus with known
relevance, a call-counting backend and a scripted OpenAI-style HTTP server.
"""
import json
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Dict, List, Optional, Sequence, Tuple

from rerank.backends import ChatBackend
from rerank.chat import ChatRequest, ChatResponse
from retrieval.types import Document, Qrels, Query, Ranking


@dataclass
class SyntheticCollection:
    documents: List[Document]
    queries: List[Query]
    qrels: Qrels


def synthetic_collection(num_docs: int = 50, num_queries: int = 10) -> SyntheticCollection:
    """
    Document j is about topic ``j % num_queries`` and every document shares
    the word "common", so BM25 retrieves the whole corpus for every query.
    Grades within a topic cycle 3, 2, 1, 0 so that first-stage order and
    relevance order disagree.
    """
    documents, judgments = [], {}
    for j in range(num_docs):
        topic = j % num_queries
        words = ['common', *(f'filler{j}w{n}' for n in range(j % 7)), f'topic{topic}', f'passage{j}']
        documents.append(Document(id=f'd{j:03d}', text=' '.join(words)))
        grade = (3, 2, 1, 0)[(j // num_queries) % 4]
        judgments[(f'q{topic}', f'd{j:03d}')] = grade
    queries = [Query(id=f'q{i}', text=f'topic{i} common') for i in range(num_queries)]
    return SyntheticCollection(documents=documents, queries=queries, qrels=Qrels(judgments=judgments))


class CountingBackend(ChatBackend):
    """Delegates to another backend and records calls and peak concurrency."""

    name = 'counting'

    def __init__(self, inner: ChatBackend, delay: float = 0.0, max_in_flight: int = 1):
        self.inner = inner
        self.delay = delay
        self.max_in_flight = max_in_flight
        self.requests: List[ChatRequest] = []
        self.peak_in_flight = 0
        self._in_flight = 0
        self._lock = threading.Lock()

    @property
    def calls(self) -> int:
        return len(self.requests)

    def complete(self, request: ChatRequest) -> ChatResponse:
        with self._lock:
            self.requests.append(request)
            self._in_flight += 1
            self.peak_in_flight = max(self.peak_in_flight, self._in_flight)
        try:
            if self.delay:
                time.sleep(self.delay)
            return self.inner.complete(request)
        finally:
            with self._lock:
                self._in_flight -= 1


class ScriptedBackend(ChatBackend):
    """Answers every request with the same text, or raises ``error``."""

    name = 'scripted'

    def __init__(self, answer: str = '', error: Optional[Exception] = None):
        self.answer = answer
        self.error = error
        self.calls = 0

    def complete(self, request: ChatRequest) -> ChatResponse:
        self.calls += 1
        if self.error is not None:
            raise self.error
        return ChatResponse(content=self.answer)


@dataclass(frozen=True)
class TruncatedBody:
    """Advertises ``declared_length`` bytes but sends only ``payload`` before closing."""

    payload: bytes
    declared_length: int


def completion_body(content: str, prompt_tokens: int = 10, completion_tokens: int = 2) -> dict:
    return {
        'choices': [{'index': 0, 'message': {'role': 'assistant', 'content': content}}],
        'usage': {'prompt_tokens': prompt_tokens, 'completion_tokens': completion_tokens},
    }


class FakeChatServer:
    """
    Local OpenAI-compatible endpoint. ``script`` is consumed one entry per
    request as ``(status, body)``; once exhausted, ``default`` answers.
    """

    def __init__(self, script: Sequence[Tuple[int, object]] = (),
                 default: Tuple[int, object] = (200, completion_body('A')), delay: float = 0.0):
        self.script = list(script)
        self.default = default
        self.delay = delay
        self.received: List[Dict] = []
        self.peak_in_flight = 0
        self._in_flight = 0
        self._lock = threading.Lock()
        self._server = ThreadingHTTPServer(('127.0.0.1', 0), self._handler())
        self._server.daemon_threads = True
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def base_url(self) -> str:
        host, port = self._server.server_address[:2]
        return f'http://{host}:{port}'

    @property
    def request_count(self) -> int:
        return len(self.received)

    def __enter__(self):
        self._thread.start()
        return self

    def __exit__(self, *exc_info):
        self._server.shutdown()
        self._server.server_close()

    def _next(self) -> Tuple[int, object]:
        with self._lock:
            return self.script.pop(0) if self.script else self.default

    def _handler(self):
        server = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get('Content-Length') or 0)
                raw = self.rfile.read(length)
                with server._lock:
                    server.received.append({
                        'path': self.path,
                        'headers': dict(self.headers),
                        'raw': raw,
                        'json': json.loads(raw),
                    })
                    server._in_flight += 1
                    server.peak_in_flight = max(server.peak_in_flight, server._in_flight)
                try:
                    if server.delay:
                        time.sleep(server.delay)
                    status, body = server._next()
                    if isinstance(body, TruncatedBody):
                        payload, length = body.payload, body.declared_length
                    else:
                        payload = body if isinstance(body, bytes) else json.dumps(body).encode('utf-8')
                        length = len(payload)
                    self.send_response(status)
                    self.send_header('Content-Type', 'application/json')
                    self.send_header('Content-Length', str(length))
                    self.end_headers()
                    self.wfile.write(payload)
                finally:
                    with server._lock:
                        server._in_flight -= 1

            def log_message(self, format, *args):
                pass

        return Handler


def assert_valid_ranking(testcase, ranking: Ranking) -> None:
    doc_ids = ranking.doc_ids
    testcase.assertEqual(len(doc_ids), len(set(doc_ids)))
    testcase.assertEqual([entry.rank for entry in ranking], list(range(1, len(ranking) + 1)))
    scores = [entry.score for entry in ranking]
    testcase.assertEqual(scores, sorted(scores, reverse=True))
