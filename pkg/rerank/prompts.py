"""
Prompt builders for pointwise, pairwise and listwise reranking.

Wording comes from the versioned template files in ``prompt_templates/<version>/``;
the version string is recorded with every reranked query.
"""
import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence, Tuple

from django.conf import settings

from retrieval.types import Document, Query

from .chat import ChatMessage, ChatRequest, estimate_tokens
from .exceptions import PromptError

POINTWISE = 'pointwise'
PAIRWISE = 'pairwise'
LISTWISE = 'listwise'

# instructions every template set must contain verbatim; backends that
# answer from ground truth use them to recognize the prompt shape
POINTWISE_INSTRUCTION = 'Output only an integer from 0 to 3.'
PAIRWISE_INSTRUCTION = 'Output only the letter A or B.'
LISTWISE_INSTRUCTION = 'in the exact format [i] > [j] > ... and nothing else.'

MAX_WINDOW = 100
ELLIPSIS = '…'

_WHITESPACE = re.compile(r'\s+')

_TEMPLATE_FILES = {
    POINTWISE: ('pointwise_system.txt', 'pointwise_user.txt', POINTWISE_INSTRUCTION),
    PAIRWISE: ('pairwise_system.txt', 'pairwise_user.txt', PAIRWISE_INSTRUCTION),
    LISTWISE: ('listwise_system.txt', 'listwise_user.txt', LISTWISE_INSTRUCTION),
}


@dataclass(frozen=True)
class TruncationPolicy:
    max_doc_tokens: int = 300

    def __post_init__(self):
        if self.max_doc_tokens < 1:
            raise ValueError(f"max_doc_tokens must be >= 1, got {self.max_doc_tokens}")


@dataclass(frozen=True)
class PromptBundle:
    kind: str
    messages: Tuple[ChatMessage, ...]
    window_doc_ids: Tuple[str, ...] = ()
    query_id: Optional[str] = None
    # every document shown in the prompt, in prompt order
    doc_ids: Tuple[str, ...] = field(default=())

    def to_request(self, model: str, temperature: float = 0.0, max_tokens: int = 64) -> ChatRequest:
        return ChatRequest(
            model=model,
            messages=self.messages,
            temperature=temperature,
            max_tokens=max_tokens,
            query_id=self.query_id,
            doc_ids=self.doc_ids,
        )


@dataclass(frozen=True)
class PromptTemplateSet:
    version: str
    templates: dict

    def render(self, kind: str, **values) -> Tuple[ChatMessage, ChatMessage]:
        system, user = self.templates[kind]
        return (
            ChatMessage(role='system', content=system),
            ChatMessage(role='user', content=user.format(**values)),
        )


@lru_cache(maxsize=None)
def load_templates(version: Optional[str] = None, template_dir: Optional[str] = None) -> PromptTemplateSet:
    version = version or settings.GENRANK['PROMPT_VERSION']
    root = Path(template_dir or settings.GENRANK['PROMPT_TEMPLATE_DIR']) / version
    if not root.is_dir():
        raise PromptError(f"no prompt templates for version {version!r} under {root.parent}")
    templates = {}
    for kind, (system_file, user_file, instruction) in _TEMPLATE_FILES.items():
        system = (root / system_file).read_text(encoding='utf-8').strip()
        user = (root / user_file).read_text(encoding='utf-8').strip()
        if instruction not in user:
            raise PromptError(f"{root / user_file} lost its output instruction {instruction!r}")
        templates[kind] = (system, user)
    return PromptTemplateSet(version=version, templates=templates)


def truncate_doc(text: str, policy: TruncationPolicy) -> str:
    if estimate_tokens(text) <= policy.max_doc_tokens:
        return text
    limit = 4 * policy.max_doc_tokens
    cut = limit
    if not text[limit].isspace():
        # last whitespace boundary before the limit, else a hard cut
        boundary = next((i for i in range(limit - 1, 0, -1) if text[i].isspace()), None)
        if boundary is not None:
            cut = boundary
    return text[:cut] + ELLIPSIS


def _prepare(text: str, policy: TruncationPolicy) -> str:
    return truncate_doc(_WHITESPACE.sub(' ', text).strip(), policy)


def build_pointwise_prompt(query: Query, doc: Document, policy: TruncationPolicy,
                           templates: Optional[PromptTemplateSet] = None) -> PromptBundle:
    templates = templates or load_templates()
    messages = templates.render(POINTWISE, query=query.text, document=_prepare(doc.text, policy))
    return PromptBundle(kind=POINTWISE, messages=messages, query_id=query.id, doc_ids=(doc.id,))


def build_pairwise_prompt(query: Query, doc_a: Document, doc_b: Document, policy: TruncationPolicy,
                          templates: Optional[PromptTemplateSet] = None) -> PromptBundle:
    if doc_a.id == doc_b.id:
        raise PromptError(f"pairwise prompt needs two different documents, got {doc_a.id} twice")
    templates = templates or load_templates()
    messages = templates.render(
        PAIRWISE,
        query=query.text,
        passage_a=_prepare(doc_a.text, policy),
        passage_b=_prepare(doc_b.text, policy),
    )
    return PromptBundle(kind=PAIRWISE, messages=messages, query_id=query.id, doc_ids=(doc_a.id, doc_b.id))


def build_listwise_prompt(query: Query, window_docs: Sequence[Tuple[str, str]], policy: TruncationPolicy,
                          templates: Optional[PromptTemplateSet] = None) -> PromptBundle:
    if len(window_docs) < 2:
        raise PromptError(f"listwise window needs at least 2 documents, got {len(window_docs)}")
    if len(window_docs) > MAX_WINDOW:
        raise PromptError(f"listwise window holds at most {MAX_WINDOW} documents, got {len(window_docs)}")
    templates = templates or load_templates()
    passages = '\n'.join(
        f"[{position}] {_prepare(text, policy)}"
        for position, (_doc_id, text) in enumerate(window_docs, start=1)
    )
    messages = templates.render(LISTWISE, query=query.text, count=len(window_docs), passages=passages)
    doc_ids = tuple(doc_id for doc_id, _text in window_docs)
    return PromptBundle(kind=LISTWISE, messages=messages, window_doc_ids=doc_ids,
                        query_id=query.id, doc_ids=doc_ids)
