"""Corpus readers: JSONL (``id``, ``text``, optional ``title``) and TSV (``id<TAB>text``)."""
import json
from pathlib import Path
from typing import Iterator, List, Union

from .exceptions import TrecFormatError
from .types import Document


def iter_jsonl(path: Union[str, Path]) -> Iterator[Document]:
    with Path(path).open(encoding='utf-8') as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                yield Document(
                    id=str(record['id']),
                    text=record.get('text') or '',
                    title=record.get('title'),
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise TrecFormatError(line_no, f"bad corpus record ({exc})") from exc


def iter_tsv(path: Union[str, Path]) -> Iterator[Document]:
    with Path(path).open(encoding='utf-8') as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip('\r\n')
            if not line.strip():
                continue
            doc_id, sep, text = line.partition('\t')
            if not sep:
                raise TrecFormatError(line_no, "expected 'id<TAB>text'")
            try:
                yield Document(id=doc_id.strip(), text=text)
            except ValueError as exc:
                raise TrecFormatError(line_no, str(exc)) from exc


def load_corpus(path: Union[str, Path]) -> List[Document]:
    """Dispatch on extension: ``.jsonl``/``.json`` are JSON lines, everything else TSV."""
    suffix = Path(path).suffix.lower()
    if suffix in ('.jsonl', '.json'):
        return list(iter_jsonl(path))
    return list(iter_tsv(path))
