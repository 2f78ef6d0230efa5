"""Turning free-form model output into permutations, grades and verdicts."""
import re
from dataclasses import dataclass
from typing import Tuple

from .exceptions import UnparseableResponseError

_INTEGER = re.compile(r'\d+')
_SIGNED_INTEGER = re.compile(r'-?\d+')


@dataclass(frozen=True)
class ParsedPermutation:
    order: Tuple[int, ...]
    repaired: bool = False


def parse_permutation(response: str, window_len: int) -> ParsedPermutation:
    """
    Read window indices (1-based) in textual order and repair them into a
    full permutation of 1..window_len: out-of-range indices and repeats are
    dropped, missing indices are appended ascending.
    """
    if window_len < 1:
        raise ValueError(f"window_len must be >= 1, got {window_len}")
    found = [int(match) for match in _INTEGER.findall(response)]
    if not found:
        raise UnparseableResponseError(response)

    order = []
    seen = set()
    for index in found:
        if 1 <= index <= window_len and index not in seen:
            seen.add(index)
            order.append(index)
    order.extend(index for index in range(1, window_len + 1) if index not in seen)
    return ParsedPermutation(order=tuple(order), repaired=tuple(order) != tuple(found))


def parse_pointwise_score(response: str, max_grade: int) -> int:
    if max_grade < 1:
        raise ValueError(f"max_grade must be >= 1, got {max_grade}")
    match = _SIGNED_INTEGER.search(response)
    if match is None:
        raise UnparseableResponseError(response)
    return max(0, min(int(match.group()), max_grade))


def parse_pairwise_verdict(response: str) -> str:
    """``'A'`` or ``'B'`` from the first non-blank character of the response."""
    stripped = response.strip()
    first = stripped[:1].upper()
    if first not in ('A', 'B'):
        raise UnparseableResponseError(response)
    return first
