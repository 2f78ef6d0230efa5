"""Comparison tables across runs: aligned text for humans, CSV for tools."""
import csv
import io
from typing import Dict, Mapping, Optional

from .exceptions import EvaluationError
from .metrics import EvalResult

NOT_AVAILABLE = 'n/a'


def _shared_k(results: Mapping[str, EvalResult], default: int) -> int:
    ks = {result.k for result in results.values()}
    if len(ks) > 1:
        raise EvaluationError(f"results mix cutoffs {sorted(ks)}; report one k at a time")
    return ks.pop() if ks else default


def format_score(value: Optional[float]) -> str:
    return NOT_AVAILABLE if value is None else f'{value:.3f}'


def render_report(results: Mapping[str, EvalResult], k: int = 10) -> str:
    """One row per run, in insertion order: ``name  0.480``."""
    k = _shared_k(results, k)
    header = ('run', f'nDCG@{k}')
    rows = [(name, format_score(result.mean)) for name, result in results.items()]
    name_width = max(len(name) for name, _ in [header, *rows])
    lines = [f'{name.ljust(name_width)}  {value}'.rstrip() for name, value in [header, *rows]]
    return '\n'.join(lines) + '\n'


def report_csv(results: Mapping[str, EvalResult], k: int = 10) -> str:
    k = _shared_k(results, k)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(['run_name', f'ndcg@{k}'])
    for name, result in results.items():
        writer.writerow([name, NOT_AVAILABLE if result.mean is None else repr(result.mean)])
    return buffer.getvalue()


def parse_report_csv(text: str) -> Dict[str, Optional[float]]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if not header or header[0] != 'run_name':
        raise EvaluationError("report CSV must start with a run_name header")
    values = {}
    for row in reader:
        if not row:
            continue
        name, value = row
        values[name] = None if value == NOT_AVAILABLE else float(value)
    return values
