"""Sample loading and supervision-pair construction.

Three document formats feed the engine:

- sample documents: line-delimited JSON, one object per line with ``text``,
  ``scan_id``, ``view_id``, and optional ``source``;
- narration documents: one JSON object with time-stamped ``words`` and a
  ``trace`` of (time, view) pose entries, plus optional ``scan_id``;
- landmark documents: line-delimited JSON with ``entity``, ``scan_id``,
  ``view_id``; any ``bbox`` field is ignored so entities ground to whole
  views.

Narration alignment assigns each word the view occupied at its timestamp and
joins maximal same-view runs of words into one training pair per fragment.
"""

from __future__ import annotations

import hashlib
import json
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Mapping

from .errors import SampleFormatError
from .world import Scan

__all__ = [
    "SOURCES",
    "AlignedPair",
    "TimedNarration",
    "sample_key",
    "load_samples",
    "load_narration",
    "align_narration",
    "load_landmarks",
]

SOURCES = ("gold", "rxr", "landmarks")


@dataclass(frozen=True)
class AlignedPair:
    """A (description text, view) supervision or evaluation record."""

    text: str
    scan_id: str
    view_id: str
    source: str = "gold"


def sample_key(pair: AlignedPair) -> str:
    """Stable 16-hex-digit identity for a sample.

    Derived from content only (scan, view, text), so a sample keeps its key
    when the file around it changes. Evaluation text-embedding stores are
    keyed by this value, and so are per-sample random streams.
    """
    h = hashlib.sha256()
    for part in (pair.scan_id, pair.view_id, pair.text):
        h.update(part.encode("utf-8"))
        h.update(b"\x1f")
    return h.hexdigest()[:16]


def _iter_lines(source: str | Path | IO[str]):
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.strip():
            yield lineno, line


def _parse_line(line: str, lineno: int) -> dict:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as err:
        raise SampleFormatError(f"line {lineno}: invalid JSON: {err}") from None
    if not isinstance(record, dict):
        raise SampleFormatError(f"line {lineno}: expected a JSON object")
    return record


def _string_field(record: dict, name: str, lineno: int) -> str:
    if name not in record:
        raise SampleFormatError(f"line {lineno}: missing field '{name}'")
    value = record[name]
    if not isinstance(value, str) or not value:
        raise SampleFormatError(f"line {lineno}: field '{name}' must be a nonempty string")
    return value


def _check_view(scan_id: str, view_id: str, scans: Mapping[str, Scan] | None, lineno: int) -> None:
    if scans is None:
        return
    if scan_id not in scans:
        raise SampleFormatError(f"line {lineno}: unknown scan '{scan_id}'")
    if view_id not in scans[scan_id]:
        raise SampleFormatError(f"line {lineno}: view '{view_id}' not in scan '{scan_id}'")


def load_samples(
    source: str | Path | IO[str],
    scans: Mapping[str, Scan] | None = None,
) -> list[AlignedPair]:
    """Load line-delimited sample records, one pair per valid line.

    Blank lines are skipped. When ``scans`` is supplied, every record's view
    must exist in its named scan. Errors carry the offending line number.
    """
    pairs = []
    for lineno, line in _iter_lines(source):
        record = _parse_line(line, lineno)
        text = _string_field(record, "text", lineno)
        if not text.strip():
            raise SampleFormatError(f"line {lineno}: empty text")
        scan_id = _string_field(record, "scan_id", lineno)
        view_id = _string_field(record, "view_id", lineno)
        source_tag = record.get("source", "gold")
        if source_tag not in SOURCES:
            raise SampleFormatError(
                f"line {lineno}: source must be one of {SOURCES}, got {source_tag!r}"
            )
        _check_view(scan_id, view_id, scans, lineno)
        pairs.append(AlignedPair(text, scan_id, view_id, source_tag))
    return pairs


@dataclass(frozen=True)
class TimedNarration:
    """A narration whose words and occupied views are both time-stamped.

    ``words`` are (token, seconds) in nondecreasing time order; ``trace`` is
    the pose log of (seconds, view id) entries, also nondecreasing and never
    empty. ``scan_id`` names the scan the trace walks through.
    """

    words: tuple[tuple[str, float], ...]
    trace: tuple[tuple[float, str], ...]
    scan_id: str = ""

    def __post_init__(self):
        words = tuple((str(tok), float(t)) for tok, t in self.words)
        trace = tuple((float(t), str(v)) for t, v in self.trace)
        object.__setattr__(self, "words", words)
        object.__setattr__(self, "trace", trace)
        if not trace:
            raise ValueError("trace must not be empty")
        for seq_name, times in (("words", [t for _, t in words]), ("trace", [t for t, _ in trace])):
            if any(b < a for a, b in zip(times, times[1:])):
                raise ValueError(f"{seq_name} timestamps must be nondecreasing")
        for i, (tok, _) in enumerate(words):
            if not tok:
                raise ValueError(f"word #{i} has an empty token")


def load_narration(source: str | Path | IO[str]) -> TimedNarration:
    """Parse a narration document: ``{"words": [[token, t], ...], "trace": [[t, view], ...]}``."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise SampleFormatError(f"narration document is not valid JSON: {err}") from None
    if not isinstance(doc, dict) or "words" not in doc or "trace" not in doc:
        raise SampleFormatError("narration document must be an object with 'words' and 'trace'")
    scan_id = doc.get("scan_id", "")
    if not isinstance(scan_id, str):
        raise SampleFormatError("narration 'scan_id' must be a string")
    try:
        return TimedNarration(
            words=tuple((w[0], w[1]) for w in doc["words"]),
            trace=tuple((e[0], e[1]) for e in doc["trace"]),
            scan_id=scan_id,
        )
    except (ValueError, TypeError, IndexError) as err:
        raise SampleFormatError(f"invalid narration document: {err}") from None


def align_narration(narration: TimedNarration, min_words: int = 1) -> list[AlignedPair]:
    """Turn a timed narration into (text fragment, view) pairs.

    Each word maps to the view occupied at its timestamp: the last trace
    entry at or before the word's time, with words spoken before the trace
    starts mapping to the first view. Maximal runs of consecutive words on
    one view are joined with single spaces into one pair; runs shorter than
    ``min_words`` are dropped. With ``min_words=1`` the pairs partition the
    word sequence losslessly.
    """
    if min_words < 1:
        raise ValueError(f"min_words must be >= 1, got {min_words}")
    if not narration.words:
        return []

    trace_times = [t for t, _ in narration.trace]

    def view_at(t: float) -> str:
        i = bisect_right(trace_times, t) - 1
        return narration.trace[max(i, 0)][1]

    pairs: list[AlignedPair] = []
    run_tokens: list[str] = []
    run_view = ""

    def flush():
        if len(run_tokens) >= min_words:
            pairs.append(
                AlignedPair(" ".join(run_tokens), narration.scan_id, run_view, source="rxr")
            )

    for token, t in narration.words:
        view = view_at(t)
        if run_tokens and view != run_view:
            flush()
            run_tokens = []
        run_tokens.append(token)
        run_view = view
    flush()
    return pairs


def load_landmarks(
    source: str | Path | IO[str],
    scans: Mapping[str, Scan] | None = None,
) -> list[AlignedPair]:
    """Load line-delimited (entity, scan, view) grounding records.

    Entity text is preserved verbatim. A ``bbox`` field, if present, is
    dropped: entities ground to whole views here.
    """
    pairs = []
    for lineno, line in _iter_lines(source):
        record = _parse_line(line, lineno)
        entity = _string_field(record, "entity", lineno)
        if not entity.strip():
            raise SampleFormatError(f"line {lineno}: empty entity text")
        scan_id = _string_field(record, "scan_id", lineno)
        view_id = _string_field(record, "view_id", lineno)
        _check_view(scan_id, view_id, scans, lineno)
        pairs.append(AlignedPair(entity, scan_id, view_id, source="landmarks"))
    return pairs
