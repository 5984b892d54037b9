"""Evaluation driver: full-scan and k-candidate protocols over a sample set.

Every sample is evaluated independently with its own random stream derived
from the run seed and the sample's content key, so results never depend on
list order, worker count, or which other samples are present.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence

import numpy as np

from .errors import EvalError
from .ingest import AlignedPair, sample_key
from .metrics import Report, SampleResult, aggregate, report_to_csv, report_to_json, score_sample
from .scoring import LocalizationResult, ScoreConfig, localize
from .store import EmbeddingStore
from .world import Scan

__all__ = [
    "PROTOCOLS",
    "EvalConfig",
    "SampleOutcome",
    "run_eval",
    "random_baseline",
    "emit_report",
    "write_per_sample",
    "outcome_to_dict",
]

PROTOCOLS = ("full_scan", "k_candidate")
_U64 = 2**64


@dataclass(frozen=True)
class EvalConfig:
    """Protocol, seeding, and scoring options for one evaluation run."""

    protocol: str = "full_scan"
    k: int = 20
    seed: int = 0
    threshold_m: float = 3.0
    score_config: ScoreConfig = field(default_factory=ScoreConfig)

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"protocol must be one of {PROTOCOLS}, got {self.protocol!r}")
        if self.protocol == "k_candidate" and self.k < 2:
            raise ValueError(f"k must be >= 2 for the k-candidate protocol, got {self.k}")
        if not (isinstance(self.seed, int) and 0 <= self.seed < _U64):
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not (self.threshold_m > 0 and math.isfinite(self.threshold_m)):
            raise ValueError(f"threshold_m must be positive and finite, got {self.threshold_m!r}")


@dataclass
class SampleOutcome:
    """Everything recorded about one evaluated sample."""

    key: str
    scan_id: str
    target_id: str
    guess_id: str
    rank: int
    result: SampleResult
    candidate_ids: tuple[str, ...] | None = None
    probs: np.ndarray | None = None


def _sample_rng(seed: int, key: str) -> np.random.Generator:
    # Stated mixing function: SHA-256 of the sample key unpacked into four
    # u64 words, prepended with the run seed, feeding numpy's SeedSequence.
    # Adding or removing other samples can never perturb this stream.
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    words = struct.unpack("<4Q", digest)
    return np.random.default_rng(np.random.SeedSequence([seed, *words]))


def _select_candidates(
    scan: Scan, target: str, cfg: EvalConfig, rng: np.random.Generator
) -> tuple[str, ...]:
    if cfg.protocol == "full_scan":
        return scan.view_ids
    others = sorted(v for v in scan.view_ids if v != target)
    if cfg.k - 1 > len(others):
        raise EvalError(
            f"k={cfg.k} exceeds scan '{scan.scan_id}' with M={len(scan)} views"
        )
    picked = rng.choice(len(others), size=cfg.k - 1, replace=False)
    return tuple(sorted([target, *(others[i] for i in picked)]))


def _resolve_sample(
    pair: AlignedPair, scans: Mapping[str, Scan], cfg: EvalConfig
) -> tuple[str, Scan, np.random.Generator, tuple[str, ...]]:
    key = sample_key(pair)
    scan = scans.get(pair.scan_id)
    if scan is None:
        raise EvalError(f"sample {key}: unknown scan '{pair.scan_id}'")
    if pair.view_id not in scan:
        raise EvalError(f"sample {key}: view '{pair.view_id}' not in scan '{pair.scan_id}'")
    rng = _sample_rng(cfg.seed, key)
    candidates = _select_candidates(scan, pair.view_id, cfg, rng)
    return key, scan, rng, candidates


def run_eval(
    samples: Iterable[AlignedPair],
    scans: Mapping[str, Scan],
    text_store: EmbeddingStore,
    image_store: EmbeddingStore,
    cfg: EvalConfig = EvalConfig(),
    keep_probs: bool = False,
) -> tuple[Report, list[SampleOutcome]]:
    """Localize and score every sample, aggregating into a Report.

    Text embeddings are looked up by :func:`~vloc.ingest.sample_key`; image
    embeddings by view id. The full-scan protocol scores all of a scan's
    views; the k-candidate protocol scores the target plus k-1 distractors
    drawn without replacement from the sample's own seeded stream.
    """
    if text_store.kind != "text":
        raise EvalError(f"text store has kind '{text_store.kind}', expected 'text'")
    if image_store.kind != "image":
        raise EvalError(f"image store has kind '{image_store.kind}', expected 'image'")
    if text_store.dim != image_store.dim:
        raise EvalError(
            f"store dimensions differ: text dim {text_store.dim}, image dim {image_store.dim}"
        )

    outcomes = []
    for pair in samples:
        key, scan, _, candidates = _resolve_sample(pair, scans, cfg)
        query = text_store.entries.get(key)
        if query is None:
            raise EvalError(
                f"no text embedding for sample key '{key}' "
                f"(scan '{pair.scan_id}', view '{pair.view_id}')"
            )
        missing = [cid for cid in candidates if cid not in image_store.entries]
        if missing:
            raise EvalError(
                f"no image embedding for view '{missing[0]}' of scan '{pair.scan_id}'"
            )
        vecs = np.stack([image_store.entries[cid] for cid in candidates])
        result = localize(query, candidates, vecs, cfg.score_config)
        outcomes.append(_score(key, pair, scan, result, cfg, keep_probs))
    return _finish(outcomes)


def random_baseline(
    samples: Iterable[AlignedPair],
    scans: Mapping[str, Scan],
    cfg: EvalConfig = EvalConfig(),
    keep_probs: bool = False,
) -> tuple[Report, list[SampleOutcome]]:
    """Evaluate a uniform random ranker over the same candidate sets.

    Needs no embeddings: each sample's ranking is a seeded random
    permutation of its candidates, and every candidate gets probability 1/M.
    The candidate draw consumes the sample stream exactly as in
    :func:`run_eval`, so both see identical candidate sets per (seed, key).
    """
    outcomes = []
    for pair in samples:
        key, scan, rng, candidates = _resolve_sample(pair, scans, cfg)
        order = rng.permutation(len(candidates))
        ranking = tuple(candidates[i] for i in order)
        probs = np.full(len(candidates), 1.0 / len(candidates))
        result = LocalizationResult(candidates, probs, ranking)
        outcomes.append(_score(key, pair, scan, result, cfg, keep_probs))
    return _finish(outcomes)


def _score(
    key: str,
    pair: AlignedPair,
    scan: Scan,
    result: LocalizationResult,
    cfg: EvalConfig,
    keep_probs: bool,
) -> SampleOutcome:
    sample = score_sample(result, pair.view_id, scan, cfg.threshold_m)
    return SampleOutcome(
        key=key,
        scan_id=pair.scan_id,
        target_id=pair.view_id,
        guess_id=result.ranking[0],
        rank=result.ranking.index(pair.view_id) + 1,
        result=sample,
        candidate_ids=result.candidate_ids if keep_probs else None,
        probs=result.probs.copy() if keep_probs else None,
    )


def _finish(outcomes: list[SampleOutcome]) -> tuple[Report, list[SampleOutcome]]:
    if not outcomes:
        raise EvalError("no samples to evaluate")
    return aggregate(o.result for o in outcomes), outcomes


def outcome_to_dict(outcome: SampleOutcome, include_probs: bool = False) -> dict:
    """JSON-ready view of one outcome; unreachable errors become null."""
    r = outcome.result
    record = {
        "key": outcome.key,
        "scan_id": outcome.scan_id,
        "target": outcome.target_id,
        "guess": outcome.guess_id,
        "rank": outcome.rank,
        "reciprocal_rank": r.reciprocal_rank,
        "hit_at_1": r.hit_at_1,
        "close": r.close,
        "same_room": r.same_room,
        "success": r.success,
        "error_m": None if math.isinf(r.error_m) else r.error_m,
    }
    if include_probs and outcome.candidate_ids is not None:
        record["candidates"] = list(outcome.candidate_ids)
        record["probs"] = [float(p) for p in outcome.probs]
    return record


def _write_text(text: str, sink: str | Path | IO[str]) -> int:
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        Path(sink).write_text(text, encoding="utf-8")
    return len(text.encode("utf-8"))


def emit_report(
    report: Report,
    per_sample: Sequence[SampleOutcome] | None,
    sink: str | Path | IO[str],
    format: str = "json",
    include_probs: bool = False,
) -> int:
    """Write a report (JSON or CSV); returns the byte count written.

    JSON output nests the report under ``report`` and, when ``per_sample``
    is given, the individual outcomes under ``samples`` (with per-candidate
    probabilities when requested and retained). CSV output is the report row
    alone, in the canonical column order.
    """
    if format == "json":
        if per_sample is None:
            payload = {"report": json.loads(report_to_json(report))}
        else:
            payload = {
                "report": json.loads(report_to_json(report)),
                "samples": [outcome_to_dict(o, include_probs) for o in per_sample],
            }
        return _write_text(json.dumps(payload, indent=2) + "\n", sink)
    if format == "csv":
        return _write_text(report_to_csv(report), sink)
    raise ValueError(f"format must be 'json' or 'csv', got {format!r}")


def write_per_sample(
    outcomes: Sequence[SampleOutcome],
    sink: str | Path | IO[str],
    include_probs: bool = False,
) -> int:
    """Write one JSON object per outcome (JSONL); returns bytes written."""
    lines = [json.dumps(outcome_to_dict(o, include_probs)) for o in outcomes]
    return _write_text("\n".join(lines) + ("\n" if lines else ""), sink)
