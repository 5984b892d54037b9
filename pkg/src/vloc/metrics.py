"""Per-sample scoring against ground truth and dataset-level aggregation.

A guess succeeds when it is the exact target, within the (strict) distance
threshold in graph distance, or in the target's annotated region. Hitting
the exact target implies the other two, so success is their disjunction.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from statistics import fmean

from .scoring import LocalizationResult, rank_of
from .world import Scan

__all__ = [
    "SampleResult",
    "Report",
    "score_sample",
    "aggregate",
    "report_to_dict",
    "report_to_json",
    "report_to_csv",
    "REPORT_CSV_COLUMNS",
]

#: CSV column order for serialized reports.
REPORT_CSV_COLUMNS = ("success", "hits_at_1", "close", "same_room", "error", "mrr")


@dataclass(frozen=True)
class SampleResult:
    """Metric outcomes for one localized sample."""

    hit_at_1: bool
    close: bool
    same_room: bool
    success: bool
    error_m: float  # graph distance guess -> target; inf when unreachable
    reciprocal_rank: float


@dataclass(frozen=True)
class Report:
    """Dataset-level aggregates over a set of sample results."""

    n_samples: int
    success_pct: float
    hits_at_1_pct: float
    close_pct: float
    same_room_pct: float
    mean_error_m: float | None  # None when every error was unreachable
    mrr: float
    n_unreachable: int


def score_sample(
    result: LocalizationResult,
    target: str,
    scan: Scan,
    threshold_m: float = 3.0,
) -> SampleResult:
    """Score one localization against its ground-truth view.

    The guess is the top-ranked candidate. ``close`` uses strict
    ``< threshold_m`` on graph distance. A guess unreachable from the target
    is never close and carries ``error_m = UNREACHABLE``; aggregation
    excludes it from the error mean and counts it separately.
    """
    for cid in result.candidate_ids:
        if cid not in scan:
            raise KeyError(f"candidate view '{cid}' is not in scan '{scan.scan_id}'")
    rank = rank_of(result, target)
    guess = result.ranking[0]
    error_m = scan.graph_distance(guess, target)
    hit = guess == target
    close = error_m < threshold_m
    same_room = scan.same_region(guess, target)
    return SampleResult(
        hit_at_1=hit,
        close=close,
        same_room=same_room,
        success=hit or close or same_room,
        error_m=error_m,
        reciprocal_rank=1.0 / rank,
    )


def aggregate(results) -> Report:
    """Dataset-level means: percentages, MRR, and mean reachable error."""
    results = list(results)
    if not results:
        raise ValueError("cannot aggregate an empty result list")
    reachable = [r.error_m for r in results if math.isfinite(r.error_m)]
    return Report(
        n_samples=len(results),
        success_pct=100.0 * fmean(r.success for r in results),
        hits_at_1_pct=100.0 * fmean(r.hit_at_1 for r in results),
        close_pct=100.0 * fmean(r.close for r in results),
        same_room_pct=100.0 * fmean(r.same_room for r in results),
        mean_error_m=fmean(reachable) if reachable else None,
        mrr=fmean(r.reciprocal_rank for r in results),
        n_unreachable=len(results) - len(reachable),
    )


def report_to_dict(report: Report) -> dict:
    """Report as a plain dict with stable field order."""
    return {
        "n_samples": report.n_samples,
        "success_pct": report.success_pct,
        "hits_at_1_pct": report.hits_at_1_pct,
        "close_pct": report.close_pct,
        "same_room_pct": report.same_room_pct,
        "mean_error_m": report.mean_error_m,
        "mrr": report.mrr,
        "n_unreachable": report.n_unreachable,
    }


def report_to_json(report: Report) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"


def report_to_csv(report: Report) -> str:
    """Header plus one data row in the canonical column order."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_CSV_COLUMNS)
    writer.writerow(
        [
            repr(report.success_pct),
            repr(report.hits_at_1_pct),
            repr(report.close_pct),
            repr(report.same_room_pct),
            "" if report.mean_error_m is None else repr(report.mean_error_m),
            repr(report.mrr),
        ]
    )
    return buf.getvalue()
