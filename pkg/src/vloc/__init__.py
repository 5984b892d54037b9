"""Text-to-view localization for mapped indoor environments.

Given one embedding per candidate view of a building and the embedding of a
natural-language description, this package turns logit similarities into a
probability distribution over views, ranks the candidates, scores the
prediction against ground truth (exact hit, distance threshold, same room,
reciprocal rank), and aggregates over datasets. It also ships the dataset
construction utilities (timed-narration alignment, landmark grounding), a
binary embedding file format, and a seeded evaluation CLI.

Encoders live outside the package: embeddings come in as files; see the
companion ``embedder`` package for producing them.
"""

from .errors import (
    EmbeddingFormatError,
    EvalError,
    SampleFormatError,
    ScanFormatError,
    VlocError,
)
from .harness import (
    EvalConfig,
    SampleOutcome,
    emit_report,
    outcome_to_dict,
    random_baseline,
    run_eval,
    write_per_sample,
)
from .ingest import (
    AlignedPair,
    TimedNarration,
    align_narration,
    load_landmarks,
    load_narration,
    load_samples,
    sample_key,
)
from .metrics import (
    Report,
    SampleResult,
    aggregate,
    report_to_csv,
    report_to_dict,
    report_to_json,
    score_sample,
)
from .scoring import (
    LocalizationResult,
    ScoreConfig,
    contrastive_loss,
    localize,
    rank_of,
    similarity_matrix,
)
from .store import EmbeddingStore, l2_normalize, read_store, write_store
from .world import UNREACHABLE, Scan, View, euclidean_edge_weight, load_scan

__version__ = "0.1.0"

__all__ = [
    "AlignedPair",
    "EmbeddingFormatError",
    "EmbeddingStore",
    "EvalConfig",
    "EvalError",
    "LocalizationResult",
    "Report",
    "SampleFormatError",
    "SampleOutcome",
    "SampleResult",
    "Scan",
    "ScanFormatError",
    "ScoreConfig",
    "TimedNarration",
    "UNREACHABLE",
    "View",
    "VlocError",
    "aggregate",
    "align_narration",
    "contrastive_loss",
    "emit_report",
    "euclidean_edge_weight",
    "l2_normalize",
    "load_landmarks",
    "load_narration",
    "load_samples",
    "load_scan",
    "localize",
    "outcome_to_dict",
    "random_baseline",
    "rank_of",
    "read_store",
    "report_to_csv",
    "report_to_dict",
    "report_to_json",
    "run_eval",
    "sample_key",
    "score_sample",
    "similarity_matrix",
    "write_per_sample",
    "write_store",
]
