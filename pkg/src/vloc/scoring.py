"""Logit similarity, localization distributions, ranking, and the batch loss.

A text encoding scored against M candidate view encodings gives a logit row;
softmax turns it into a probability distribution over the candidates, whose
descending order is the localization ranking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "EPS_PROB",
    "ScoreConfig",
    "LocalizationResult",
    "similarity_matrix",
    "localize",
    "rank_of",
    "contrastive_loss",
]

#: Probability clamp inside the loss; keeps log() finite for saturated rows.
EPS_PROB = 1e-7


@dataclass(frozen=True)
class ScoreConfig:
    """How raw encodings become logits.

    normalize: L2-normalize text and image vectors before the dot product,
        making each logit a cosine similarity in [-1, 1]. Matches the usual
        inference convention for dual-encoder models; off leaves raw dots.
    temperature: positive multiplier applied to logits before softmax.
        Rankings are provably invariant to it; only how peaked the
        distribution is changes.
    """

    normalize: bool = True
    temperature: float = 1.0

    def __post_init__(self):
        if not (isinstance(self.temperature, (int, float))
                and math.isfinite(self.temperature) and self.temperature > 0):
            raise ValueError(
                f"temperature must be a positive finite number, got {self.temperature!r}"
            )


@dataclass(frozen=True, eq=False)
class LocalizationResult:
    """Probability distribution over candidate views for one query.

    ``probs`` aligns with ``candidate_ids`` (the order candidates were
    scored in) and sums to 1. ``ranking`` lists candidate ids by descending
    probability, exact ties broken by ascending view id.
    """

    candidate_ids: tuple[str, ...]
    probs: np.ndarray
    ranking: tuple[str, ...]


def _as_matrix(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be a nonempty 2-D array, got shape {np.shape(x)}")
    return arr


def _normalize_rows(mat: np.ndarray, name: str) -> np.ndarray:
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    bad = np.flatnonzero(norms[:, 0] < 1e-12)
    if bad.size:
        raise ValueError(f"{name} row {bad[0]} is a zero vector; cannot normalize")
    return mat / norms


def similarity_matrix(texts, images, cfg: ScoreConfig = ScoreConfig()) -> np.ndarray:
    """(N, M) logit matrix: temperature-scaled dot products of the encodings.

    Entry (n, m) is ``temperature * <t_n, i_m>`` with both vectors first
    L2-normalized when ``cfg.normalize`` is set.
    """
    t = _as_matrix(texts, "texts")
    im = _as_matrix(images, "images")
    if t.shape[1] != im.shape[1]:
        raise ValueError(
            f"dimension mismatch: texts have dim {t.shape[1]}, images have dim {im.shape[1]}"
        )
    if cfg.normalize:
        t = _normalize_rows(t, "texts")
        im = _normalize_rows(im, "images")
    return cfg.temperature * (t @ im.T)


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    e = np.exp(shifted)
    return e / e.sum()


def localize(
    query,
    candidate_ids: Sequence[str],
    candidate_vecs,
    cfg: ScoreConfig = ScoreConfig(),
) -> LocalizationResult:
    """Score one text encoding against an ordered set of candidate views.

    Probabilities are the softmax of the logit row. The ranking is computed
    from the logits directly (softmax is monotone, so the order is the
    same), which keeps it exact even when the distribution saturates.
    """
    ids = tuple(candidate_ids)
    if not ids:
        raise ValueError("at least one candidate view is required")
    if len(set(ids)) != len(ids):
        raise ValueError("candidate view ids must be unique")
    q = np.asarray(query, dtype=np.float64)
    if q.ndim != 1:
        raise ValueError(f"query must be a 1-D vector, got shape {q.shape}")
    vecs = _as_matrix(candidate_vecs, "candidate_vecs")
    if vecs.shape[0] != len(ids):
        raise ValueError(f"{len(ids)} candidate ids but {vecs.shape[0]} candidate vectors")

    logits = similarity_matrix(q[np.newaxis, :], vecs, cfg)[0]
    probs = _softmax(logits)
    order = sorted(range(len(ids)), key=lambda i: (-logits[i], ids[i]))
    return LocalizationResult(ids, probs, tuple(ids[i] for i in order))


def rank_of(result: LocalizationResult, target: str) -> int:
    """1-based position of the target view in the ranking."""
    try:
        return result.ranking.index(target) + 1
    except ValueError:
        raise KeyError(f"target view '{target}' is not among the candidates") from None


def contrastive_loss(batch_logits) -> float:
    """Mean binary cross-entropy between row-softmaxed logits and the identity.

    For an aligned batch of N (text, image) pairs scored all-against-all, a
    perfect model's row softmax is the matching one-hot row, so the N x N
    probability matrix is compared cell-wise against the identity matrix.
    This is the row-softmax BCE form, not the symmetric two-direction
    cross-entropy some contrastive recipes use. Probabilities are clamped to
    [EPS_PROB, 1 - EPS_PROB] before the logs.
    """
    logits = np.asarray(batch_logits, dtype=np.float64)
    if logits.ndim != 2 or logits.shape[0] != logits.shape[1] or logits.shape[0] < 1:
        raise ValueError(f"batch logits must be a square N x N matrix, got shape {np.shape(batch_logits)}")
    if not np.isfinite(logits).all():
        raise ValueError("batch logits contain non-finite entries")

    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    probs = e / e.sum(axis=1, keepdims=True)
    probs = np.clip(probs, EPS_PROB, 1.0 - EPS_PROB)
    eye = np.eye(logits.shape[0])
    bce = -(eye * np.log(probs) + (1.0 - eye) * np.log1p(-probs))
    return float(bce.mean())
