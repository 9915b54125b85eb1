"""Shared metric primitives: tIoU, average precision, edit distance, top-k.

Every localization/retrieval/anticipation metric in the package bottoms out
here so tie-breaking and epsilon conventions are fixed in exactly one place:

* tIoU uses an epsilon-regularized denominator (``EPS = 1e-9``) and defines
  the overlap of two identical point intervals as 1.
* rankings break ties by lowest index (stable sort on negated scores).
"""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

from .segments import TemporalSegment

EPS = 1e-9

SegmentLike = Union[TemporalSegment, Sequence[float]]


def _bounds(seg: SegmentLike):
    if isinstance(seg, TemporalSegment):
        return seg.start_s, seg.end_s
    start, end = float(seg[0]), float(seg[1])
    return start, end


def tiou(a: SegmentLike, b: SegmentLike) -> float:
    """Temporal intersection-over-union of two intervals, in [0, 1].

    Accepts ``TemporalSegment`` or ``(start, end)`` pairs.  Two identical
    intervals always score 1, including zero-length points; any other
    pairing uses ``|a∩b| / (|a∪b| + EPS)``.
    """
    a0, a1 = _bounds(a)
    b0, b1 = _bounds(b)
    if a0 == b0 and a1 == b1:
        return 1.0
    inter = max(0.0, min(a1, b1) - max(a0, b0))
    union = (a1 - a0) + (b1 - b0) - inter
    return inter / (union + EPS)


def average_precision(flags: Sequence[int]) -> float:
    """AP of a ranked list of binary relevance flags.

    Mean of precision@r taken at every relevant rank r; 0.0 when the list
    contains no relevant item.  Appending trailing zeros never changes the
    result.
    """
    hits = 0
    precisions = []
    for rank, flag in enumerate(flags, start=1):
        if flag:
            hits += 1
            precisions.append(hits / rank)
    if not precisions:
        return 0.0
    return float(sum(precisions) / len(precisions))


def levenshtein(a: Sequence, b: Sequence) -> int:
    """Unit-cost edit distance between two token sequences."""
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    prev = list(range(lb + 1))
    for i in range(1, la + 1):
        cur = [i] + [0] * lb
        for j in range(1, lb + 1):
            sub = prev[j - 1] + (0 if a[i - 1] == b[j - 1] else 1)
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, sub)
        prev = cur
    return prev[lb]


def rank_descending(scores: np.ndarray) -> np.ndarray:
    """Indices sorting ``scores`` descending, ties broken by lowest index."""
    scores = np.asarray(scores)
    return np.argsort(-scores, axis=-1, kind="stable")


def topk_accuracy(logits: np.ndarray, labels: Sequence[int], k: int) -> float:
    """Fraction of rows whose label sits among the k largest logits.

    Ties are broken toward the lowest class index.  Raises if any label is
    outside ``[0, C)`` or ``k < 1``.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 2:
        raise ValueError(f"logits must be M x C, got shape {logits.shape}")
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape[0] != logits.shape[0]:
        raise ValueError("labels and logits row counts differ")
    n_classes = logits.shape[1]
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise ValueError("label out of range")
    if labels.size == 0:
        return 0.0
    top = rank_descending(logits)[:, : min(k, n_classes)]
    correct = (top == labels[:, None]).any(axis=1)
    return float(correct.mean())
