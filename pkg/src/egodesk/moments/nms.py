"""Soft non-maximum suppression for 1-D temporal proposals."""

from __future__ import annotations

from typing import List, Sequence

from ..metrics import tiou
from ..segments import TemporalSegment


def soft_nms(
    candidates: Sequence[TemporalSegment],
    sigma: float = 0.5,
    score_floor: float = 1e-4,
) -> List[TemporalSegment]:
    """Gaussian-decay suppression.

    Repeatedly selects the highest-scoring remaining candidate and decays
    every other remaining score by exp(-tIoU^2 / sigma) against it.
    Candidates whose decayed score drops below ``score_floor`` are removed;
    the output is sorted by final score, descending.  Non-overlapping
    candidates pass through unchanged (decay factor 1).
    """
    import math

    if sigma <= 0:
        raise ValueError("sigma must be positive")
    pool = [(seg, float(seg.score if seg.score is not None else 0.0)) for seg in candidates]
    kept: List[TemporalSegment] = []
    while pool:
        best = max(range(len(pool)), key=lambda i: pool[i][1])
        seg, score = pool.pop(best)
        kept.append(seg.with_score(score))
        survivors = []
        for other, other_score in pool:
            decayed = other_score * math.exp(-(tiou(seg, other) ** 2) / sigma)
            if decayed >= score_floor:
                survivors.append((other, decayed))
        pool = survivors
    return kept
