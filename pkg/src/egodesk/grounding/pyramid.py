"""Temporal feature pyramid over snippet tracks.

Level 0 is the track itself; each next level average-pools adjacent pairs
(stride 2), so level l holds ceil(N / 2^l) positions.  Every position keeps
a second timestamp: pooled positions sit at the midpoint of their parents,
and an odd tail position inherits its single parent's stamp.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from ..features.tracks import SnippetFeatureTrack


@dataclass
class PyramidLevel:
    features: np.ndarray  # P x D
    stamps: np.ndarray  # P (seconds)
    level: int
    span_s: float  # temporal footprint of one position


def pool_pairs(values: np.ndarray) -> np.ndarray:
    """Average adjacent rows; an odd final row passes through unchanged."""
    n = values.shape[0]
    if n <= 1:
        return values.copy()
    pairs = values[: (n // 2) * 2].reshape(n // 2, 2, *values.shape[1:]).mean(axis=1)
    if n % 2:
        return np.concatenate([pairs, values[-1:]], axis=0)
    return pairs


def build_pyramid(track: SnippetFeatureTrack, levels: int) -> List[PyramidLevel]:
    if levels < 1:
        raise ValueError("need at least one pyramid level")
    if track.num_snippets < 1:
        raise ValueError("track must contain at least one snippet")
    feats = track.features.astype(np.float64)
    stamps = track.centers_s()
    base_span = track.stride / track.fps
    out = [PyramidLevel(feats.copy(), stamps.copy(), 0, base_span)]
    for level in range(1, levels):
        feats = pool_pairs(feats)
        stamps = pool_pairs(stamps)
        out.append(PyramidLevel(feats, stamps, level, base_span * 2**level))
    return out
