"""Snippet-level feature extraction.

A track holds one embedding per snippet of ``snippet_len`` consecutive
frames taken every ``stride`` frames.  Tail frames that do not fill a full
snippet are dropped; clips shorter than one snippet are right-padded by
repeating the last frame, giving a single row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..encoders.towers import TwoTowerModel
from ..world.types import Clip


@dataclass
class SnippetFeatureTrack:
    features: np.ndarray  # N x D float32
    snippet_len: int
    stride: int
    fps: float
    clip_id: str
    duration_s: float = 0.0

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float32)
        if self.features.ndim != 2:
            raise ValueError("features must be an N x D matrix")
        if not np.isfinite(self.features).all():
            raise ValueError("track features must be finite")

    @property
    def num_snippets(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def snippet_center_s(self, index: int) -> float:
        """Second timestamp of a snippet row's center."""
        return (index * self.stride + self.snippet_len / 2.0) / self.fps

    def centers_s(self) -> np.ndarray:
        return np.array(
            [self.snippet_center_s(i) for i in range(self.num_snippets)], dtype=np.float64
        )


def snippet_count(num_frames: int, snippet_len: int, stride: int) -> int:
    """Closed-form row count: floor((T - s) / stride) + 1, and 1 when T < s."""
    if num_frames < snippet_len:
        return 1
    return (num_frames - snippet_len) // stride + 1


def extract_snippet_track(
    clip: Clip,
    encoder: TwoTowerModel,
    snippet_len: int = 16,
    stride: int = 16,
) -> SnippetFeatureTrack:
    if snippet_len <= 0 or stride <= 0:
        raise ValueError("snippet_len and stride must be positive")
    t = clip.num_frames
    if t < 1:
        raise ValueError("clip must contain at least one frame")

    windows = []
    if t < snippet_len:
        pad = np.repeat(clip.frames[-1:], snippet_len - t, axis=0)
        windows.append(np.concatenate([clip.frames, pad], axis=0))
    else:
        for i in range(snippet_count(t, snippet_len, stride)):
            start = i * stride
            windows.append(clip.frames[start : start + snippet_len])
    features = encoder.encode_videos(windows)
    return SnippetFeatureTrack(
        features=features.astype(np.float32),
        snippet_len=snippet_len,
        stride=stride,
        fps=clip.fps,
        clip_id=clip.id,
        duration_s=clip.duration_s,
    )
