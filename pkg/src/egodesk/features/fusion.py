"""Feature fusion: linear projection, width-wise concatenation, and
temporal pyramid interpolation."""

from __future__ import annotations

from typing import List, Sequence

import numpy as np

from .tracks import SnippetFeatureTrack


def project_features(
    track: SnippetFeatureTrack, weights: np.ndarray, out_dim: int = 512
) -> SnippetFeatureTrack:
    """Row-wise linear map to ``out_dim``; temporal metadata is preserved."""
    weights = np.asarray(weights, dtype=np.float32)
    if weights.shape != (track.dim, out_dim):
        raise ValueError(
            f"weights must be {track.dim} x {out_dim}, got {weights.shape}"
        )
    return SnippetFeatureTrack(
        features=track.features @ weights,
        snippet_len=track.snippet_len,
        stride=track.stride,
        fps=track.fps,
        clip_id=track.clip_id,
        duration_s=track.duration_s,
    )


def concat_fuse(tracks: Sequence[SnippetFeatureTrack]) -> SnippetFeatureTrack:
    """Concatenate aligned tracks along the feature axis."""
    if not tracks:
        raise ValueError("need at least one track")
    first = tracks[0]
    for t in tracks[1:]:
        if t.num_snippets != first.num_snippets:
            raise ValueError("tracks disagree on snippet count")
        if (t.snippet_len, t.stride, t.fps, t.clip_id) != (
            first.snippet_len,
            first.stride,
            first.fps,
            first.clip_id,
        ):
            raise ValueError("tracks disagree on temporal metadata or clip id")
    return SnippetFeatureTrack(
        features=np.concatenate([t.features for t in tracks], axis=1),
        snippet_len=first.snippet_len,
        stride=first.stride,
        fps=first.fps,
        clip_id=first.clip_id,
        duration_s=first.duration_s,
    )


def interpolate_temporal(features: np.ndarray, target_len: int) -> np.ndarray:
    """Piecewise-linear resample of an N x D sequence to ``target_len`` rows.

    Output row j samples fractional source index j * (N-1) / (M-1); with
    M == N this is exactly the identity.  A single output row samples the
    sequence midpoint.
    """
    feats = np.asarray(features, dtype=np.float64)
    n = feats.shape[0]
    if target_len < 1:
        raise ValueError("target length must be >= 1")
    if n == 1:
        return np.repeat(feats, target_len, axis=0)
    if target_len == 1:
        positions = np.array([(n - 1) / 2.0])
    else:
        positions = np.arange(target_len) * (n - 1) / (target_len - 1)
    lo = np.floor(positions).astype(int)
    hi = np.minimum(lo + 1, n - 1)
    frac = (positions - lo)[:, None]
    return feats[lo] * (1.0 - frac) + feats[hi] * frac


def pyramid_fuse(
    last_map: np.ndarray,
    target_lengths: Sequence[int],
    still_pyramid: Sequence[np.ndarray],
) -> List[np.ndarray]:
    """Resize the final temporal feature map to each pyramid level and add it
    to the matching still-feature level."""
    if len(target_lengths) != len(still_pyramid):
        raise ValueError("one target length per still level is required")
    last_map = np.asarray(last_map, dtype=np.float64)
    fused = []
    for target_len, still in zip(target_lengths, still_pyramid):
        still = np.asarray(still, dtype=np.float64)
        if still.shape[0] != target_len:
            raise ValueError(
                f"still level has {still.shape[0]} positions, expected {target_len}"
            )
        if still.shape[1] != last_map.shape[1]:
            raise ValueError("feature widths differ; project before fusing")
        fused.append(interpolate_temporal(last_map, target_len) + still)
    return fused
