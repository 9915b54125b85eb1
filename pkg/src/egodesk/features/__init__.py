"""Snippet feature tracks and fusion mechanisms."""

from .tracks import SnippetFeatureTrack, extract_snippet_track, snippet_count
from .fusion import concat_fuse, interpolate_temporal, project_features, pyramid_fuse
from .io import load_track, load_track_set, save_track, save_track_set

__all__ = [
    "SnippetFeatureTrack",
    "extract_snippet_track",
    "snippet_count",
    "concat_fuse",
    "interpolate_temporal",
    "project_features",
    "pyramid_fuse",
    "load_track",
    "load_track_set",
    "save_track",
    "save_track_set",
]
