"""Feature files: ``EGVF`` binary per clip plus a JSON-lines manifest.

Header (little endian): magic ``EGVF``, then N, D, snippet_len, stride as
u32 and fps as f32, followed by row-major float32 data.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Dict

import numpy as np

from .tracks import SnippetFeatureTrack

FEATURE_MAGIC = b"EGVF"


def save_track(track: SnippetFeatureTrack, path) -> None:
    with open(path, "wb") as f:
        f.write(FEATURE_MAGIC)
        f.write(
            struct.pack(
                "<4If",
                track.num_snippets,
                track.dim,
                track.snippet_len,
                track.stride,
                track.fps,
            )
        )
        f.write(struct.pack("<f", track.duration_s))
        f.write(np.ascontiguousarray(track.features, dtype=np.float32).tobytes())


def load_track(path, clip_id: str) -> SnippetFeatureTrack:
    with open(path, "rb") as f:
        if f.read(4) != FEATURE_MAGIC:
            raise ValueError(f"{path}: not a feature file")
        n, d, snippet_len, stride, fps = struct.unpack("<4If", f.read(20))
        (duration_s,) = struct.unpack("<f", f.read(4))
        data = f.read(n * d * 4)
    if len(data) != n * d * 4:
        raise ValueError(f"{path}: truncated feature data")
    return SnippetFeatureTrack(
        features=np.frombuffer(data, dtype=np.float32).reshape(n, d).copy(),
        snippet_len=snippet_len,
        stride=stride,
        fps=fps,
        clip_id=clip_id,
        duration_s=duration_s,
    )


def save_track_set(tracks: Dict[str, SnippetFeatureTrack], root) -> None:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    with open(root / "features.jsonl", "w", encoding="utf8") as manifest:
        for clip_id in sorted(tracks):
            rel = f"{clip_id}.egvf"
            save_track(tracks[clip_id], root / rel)
            manifest.write(json.dumps({"clip_id": clip_id, "path": rel}) + "\n")


def load_track_set(root) -> Dict[str, SnippetFeatureTrack]:
    root = Path(root)
    tracks = {}
    with open(root / "features.jsonl", "r", encoding="utf8") as manifest:
        for line in manifest:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            tracks[rec["clip_id"]] = load_track(root / rec["path"], rec["clip_id"])
    return tracks
