"""On-disk world layout.

* ``clips/<id>.egvc``: little-endian binary, magic ``EGVC``, version u32,
  then T, H, W, C as u32 and raw uint8 frame data.
* ``clips.jsonl``: one record per clip mapping id to path, fps, duration
  and the latent script.
* ``pairs.jsonl``: the pair manifest, one ``{clip_id, caption, source,
  quality}`` record per line.
* one JSON-lines file per annotation track plus ``splits.json`` /
  ``domain.json``.
"""

from __future__ import annotations

import dataclasses
import json
import struct
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..anticipation.types import ActionToken, AnticipationExample
from ..grounding.types import GroundingQuery
from ..moments.types import MomentAnnotation
from ..segments import TemporalSegment
from .types import ActionScript, Clip, ClipTextPair, ScriptEntry, WorldAnnotations, WorldConfig

CLIP_MAGIC = b"EGVC"
CLIP_VERSION = 1


def save_clip(clip: Clip, path) -> None:
    t, h, w, c = clip.frames.shape
    with open(path, "wb") as f:
        f.write(CLIP_MAGIC)
        f.write(struct.pack("<5I", CLIP_VERSION, t, h, w, c))
        f.write(np.ascontiguousarray(clip.frames).tobytes())


def load_clip_frames(path) -> np.ndarray:
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != CLIP_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        version, t, h, w, c = struct.unpack("<5I", f.read(20))
        if version != CLIP_VERSION:
            raise ValueError(f"{path}: unsupported clip file version {version}")
        data = f.read(t * h * w * c)
    if len(data) != t * h * w * c:
        raise ValueError(f"{path}: truncated frame data")
    return np.frombuffer(data, dtype=np.uint8).reshape(t, h, w, c).copy()


def load_clip(path, meta: dict) -> Clip:
    frames = load_clip_frames(path)
    script = ActionScript(
        tuple(ScriptEntry(int(v), int(n), float(s), float(e)) for v, n, s, e in meta["script"])
    )
    return Clip(
        id=meta["clip_id"],
        frames=frames,
        fps=float(meta["fps"]),
        duration_s=float(meta["duration_s"]),
        script=script,
    )


def _write_jsonl(path, records) -> None:
    with open(path, "w", encoding="utf8") as f:
        for rec in records:
            f.write(json.dumps(rec, sort_keys=True) + "\n")


def _read_jsonl(path) -> List[dict]:
    out = []
    with open(path, "r", encoding="utf8") as f:
        for line in f:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def save_pair_manifest(pairs: List[ClipTextPair], path) -> None:
    _write_jsonl(
        path,
        (
            {
                "clip_id": p.clip_id,
                "caption": p.caption,
                "source": p.source,
                "quality": p.quality,
            }
            for p in pairs
        ),
    )


def load_pair_manifest(path) -> List[ClipTextPair]:
    return [
        ClipTextPair(
            clip_id=r["clip_id"],
            caption=r["caption"],
            source=r["source"],
            quality=r.get("quality"),
        )
        for r in _read_jsonl(path)
    ]


def save_world(
    root,
    clips: List[Clip],
    pairs: List[ClipTextPair],
    annotations: WorldAnnotations,
    config: Optional[WorldConfig] = None,
) -> None:
    root = Path(root)
    clip_dir = root / "clips"
    clip_dir.mkdir(parents=True, exist_ok=True)

    clip_meta = []
    for clip in clips:
        rel = f"clips/{clip.id}.egvc"
        save_clip(clip, root / rel)
        clip_meta.append(
            {
                "clip_id": clip.id,
                "path": rel,
                "fps": clip.fps,
                "duration_s": clip.duration_s,
                "script": [
                    [e.verb_id, e.noun_id, e.start_s, e.end_s]
                    for e in clip.script.entries
                ],
            }
        )
    _write_jsonl(root / "clips.jsonl", clip_meta)
    save_pair_manifest(pairs, root / "pairs.jsonl")

    _write_jsonl(
        root / "grounding.jsonl",
        (
            {
                "query_id": q.query_id,
                "clip_id": q.clip_id,
                "query_text": q.query_text,
                "gt": [q.gt.start_s, q.gt.end_s] if q.gt is not None else None,
            }
            for q in annotations.grounding
        ),
    )
    _write_jsonl(
        root / "moments.jsonl",
        (
            {
                "clip_id": m.clip_id,
                "category_id": m.category_id,
                "segments": [[s.start_s, s.end_s] for s in m.segments],
            }
            for m in annotations.moments
        ),
    )
    _write_jsonl(
        root / "anticipation.jsonl",
        (
            {
                "example_id": ex.example_id,
                "history": [[t.verb_id, t.noun_id] for t in ex.history],
                "future": [[t.verb_id, t.noun_id] for t in ex.future],
                "history_clip_ids": list(ex.history_clip_ids),
            }
            for ex in annotations.anticipation
        ),
    )
    _write_jsonl(
        root / "recognition.jsonl",
        (
            {"clip_id": cid, "verb_id": v, "noun_id": n}
            for cid, (v, n) in annotations.recognition.items()
        ),
    )
    (root / "splits.json").write_text(json.dumps(annotations.splits, sort_keys=True))
    (root / "domain.json").write_text(json.dumps(annotations.domain, sort_keys=True))
    if config is not None:
        (root / "config.json").write_text(
            json.dumps(dataclasses.asdict(config), sort_keys=True)
        )


def load_world(root) -> Tuple[List[Clip], List[ClipTextPair], WorldAnnotations]:
    root = Path(root)
    clips = [load_clip(root / m["path"], m) for m in _read_jsonl(root / "clips.jsonl")]
    pairs = load_pair_manifest(root / "pairs.jsonl")

    ann = WorldAnnotations()
    for r in _read_jsonl(root / "grounding.jsonl"):
        gt = r.get("gt")
        ann.grounding.append(
            GroundingQuery(
                clip_id=r["clip_id"],
                query_text=r["query_text"],
                gt=TemporalSegment(gt[0], gt[1]) if gt is not None else None,
                query_id=r["query_id"],
            )
        )
    for r in _read_jsonl(root / "moments.jsonl"):
        ann.moments.append(
            MomentAnnotation(
                clip_id=r["clip_id"],
                category_id=r["category_id"],
                segments=[TemporalSegment(s, e) for s, e in r["segments"]],
            )
        )
    for r in _read_jsonl(root / "anticipation.jsonl"):
        ann.anticipation.append(
            AnticipationExample(
                example_id=r["example_id"],
                history=tuple(ActionToken(v, n) for v, n in r["history"]),
                future=tuple(ActionToken(v, n) for v, n in r["future"]),
                history_clip_ids=tuple(r["history_clip_ids"]),
            )
        )
    for r in _read_jsonl(root / "recognition.jsonl"):
        ann.recognition[r["clip_id"]] = (r["verb_id"], r["noun_id"])
    ann.splits = json.loads((root / "splits.json").read_text())
    ann.domain = json.loads((root / "domain.json").read_text())
    return clips, pairs, ann


def load_world_config(root) -> WorldConfig:
    data = json.loads((Path(root) / "config.json").read_text())
    data["duration_range"] = tuple(data["duration_range"])
    data["caption_templates"] = tuple(data["caption_templates"])
    data["source_probs"] = tuple(data["source_probs"])
    return WorldConfig(**data)
