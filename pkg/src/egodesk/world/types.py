"""Core data model of the synthetic egocentric world."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .vocab import CAPTION_TEMPLATE

SOURCES = ("diary", "tutorial", "demo", "steps")


@dataclass(frozen=True)
class ScriptEntry:
    verb_id: int
    noun_id: int
    start_s: float
    end_s: float

    def __post_init__(self):
        if self.verb_id < 0 or self.noun_id < 0:
            raise ValueError("label ids must be nonnegative")
        if not 0 <= self.start_s < self.end_s:
            raise ValueError(
                f"entry interval must satisfy 0 <= start < end, got "
                f"[{self.start_s}, {self.end_s}]"
            )


@dataclass(frozen=True)
class ActionScript:
    """Ordered latent action list that generated a clip; all ground truth
    for every track derives from it."""

    entries: Tuple[ScriptEntry, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        starts = [e.start_s for e in self.entries]
        if starts != sorted(starts):
            raise ValueError("script entries must be sorted by start time")

    def validate_against(self, duration_s: float, num_verbs: int, num_nouns: int):
        for e in self.entries:
            if e.end_s > duration_s + 1e-9:
                raise ValueError("script entry extends past clip duration")
            if e.verb_id >= num_verbs or e.noun_id >= num_nouns:
                raise ValueError("script entry label out of vocabulary range")


@dataclass
class Clip:
    """Rendered frames plus the script that produced them.

    ``frames`` is a T x H x W x C uint8 tensor with T = round(duration_s * fps).
    """

    id: str
    frames: np.ndarray
    fps: float
    duration_s: float
    script: ActionScript

    def __post_init__(self):
        if self.frames.dtype != np.uint8 or self.frames.ndim != 4:
            raise ValueError("frames must be a T x H x W x C uint8 tensor")
        expected_t = int(round(self.duration_s * self.fps))
        if self.frames.shape[0] != expected_t:
            raise ValueError(
                f"frame count {self.frames.shape[0]} != round(duration*fps) = {expected_t}"
            )

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]


@dataclass(frozen=True)
class ClipTextPair:
    """One (clip, caption) training unit with its provenance stratum."""

    clip_id: str
    caption: str
    source: str
    quality: Optional[float] = None

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}; expected one of {SOURCES}")
        if self.quality is not None and not 0.0 <= self.quality <= 1.0:
            raise ValueError("quality must lie in [0, 1]")

    def scored(self, quality: float) -> "ClipTextPair":
        return ClipTextPair(self.clip_id, self.caption, self.source, quality)


@dataclass
class WorldConfig:
    """Everything needed to regenerate a world deterministically."""

    seed: int = 0
    num_clips: int = 64
    num_verbs: int = 6
    num_nouns: int = 6
    fps: float = 4.0
    duration_range: Tuple[float, float] = (2.0, 4.0)
    frame_size: int = 16
    channels: int = 3
    caption_templates: Tuple[str, ...] = (CAPTION_TEMPLATE,)
    caption_noise: float = 0.0
    duplicate_rate: float = 0.0
    source_probs: Tuple[float, ...] = (0.4, 0.3, 0.2, 0.1)
    max_actions_per_clip: int = 3
    min_action_s: float = 0.5
    chain_noise: float = 0.0
    holdout_fraction: float = 0.2
    target_fraction: float = 0.0
    target_hue_shift: float = 0.33
    target_speed: float = 2.0
    num_anticipation_examples: int = 0

    def __post_init__(self):
        if self.num_clips < 0:
            raise ValueError("num_clips must be >= 0")
        if self.num_verbs < 2 or self.num_nouns < 2:
            raise ValueError("vocabulary sizes must be >= 2")
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        lo, hi = self.duration_range
        if not 0 < lo <= hi:
            raise ValueError("duration_range must be 0 < lo <= hi")
        if self.frame_size < 4:
            raise ValueError("frame_size must be >= 4")
        if self.channels != 3:
            raise ValueError("only 3-channel rendering is supported")
        for name in ("caption_noise", "duplicate_rate", "chain_noise",
                     "holdout_fraction", "target_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if len(self.source_probs) != len(SOURCES):
            raise ValueError(f"source_probs must give one weight per source {SOURCES}")
        if any(p < 0 for p in self.source_probs) or sum(self.source_probs) <= 0:
            raise ValueError("source_probs must be nonnegative and sum > 0")
        if self.max_actions_per_clip < 1:
            raise ValueError("max_actions_per_clip must be >= 1")
        if self.min_action_s <= 0:
            raise ValueError("min_action_s must be positive")
        if lo < self.min_action_s:
            raise ValueError(
                "duration range cannot hold a single action interval: "
                f"min duration {lo} < min action length {self.min_action_s}"
            )

    @property
    def num_actions(self) -> int:
        return self.num_verbs * self.num_nouns


@dataclass
class WorldAnnotations:
    """Per-track ground truth, all derived from clip scripts."""

    grounding: List = field(default_factory=list)
    moments: List = field(default_factory=list)
    anticipation: List = field(default_factory=list)
    recognition: Dict[str, Tuple[int, int]] = field(default_factory=dict)
    splits: Dict[str, List[str]] = field(default_factory=lambda: {"train": [], "eval": []})
    domain: Dict[str, List[str]] = field(default_factory=lambda: {"source": [], "target": []})
