"""Domain types for category-conditioned moment detection."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from ..segments import TemporalSegment


@dataclass(frozen=True)
class MomentAnnotation:
    """All ground-truth segments of one action category inside one clip."""

    clip_id: str
    category_id: int
    segments: tuple

    def __post_init__(self):
        if self.category_id < 0:
            raise ValueError("category_id must be >= 0")
        object.__setattr__(self, "segments", tuple(self.segments))


@dataclass
class DetectionOutput:
    """Raw per-position head outputs plus decoded candidates.

    ``cls_logits[l]`` is P_l x C, ``loc[l]`` is P_l x 2 (pre-activation
    offsets) and ``sig_logits[l]`` is P_l, one entry per pyramid level.
    ``segments`` maps category id to a score-descending candidate list and
    is filled by decoding.
    """

    clip_id: str
    duration_s: float
    stamps: List[np.ndarray]
    spans: List[float]
    cls_logits: List[np.ndarray]
    loc: List[np.ndarray]
    sig_logits: List[np.ndarray]
    segments: Dict[int, List[TemporalSegment]] = field(default_factory=dict)

    @property
    def geometry(self) -> tuple:
        return tuple((len(s), c.shape[1]) for s, c in zip(self.stamps, self.cls_logits))


@dataclass
class MomentsTrainConfig:
    epochs: int = 30
    batch_size: int = 4
    lr: float = 1e-3
    warmup_epochs: int = 2
    focal_alpha: float = 0.5
    focal_gamma: float = 2.0
    reg_weight: float = 1.0
    sig_weight: float = 0.5
    seed: int = 0


@dataclass
class DecodeConfig:
    sigma: float = 0.5
    score_floor: float = 1e-4
    pre_nms_top_k: int = 64
    top_k: int = 16
