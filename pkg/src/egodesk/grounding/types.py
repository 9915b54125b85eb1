"""Domain types for natural-language temporal grounding."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..segments import TemporalSegment


@dataclass(frozen=True)
class GroundingQuery:
    """A text query against one clip, with its answer window when known."""

    clip_id: str
    query_text: str
    gt: Optional[TemporalSegment] = None
    query_id: str = ""

    def __post_init__(self):
        if not self.query_id:
            object.__setattr__(self, "query_id", f"{self.clip_id}::{self.query_text}")


@dataclass
class PhaseConfig:
    """One training phase: batch size, epoch budget, warmup, peak lr."""

    batch_size: int
    epochs: int
    warmup_epochs: int
    max_lr: float

    def __post_init__(self):
        if self.epochs > 0 and self.warmup_epochs >= max(self.epochs, 1):
            raise ValueError("warmup_epochs must be < epochs")


@dataclass
class GroundingConfig:
    """Two-phase grounding schedule plus head geometry.

    Reference-scale defaults: pretrain (batch 8, 10 epochs, 4 warmup,
    lr 2e-4), finetune (batch 2, 10 epochs, 4 warmup, lr 5e-5).  The step
    grounding track overrides the finetune batch to 8 and enables
    dropout/drop-path 0.2.
    """

    levels: int = 3
    hidden_dim: int = 64
    num_heads: int = 4
    num_blocks: int = 2
    dropout: float = 0.0
    drop_path: float = 0.0
    cross_modal_blocks: bool = False
    top_k: int = 10
    focal_alpha: float = 0.5
    focal_gamma: float = 2.0
    reg_weight: float = 1.0
    pretrain: PhaseConfig = field(
        default_factory=lambda: PhaseConfig(batch_size=8, epochs=10, warmup_epochs=4, max_lr=2e-4)
    )
    finetune: PhaseConfig = field(
        default_factory=lambda: PhaseConfig(batch_size=2, epochs=10, warmup_epochs=4, max_lr=5e-5)
    )
    seed: int = 0

    @classmethod
    def step_grounding(cls, **overrides) -> "GroundingConfig":
        """Step-grounding variant: finetune batch 8, dropout/drop-path 0.2."""
        cfg = cls(**overrides)
        cfg.finetune.batch_size = 8
        cfg.dropout = 0.2
        cfg.drop_path = 0.2
        return cfg
