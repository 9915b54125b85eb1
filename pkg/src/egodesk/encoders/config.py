"""Two-tower encoder configuration."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple


@dataclass
class EncoderConfig:
    """Geometry and training-relevant constants of both towers.

    ``text_vocab`` is the closed word list of the world; padding and
    unknown ids are prepended by the tokenizer.  ``bf16`` is recorded for
    configuration completeness but desk-scale CPU builds ignore it.
    """

    embed_dim: int = 32
    frame_size: int = 16
    channels: int = 3
    patch_size: int = 8
    video_width: int = 32
    spatial_depth: int = 1
    temporal_depth: int = 2
    max_frames: int = 64
    text_vocab: Tuple[str, ...] = field(default_factory=tuple)
    text_width: int = 32
    text_depth: int = 2
    max_tokens: int = 16
    num_heads: int = 4
    temperature: float = 0.07
    temperature_learnable: bool = True
    bf16: bool = False
    seed: int = 0

    def __post_init__(self):
        self.text_vocab = tuple(self.text_vocab)
        if self.embed_dim < 8:
            raise ValueError("embed_dim must be >= 8")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.frame_size % self.patch_size != 0:
            raise ValueError("frame_size must be a multiple of patch_size")
        for name in ("video_width", "text_width"):
            if getattr(self, name) % self.num_heads != 0:
                raise ValueError(f"{name} must be divisible by num_heads")

    @property
    def num_patches(self) -> int:
        return (self.frame_size // self.patch_size) ** 2
