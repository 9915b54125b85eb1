"""Two-tower video/text encoders.

Small stand-ins with the production interface: a patchify + spatial/temporal
attention video tower and a shallow text transformer, both projecting into a
shared unit-norm embedding space.  Attention uses explicit q/k/v/o linears so
the forward pass has a transparent weight layout.
"""

from __future__ import annotations

import math
from typing import List, Optional, Sequence

import numpy as np
import torch
from torch import nn

from .config import EncoderConfig
from .tokenizer import PAD_ID, Vocabulary


class Attention(nn.Module):
    def __init__(self, width: int, num_heads: int):
        super().__init__()
        self.num_heads = num_heads
        self.head_dim = width // num_heads
        self.q = nn.Linear(width, width)
        self.k = nn.Linear(width, width)
        self.v = nn.Linear(width, width)
        self.o = nn.Linear(width, width)

    def forward(self, x, key_mask: Optional[torch.Tensor] = None):
        b, n, w = x.shape
        def split(t):
            return t.view(b, n, self.num_heads, self.head_dim).transpose(1, 2)
        q, k, v = split(self.q(x)), split(self.k(x)), split(self.v(x))
        attn = q @ k.transpose(-2, -1) / math.sqrt(self.head_dim)
        if key_mask is not None:
            attn = attn.masked_fill(~key_mask[:, None, None, :], float("-inf"))
        attn = attn.softmax(dim=-1)
        out = (attn @ v).transpose(1, 2).reshape(b, n, w)
        return self.o(out)


class Block(nn.Module):
    def __init__(self, width: int, num_heads: int):
        super().__init__()
        self.norm1 = nn.LayerNorm(width)
        self.attn = Attention(width, num_heads)
        self.norm2 = nn.LayerNorm(width)
        self.mlp = nn.Sequential(
            nn.Linear(width, 4 * width), nn.GELU(), nn.Linear(4 * width, width)
        )

    def forward(self, x, key_mask=None):
        x = x + self.attn(self.norm1(x), key_mask)
        x = x + self.mlp(self.norm2(x))
        return x


def _masked_mean(x: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    weights = mask.float().unsqueeze(-1)
    return (x * weights).sum(dim=1) / weights.sum(dim=1).clamp(min=1.0)


class VideoTower(nn.Module):
    def __init__(self, cfg: EncoderConfig):
        super().__init__()
        self.cfg = cfg
        patch_dim = cfg.patch_size * cfg.patch_size * cfg.channels
        self.patch_proj = nn.Linear(patch_dim, cfg.video_width)
        self.spatial_pos = nn.Parameter(torch.zeros(cfg.num_patches, cfg.video_width))
        self.spatial_blocks = nn.ModuleList(
            Block(cfg.video_width, cfg.num_heads) for _ in range(cfg.spatial_depth)
        )
        self.temporal_pos = nn.Parameter(torch.zeros(cfg.max_frames, cfg.video_width))
        self.temporal_blocks = nn.ModuleList(
            Block(cfg.video_width, cfg.num_heads) for _ in range(cfg.temporal_depth)
        )
        self.head = nn.Linear(cfg.video_width, cfg.embed_dim)
        nn.init.normal_(self.spatial_pos, std=0.02)
        nn.init.normal_(self.temporal_pos, std=0.02)

    def patchify(self, frames: torch.Tensor) -> torch.Tensor:
        """B x T x H x W x C in [0,1] -> (B*T) x num_patches x patch_dim."""
        b, t, h, w, c = frames.shape
        p = self.cfg.patch_size
        x = frames.view(b * t, h // p, p, w // p, p, c)
        x = x.permute(0, 1, 3, 2, 4, 5).reshape(b * t, self.cfg.num_patches, p * p * c)
        return x

    def forward(self, frames: torch.Tensor, frame_mask: Optional[torch.Tensor] = None):
        """frames: B x T x H x W x C uint8 (or float in [0,1])."""
        if frames.dtype == torch.uint8:
            frames = frames.float() / 255.0
        b, t = frames.shape[:2]
        if t > self.cfg.max_frames:
            raise ValueError(f"clip has {t} frames, max is {self.cfg.max_frames}")
        if frames.shape[2] != self.cfg.frame_size or frames.shape[4] != self.cfg.channels:
            raise ValueError(
                f"frame shape {tuple(frames.shape[2:])} does not match encoder config"
            )
        x = (frames - 0.5) / 0.5
        x = self.patch_proj(self.patchify(x)) + self.spatial_pos
        for blk in self.spatial_blocks:
            x = blk(x)
        x = x.mean(dim=1).view(b, t, -1)
        x = x + self.temporal_pos[:t]
        if frame_mask is None:
            frame_mask = torch.ones(b, t, dtype=torch.bool, device=x.device)
        for blk in self.temporal_blocks:
            x = blk(x, key_mask=frame_mask)
        x = _masked_mean(x, frame_mask)
        x = self.head(x)
        return nn.functional.normalize(x, dim=-1)


class TextTower(nn.Module):
    def __init__(self, cfg: EncoderConfig):
        super().__init__()
        self.cfg = cfg
        self.vocab = Vocabulary(cfg.text_vocab)
        self.embed = nn.Embedding(len(self.vocab), cfg.text_width)
        self.pos = nn.Parameter(torch.zeros(cfg.max_tokens, cfg.text_width))
        self.blocks = nn.ModuleList(
            Block(cfg.text_width, cfg.num_heads) for _ in range(cfg.text_depth)
        )
        self.head = nn.Linear(cfg.text_width, cfg.embed_dim)
        nn.init.normal_(self.pos, std=0.02)

    def forward(self, token_ids: torch.Tensor, token_mask: torch.Tensor):
        x = self.embed(token_ids) + self.pos[: token_ids.shape[1]]
        for blk in self.blocks:
            x = blk(x, key_mask=token_mask)
        x = _masked_mean(x, token_mask)
        x = self.head(x)
        return nn.functional.normalize(x, dim=-1)


class TwoTowerModel(nn.Module):
    """Video tower + text tower + learnable softmax temperature."""

    TAU_MIN, TAU_MAX = 1e-3, 1.0

    def __init__(self, cfg: EncoderConfig):
        super().__init__()
        self.cfg = cfg
        self.video = VideoTower(cfg)
        self.text = TextTower(cfg)
        self.tau = nn.Parameter(
            torch.tensor(float(cfg.temperature)),
            requires_grad=cfg.temperature_learnable,
        )

    @classmethod
    def build(cls, cfg: EncoderConfig) -> "TwoTowerModel":
        """Seeded deterministic construction."""
        torch.manual_seed(cfg.seed)
        return cls(cfg)

    def temperature(self) -> torch.Tensor:
        return self.tau.clamp(self.TAU_MIN, self.TAU_MAX)

    def tokenize_batch(self, captions: Sequence[str]):
        ids = [self.text.vocab.encode(c, self.cfg.max_tokens) for c in captions]
        width = max(len(i) for i in ids)
        mask = torch.tensor(
            [[True] * len(i) + [False] * (width - len(i)) for i in ids]
        )
        padded = torch.tensor([self.text.vocab.pad(i, width) for i in ids])
        # A pad-only sequence (empty caption) still needs one attendable slot.
        mask[:, 0] = True
        return padded, mask

    @torch.no_grad()
    def encode_videos(self, frames_list: Sequence[np.ndarray]) -> np.ndarray:
        self.eval()
        out = []
        for frames in frames_list:
            t = torch.from_numpy(np.ascontiguousarray(frames)).unsqueeze(0)
            out.append(self.video(t).squeeze(0).numpy())
        return np.stack(out)

    @torch.no_grad()
    def encode_texts(self, captions: Sequence[str]) -> np.ndarray:
        self.eval()
        ids, mask = self.tokenize_batch(captions)
        return self.text(ids, mask).numpy()


def encode_video(frames: np.ndarray, model: TwoTowerModel) -> np.ndarray:
    """Unit-norm embedding of one T x H x W x C uint8 clip."""
    if frames.ndim != 4:
        raise ValueError(f"frames must be T x H x W x C, got shape {frames.shape}")
    if frames.shape[0] < 1:
        raise ValueError("clip must contain at least one frame")
    return model.encode_videos([frames])[0]


def encode_text(caption: str, model: TwoTowerModel) -> np.ndarray:
    """Unit-norm embedding of a caption; the empty string encodes the
    padding-only sequence."""
    return model.encode_texts([caption])[0]
