"""Multiscale multimodal grounding head.

Projects snippet features and a query embedding into a shared width, runs
per-level transformer blocks (query injected additively, or through
cross-attention layers inside each block when ``cross_modal_blocks`` is
set), and emits a foreground logit plus nonnegative start/end offsets at
every pyramid position.  Decoding is anchor-free: position with stamp t and
offsets (a, b) yields the interval [t - a * span, t + b * span].
"""

from __future__ import annotations

import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import torch
from torch import nn

from ..features.tracks import SnippetFeatureTrack
from ..nn import DropPath
from ..segments import TemporalSegment
from .pyramid import pool_pairs
from .types import GroundingConfig


class CrossAttention(nn.Module):
    def __init__(self, width: int, num_heads: int):
        super().__init__()
        self.num_heads = num_heads
        self.head_dim = width // num_heads
        self.q = nn.Linear(width, width)
        self.k = nn.Linear(width, width)
        self.v = nn.Linear(width, width)
        self.o = nn.Linear(width, width)

    def forward(self, x, context):
        b, n, w = x.shape
        m = context.shape[1]
        q = self.q(x).view(b, n, self.num_heads, self.head_dim).transpose(1, 2)
        k = self.k(context).view(b, m, self.num_heads, self.head_dim).transpose(1, 2)
        v = self.v(context).view(b, m, self.num_heads, self.head_dim).transpose(1, 2)
        attn = (q @ k.transpose(-2, -1) / math.sqrt(self.head_dim)).softmax(dim=-1)
        return self.o((attn @ v).transpose(1, 2).reshape(b, n, w))


class FusionBlock(nn.Module):
    """Pre-LN self-attention block with optional query cross-attention."""

    def __init__(self, width: int, num_heads: int, dropout: float,
                 drop_path: float, cross: bool):
        super().__init__()
        self.norm1 = nn.LayerNorm(width)
        self.self_attn = CrossAttention(width, num_heads)
        self.cross = cross
        if cross:
            self.norm_q = nn.LayerNorm(width)
            self.cross_attn = CrossAttention(width, num_heads)
        self.norm2 = nn.LayerNorm(width)
        self.mlp = nn.Sequential(
            nn.Linear(width, 4 * width),
            nn.GELU(),
            nn.Dropout(dropout),
            nn.Linear(4 * width, width),
        )
        self.drop = nn.Dropout(dropout)
        self.drop_path = DropPath(drop_path)

    def forward(self, x, query_tokens):
        h = self.norm1(x)
        x = x + self.drop_path(self.drop(self.self_attn(h, h)))
        if self.cross:
            x = x + self.drop_path(self.cross_attn(self.norm_q(x), query_tokens))
        x = x + self.drop_path(self.drop(self.mlp(self.norm2(x))))
        return x


class GroundingModel(nn.Module):
    def __init__(self, video_dim: int, text_dim: int, cfg: GroundingConfig,
                 embed_text: Optional[Callable[[str], np.ndarray]] = None):
        super().__init__()
        self.cfg = cfg
        self.embed_text = embed_text
        width = cfg.hidden_dim
        self.vid_proj = nn.Linear(video_dim, width)
        self.txt_proj = nn.Linear(text_dim, width)
        self.levels = nn.ModuleList(
            nn.ModuleList(
                FusionBlock(width, cfg.num_heads, cfg.dropout, cfg.drop_path,
                            cfg.cross_modal_blocks)
                for _ in range(cfg.num_blocks)
            )
            for _ in range(cfg.levels)
        )
        self.cls_head = nn.Linear(width, 1)
        self.reg_head = nn.Linear(width, 2)
        # positive offset bias keeps the relu-gated regression trainable
        nn.init.constant_(self.reg_head.bias, 1.0)

    @classmethod
    def build(cls, video_dim: int, text_dim: int, cfg: GroundingConfig,
              embed_text=None) -> "GroundingModel":
        torch.manual_seed(cfg.seed)
        return cls(video_dim, text_dim, cfg, embed_text)

    def forward(self, feats: torch.Tensor, mask: torch.Tensor, query: torch.Tensor):
        """feats B x N x Dv, mask B x N bool, query B x Dt.

        Returns per level: (cls_logits B x P, offsets B x P x 2, mask B x P).
        """
        q = self.txt_proj(query)
        x = self.vid_proj(feats) + q[:, None, :]
        q_tokens = q[:, None, :]
        level_mask = mask
        outputs = []
        for level, blocks in enumerate(self.levels):
            if level > 0:
                x = _pool_pairs_torch(x)
                level_mask = _pool_mask(level_mask)
            h = x
            for blk in blocks:
                h = blk(h, q_tokens)
            outputs.append(
                (
                    self.cls_head(h).squeeze(-1),
                    torch.relu(self.reg_head(h)),
                    level_mask,
                )
            )
            x = h
        return outputs


def _pool_pairs_torch(x: torch.Tensor) -> torch.Tensor:
    b, n = x.shape[:2]
    if n <= 1:
        return x
    pairs = x[:, : (n // 2) * 2].reshape(b, n // 2, 2, -1).mean(dim=2)
    if n % 2:
        return torch.cat([pairs, x[:, -1:]], dim=1)
    return pairs


def _pool_mask(mask: torch.Tensor) -> torch.Tensor:
    b, n = mask.shape
    if n <= 1:
        return mask
    pairs = mask[:, : (n // 2) * 2].reshape(b, n // 2, 2).any(dim=2)
    if n % 2:
        return torch.cat([pairs, mask[:, -1:]], dim=1)
    return pairs


def level_stamps(track: SnippetFeatureTrack, levels: int) -> List[Tuple[np.ndarray, float]]:
    """(stamps, span_s) per level for one track, matching the model pooling."""
    stamps = track.centers_s()
    base_span = track.stride / track.fps
    out = [(stamps.copy(), base_span)]
    for level in range(1, levels):
        stamps = pool_pairs(stamps)
        out.append((stamps, base_span * 2**level))
    return out


def decode_positions(
    cls_logits: Sequence[np.ndarray],
    offsets: Sequence[np.ndarray],
    stamps: Sequence[Tuple[np.ndarray, float]],
    duration_s: float,
    top_k: int,
) -> List[TemporalSegment]:
    """Rank every pyramid position and decode the top-k segments.

    Ties are broken by (level, position) so equal scores rank stably.
    """
    candidates = []
    for level, (logits, offs) in enumerate(zip(cls_logits, offsets)):
        level_stamps_s, span = stamps[level]
        scores = 1.0 / (1.0 + np.exp(-np.asarray(logits, dtype=np.float64)))
        for pos in range(len(level_stamps_s)):
            start = level_stamps_s[pos] - float(offs[pos, 0]) * span
            end = level_stamps_s[pos] + float(offs[pos, 1]) * span
            candidates.append((float(scores[pos]), level, pos, start, end))
    candidates.sort(key=lambda c: (-c[0], c[1], c[2]))
    out = []
    for score, _level, _pos, start, end in candidates[:top_k]:
        out.append(
            TemporalSegment(
                max(0.0, min(start, duration_s)),
                max(0.0, min(max(end, start), duration_s)),
                score=score,
            ).clipped(duration_s)
        )
    return out


def ground_query(
    track: SnippetFeatureTrack,
    query_text: str,
    model: GroundingModel,
    query_embedding: Optional[np.ndarray] = None,
) -> List[TemporalSegment]:
    """Score-descending candidate windows for one query against one track."""
    if track.num_snippets < 1:
        raise ValueError("empty track")
    if query_embedding is None:
        if model.embed_text is None:
            raise ValueError("model has no text embedder; pass query_embedding")
        query_embedding = model.embed_text(query_text)
    model.eval()
    with torch.no_grad():
        feats = torch.from_numpy(track.features).unsqueeze(0)
        mask = torch.ones(1, track.num_snippets, dtype=torch.bool)
        query = torch.from_numpy(np.asarray(query_embedding, dtype=np.float32)).unsqueeze(0)
        outputs = model(feats, mask, query)
    cls_logits = [o[0].squeeze(0).numpy() for o in outputs]
    offsets = [o[1].squeeze(0).numpy() for o in outputs]
    stamps = level_stamps(track, model.cfg.levels)
    duration = track.duration_s or float(track.num_snippets * track.stride / track.fps)
    return decode_positions(cls_logits, offsets, stamps, duration, model.cfg.top_k)
