"""Moment detection head: C-way classification + localization per pyramid
position, gated by a learned per-position significance score.

The significance gate estimates how indicative each position is of an
action instance.  It trains as an actionness target (BCE), scales the
positive-position classification/localization losses (detached, so the
gate cannot shrink the task losses), and multiplies decoded candidate
scores at inference.
"""

from __future__ import annotations

import logging
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np
import torch
from torch import nn

from ..encoders.towers import Block
from ..features.tracks import SnippetFeatureTrack
from ..nn import focal_bce, segment_iou_loss, set_lr, shuffled_batches, warmup_cosine_lr
from ..segments import TemporalSegment
from .nms import soft_nms
from .types import DecodeConfig, DetectionOutput, MomentAnnotation, MomentsTrainConfig

log = logging.getLogger(__name__)


class MomentsModel(nn.Module):
    def __init__(self, video_dim: int, num_categories: int, levels: int = 3,
                 hidden_dim: int = 64, num_heads: int = 4, num_blocks: int = 2):
        super().__init__()
        self.num_categories = num_categories
        self.num_levels = levels
        self.proj = nn.Linear(video_dim, hidden_dim)
        self.levels = nn.ModuleList(
            nn.ModuleList(Block(hidden_dim, num_heads) for _ in range(num_blocks))
            for _ in range(levels)
        )
        self.cls_head = nn.Linear(hidden_dim, num_categories)
        self.reg_head = nn.Linear(hidden_dim, 2)
        self.sig_head = nn.Linear(hidden_dim, 1)
        # positive offset bias keeps the relu-gated regression trainable
        nn.init.constant_(self.reg_head.bias, 1.0)

    @classmethod
    def build(cls, video_dim: int, num_categories: int, seed: int = 0, **kwargs):
        torch.manual_seed(seed)
        return cls(video_dim, num_categories, **kwargs)

    def forward(self, feats: torch.Tensor, mask: torch.Tensor):
        """Per level: (cls B x P x C, offsets B x P x 2, sig B x P, mask B x P)."""
        x = self.proj(feats)
        level_mask = mask
        outputs = []
        for level, blocks in enumerate(self.levels):
            if level > 0:
                x = _pool_pairs(x)
                level_mask = _pool_mask(level_mask)
            h = x
            for blk in blocks:
                h = blk(h, key_mask=level_mask)
            outputs.append(
                (
                    self.cls_head(h),
                    torch.relu(self.reg_head(h)),
                    self.sig_head(h).squeeze(-1),
                    level_mask,
                )
            )
            x = h
        return outputs


def _pool_pairs(x: torch.Tensor) -> torch.Tensor:
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


def _track_stamps(track: SnippetFeatureTrack, levels: int) -> Tuple[List[np.ndarray], List[float]]:
    from ..grounding.model import level_stamps

    pairs = level_stamps(track, levels)
    return [p[0] for p in pairs], [p[1] for p in pairs]


def detect_moments(track: SnippetFeatureTrack, model: MomentsModel) -> DetectionOutput:
    """Raw per-position outputs for one track (candidates not yet decoded)."""
    if track.num_snippets < 1:
        raise ValueError("empty track")
    model.eval()
    with torch.no_grad():
        feats = torch.from_numpy(track.features).unsqueeze(0)
        mask = torch.ones(1, track.num_snippets, dtype=torch.bool)
        outputs = model(feats, mask)
    stamps, spans = _track_stamps(track, model.num_levels)
    duration = track.duration_s or float(track.num_snippets * track.stride / track.fps)
    return DetectionOutput(
        clip_id=track.clip_id,
        duration_s=duration,
        stamps=stamps,
        spans=spans,
        cls_logits=[o[0].squeeze(0).numpy().astype(np.float64) for o in outputs],
        loc=[o[1].squeeze(0).numpy().astype(np.float64) for o in outputs],
        sig_logits=[o[2].squeeze(0).numpy().astype(np.float64) for o in outputs],
    )


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def decode_detections(
    output: DetectionOutput, decode_cfg: DecodeConfig = None
) -> DetectionOutput:
    """Fill ``output.segments``: per-category soft-NMS'd candidate lists.

    Candidate score = sigmoid(class logit) * sigmoid(significance logit);
    offsets are scaled by the level span and clipped to the clip.
    """
    decode_cfg = decode_cfg or DecodeConfig()
    per_category: Dict[int, List[TemporalSegment]] = {}
    num_categories = output.cls_logits[0].shape[1]
    for category in range(num_categories):
        candidates = []
        for level in range(len(output.stamps)):
            scores = _sigmoid(output.cls_logits[level][:, category]) * _sigmoid(
                output.sig_logits[level]
            )
            span = output.spans[level]
            for pos, stamp in enumerate(output.stamps[level]):
                start = stamp - output.loc[level][pos, 0] * span
                end = stamp + output.loc[level][pos, 1] * span
                seg = TemporalSegment(
                    max(0.0, min(start, output.duration_s)),
                    max(0.0, min(max(end, start), output.duration_s)),
                    score=float(scores[pos]),
                )
                candidates.append((seg, level, pos))
        candidates.sort(key=lambda c: (-c[0].score, c[1], c[2]))
        pool = [c[0] for c in candidates[: decode_cfg.pre_nms_top_k]]
        per_category[category] = soft_nms(
            pool, sigma=decode_cfg.sigma, score_floor=decode_cfg.score_floor
        )[: decode_cfg.top_k]
    output.segments = per_category
    return output


def ensemble_detections(
    outputs: Sequence[DetectionOutput], decode_cfg: DecodeConfig = None
) -> DetectionOutput:
    """Mean the aligned raw tensors of several models, then decode once."""
    if not outputs:
        raise ValueError("need at least one detection output")
    first = outputs[0]
    for other in outputs[1:]:
        if other.geometry != first.geometry:
            raise ValueError(
                f"pyramid geometry mismatch: {other.geometry} vs {first.geometry}"
            )
    merged = DetectionOutput(
        clip_id=first.clip_id,
        duration_s=first.duration_s,
        stamps=[s.copy() for s in first.stamps],
        spans=list(first.spans),
        cls_logits=[
            np.mean([o.cls_logits[l] for o in outputs], axis=0)
            for l in range(len(first.cls_logits))
        ],
        loc=[
            np.mean([o.loc[l] for o in outputs], axis=0)
            for l in range(len(first.loc))
        ],
        sig_logits=[
            np.mean([o.sig_logits[l] for o in outputs], axis=0)
            for l in range(len(first.sig_logits))
        ],
    )
    return decode_detections(merged, decode_cfg)


def _assign_moment_targets(
    stamps: List[np.ndarray],
    spans: List[float],
    annotations: Sequence[MomentAnnotation],
    num_categories: int,
):
    """(cls_target P x C, reg_target P x 2, reg_mask P, actionness P) per level."""
    out = []
    for level_stamps, span in zip(stamps, spans):
        p = len(level_stamps)
        cls_t = np.zeros((p, num_categories), dtype=np.float32)
        reg_t = np.zeros((p, 2), dtype=np.float32)
        reg_m = np.zeros(p, dtype=bool)
        best_len = np.full(p, np.inf)
        for ann in annotations:
            for seg in ann.segments:
                inside = (level_stamps >= seg.start_s) & (level_stamps <= seg.end_s)
                cls_t[inside, ann.category_id] = 1.0
                # regression follows the shortest enclosing instance
                for pos in np.flatnonzero(inside):
                    if seg.length < best_len[pos]:
                        best_len[pos] = seg.length
                        reg_t[pos, 0] = (level_stamps[pos] - seg.start_s) / span
                        reg_t[pos, 1] = (seg.end_s - level_stamps[pos]) / span
                        reg_m[pos] = True
        out.append((cls_t, reg_t, reg_m, cls_t.max(axis=1)))
    return out


def train_moments(
    annotations: Sequence[MomentAnnotation],
    tracks: Mapping[str, SnippetFeatureTrack],
    num_categories: int,
    cfg: MomentsTrainConfig = None,
    levels: int = 3,
    hidden_dim: int = 64,
) -> MomentsModel:
    if not annotations:
        raise ValueError("no moment annotations")
    cfg = cfg or MomentsTrainConfig()
    by_clip: Dict[str, List[MomentAnnotation]] = {}
    for ann in annotations:
        if ann.clip_id not in tracks:
            raise KeyError(f"no track for clip {ann.clip_id}")
        by_clip.setdefault(ann.clip_id, []).append(ann)
    clip_ids = sorted(by_clip)
    video_dim = tracks[clip_ids[0]].dim
    model = MomentsModel.build(
        video_dim, num_categories, seed=cfg.seed, levels=levels, hidden_dim=hidden_dim
    )
    optimizer = torch.optim.AdamW(model.parameters(), lr=cfg.lr)
    steps_per_epoch = max((len(clip_ids) + cfg.batch_size - 1) // cfg.batch_size, 1)
    total = steps_per_epoch * cfg.epochs
    warmup = steps_per_epoch * cfg.warmup_epochs
    step = 0
    for epoch in range(cfg.epochs):
        model.train()
        rng = np.random.default_rng([cfg.seed & 0x7FFFFFFF, 17, epoch])
        epoch_losses = []
        for batch in shuffled_batches(len(clip_ids), cfg.batch_size, rng):
            batch_ids = [clip_ids[i] for i in batch]
            batch_tracks = [tracks[cid] for cid in batch_ids]
            n_max = max(t.num_snippets for t in batch_tracks)
            feats = np.zeros((len(batch_ids), n_max, video_dim), dtype=np.float32)
            mask = np.zeros((len(batch_ids), n_max), dtype=bool)
            for i, t in enumerate(batch_tracks):
                feats[i, : t.num_snippets] = t.features
                mask[i, : t.num_snippets] = True
            feats_t = torch.from_numpy(feats)
            set_lr(optimizer, warmup_cosine_lr(step, total, warmup, cfg.lr))
            optimizer.zero_grad()
            outputs = model(feats_t, torch.from_numpy(mask))

            cls_loss = feats_t.new_zeros(())
            reg_loss = feats_t.new_zeros(())
            sig_loss = feats_t.new_zeros(())
            num_pos = 0
            for i, (cid, track) in enumerate(zip(batch_ids, batch_tracks)):
                stamps, spans = _track_stamps(track, levels)
                targets = _assign_moment_targets(
                    stamps, spans, by_clip[cid], num_categories
                )
                for level, (cls_logits, offs, sig_logits, _m) in enumerate(outputs):
                    cls_t, reg_t, reg_m, act_t = targets[level]
                    p = len(act_t)
                    w = torch.sigmoid(sig_logits[i, :p]).detach()
                    target = torch.from_numpy(cls_t)
                    per_el = focal_bce(
                        cls_logits[i, :p], target, cfg.focal_alpha, cfg.focal_gamma
                    )
                    scale = 1.0 + (w[:, None] - 1.0) * target
                    cls_loss = cls_loss + (per_el * scale).sum()
                    sig_loss = sig_loss + nn.functional.binary_cross_entropy_with_logits(
                        sig_logits[i, :p], torch.from_numpy(act_t), reduction="sum"
                    )
                    pos_idx = np.flatnonzero(reg_m)
                    if len(pos_idx):
                        idx = torch.from_numpy(pos_idx)
                        span_target = torch.from_numpy(reg_t[pos_idx])
                        pred = offs[i, idx]
                        reg_loss = reg_loss + (
                            w[idx]
                            * segment_iou_loss(
                                -pred[:, 0], pred[:, 1],
                                -span_target[:, 0], span_target[:, 1],
                            )
                        ).sum()
                        num_pos += len(pos_idx)
            denom = max(num_pos, 1)
            loss = (
                cls_loss / denom
                + cfg.reg_weight * reg_loss / denom
                + cfg.sig_weight * sig_loss / denom
            )
            loss.backward()
            optimizer.step()
            epoch_losses.append(float(loss.detach()))
            step += 1
        log.info(
            "moments epoch %d/%d loss %.4f",
            epoch + 1, cfg.epochs, float(np.mean(epoch_losses)),
        )
    model.eval()
    return model
