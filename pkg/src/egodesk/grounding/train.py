"""Two-phase grounding training: pretrain on auto-generated narration
queries, then fine-tune on the task queries."""

from __future__ import annotations

import logging
import zlib
from typing import Callable, List, Mapping, Optional, Sequence

import numpy as np
import torch

from ..features.tracks import SnippetFeatureTrack
from ..nn import focal_bce, segment_iou_loss, set_lr, shuffled_batches, warmup_cosine_lr
from ..segments import TemporalSegment
from ..world.types import Clip
from ..world.vocab import caption_for
from .model import GroundingModel, level_stamps
from .types import GroundingConfig, GroundingQuery, PhaseConfig

log = logging.getLogger(__name__)


def synthesize_pretrain_queries(
    clips: Sequence[Clip], count: int, seed: int = 0
) -> List[GroundingQuery]:
    """Narration-style queries sampled from clip scripts.

    Stands in for a large auxiliary narration corpus: text is the caption
    rendering of a random script entry, the answer window is that entry.
    """
    rng = np.random.default_rng([seed & 0x7FFFFFFF, 11])
    queries = []
    for k in range(count):
        clip = clips[int(rng.integers(len(clips)))]
        entry = clip.script.entries[int(rng.integers(len(clip.script.entries)))]
        queries.append(
            GroundingQuery(
                clip_id=clip.id,
                query_text=caption_for(entry.verb_id, entry.noun_id),
                gt=TemporalSegment(entry.start_s, entry.end_s),
                query_id=f"naq_{k:05d}",
            )
        )
    return queries


def _assign_targets(
    track: SnippetFeatureTrack, gt: TemporalSegment, levels: int
):
    """Per-level (cls_target, reg_target, reg_mask) arrays for one query.

    A position is positive when its stamp falls inside the answer window;
    if no stamp does, the nearest level-0 stamp is forced positive so every
    query trains the regression head.
    """
    stamps = level_stamps(track, levels)
    cls_t, reg_t, reg_m = [], [], []
    any_pos = False
    for level_stamps_s, span in stamps:
        inside = (level_stamps_s >= gt.start_s) & (level_stamps_s <= gt.end_s)
        any_pos = any_pos or bool(inside.any())
        targets = np.stack(
            [
                (level_stamps_s - gt.start_s) / span,
                (gt.end_s - level_stamps_s) / span,
            ],
            axis=1,
        )
        cls_t.append(inside.astype(np.float32))
        reg_t.append(targets.astype(np.float32))
        reg_m.append(inside)
    if not any_pos:
        nearest = int(
            np.argmin(np.abs(stamps[0][0] - (gt.start_s + gt.end_s) / 2.0))
        )
        cls_t[0][nearest] = 1.0
        reg_m[0][nearest] = True
    return cls_t, reg_t, reg_m


def _pad_batch(tracks: Sequence[SnippetFeatureTrack]):
    n_max = max(t.num_snippets for t in tracks)
    dim = tracks[0].dim
    feats = np.zeros((len(tracks), n_max, dim), dtype=np.float32)
    mask = np.zeros((len(tracks), n_max), dtype=bool)
    for i, t in enumerate(tracks):
        feats[i, : t.num_snippets] = t.features
        mask[i, : t.num_snippets] = True
    return torch.from_numpy(feats), torch.from_numpy(mask)


def _phase(
    model: GroundingModel,
    samples: List[tuple],
    phase_cfg: PhaseConfig,
    cfg: GroundingConfig,
    seed: int,
    name: str,
) -> None:
    if phase_cfg.epochs == 0 or not samples:
        return
    optimizer = torch.optim.AdamW(model.parameters(), lr=phase_cfg.max_lr)
    steps_per_epoch = max(
        (len(samples) + phase_cfg.batch_size - 1) // phase_cfg.batch_size, 1
    )
    total = steps_per_epoch * phase_cfg.epochs
    warmup = steps_per_epoch * phase_cfg.warmup_epochs
    step = 0
    for epoch in range(phase_cfg.epochs):
        model.train()
        rng = np.random.default_rng(
            [seed & 0x7FFFFFFF, zlib.crc32(name.encode()) & 0xFFFF, epoch]
        )
        epoch_losses = []
        for batch in shuffled_batches(len(samples), phase_cfg.batch_size, rng):
            items = [samples[i] for i in batch]
            tracks = [it[0] for it in items]
            feats, mask = _pad_batch(tracks)
            query = torch.from_numpy(np.stack([it[1] for it in items]))
            set_lr(optimizer, warmup_cosine_lr(step, total, warmup, phase_cfg.max_lr))
            optimizer.zero_grad()
            outputs = model(feats, mask, query)

            cls_loss = feats.new_zeros(())
            reg_loss = feats.new_zeros(())
            num_pos = 0
            num_valid = 0
            for i, it in enumerate(items):
                track, _q, gt = it
                cls_t, reg_t, reg_m = _assign_targets(track, gt, cfg.levels)
                for level, (logits, offs, level_mask) in enumerate(outputs):
                    p = len(cls_t[level])
                    valid_logits = logits[i, :p]
                    target = torch.from_numpy(cls_t[level])
                    cls_loss = cls_loss + focal_bce(
                        valid_logits, target, cfg.focal_alpha, cfg.focal_gamma
                    ).sum()
                    num_valid += p
                    pos_idx = np.flatnonzero(reg_m[level])
                    if len(pos_idx):
                        idx = torch.from_numpy(pos_idx)
                        span_target = torch.from_numpy(reg_t[level][pos_idx])
                        pred = offs[i, idx]
                        reg_loss = reg_loss + segment_iou_loss(
                            -pred[:, 0], pred[:, 1], -span_target[:, 0], span_target[:, 1]
                        ).sum()
                        num_pos += len(pos_idx)
            loss = cls_loss / max(num_pos, 1) + cfg.reg_weight * reg_loss / max(num_pos, 1)
            loss.backward()
            optimizer.step()
            epoch_losses.append(float(loss.detach()))
            step += 1
        log.info(
            "grounding %s epoch %d/%d loss %.4f",
            name,
            epoch + 1,
            phase_cfg.epochs,
            float(np.mean(epoch_losses)),
        )


def _gather_samples(
    queries: Sequence[GroundingQuery],
    tracks: Mapping[str, SnippetFeatureTrack],
    embed_text: Callable[[str], np.ndarray],
) -> List[tuple]:
    samples = []
    for q in queries:
        if q.gt is None:
            raise ValueError(f"query {q.query_id} has no ground-truth window")
        if q.clip_id not in tracks:
            raise KeyError(f"no track for clip {q.clip_id}")
        samples.append(
            (
                tracks[q.clip_id],
                np.asarray(embed_text(q.query_text), dtype=np.float32),
                q.gt,
            )
        )
    return samples


def train_grounding(
    finetune_set: Sequence[GroundingQuery],
    tracks: Mapping[str, SnippetFeatureTrack],
    embed_text: Callable[[str], np.ndarray],
    cfg: GroundingConfig,
    pretrain_set: Optional[Sequence[GroundingQuery]] = None,
) -> GroundingModel:
    """Run the pretrain-then-finetune schedule and return the head.

    ``pretrain_set=None`` degrades to single-phase training; zero epochs in
    both phases return the seeded initialization unchanged.
    """
    if not finetune_set:
        raise ValueError("finetune set must be nonempty")
    finetune_samples = _gather_samples(finetune_set, tracks, embed_text)
    video_dim = finetune_samples[0][0].dim
    text_dim = finetune_samples[0][1].shape[0]
    model = GroundingModel.build(video_dim, text_dim, cfg, embed_text=embed_text)
    if pretrain_set:
        _phase(
            model,
            _gather_samples(pretrain_set, tracks, embed_text),
            cfg.pretrain,
            cfg,
            cfg.seed,
            "pretrain",
        )
    _phase(model, finetune_samples, cfg.finetune, cfg, cfg.seed, "finetune")
    model.eval()
    return model
