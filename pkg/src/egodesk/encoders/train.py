"""Contrastive post-pretraining of the two-tower model (stage 2)."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Mapping, Sequence

import numpy as np
import torch

from ..nn import set_lr, shuffled_batches, warmup_cosine_lr
from ..world.types import Clip, ClipTextPair
from .checkpoint import Checkpoint, checkpoint_from_model, encoder_config_from_dict
from .config import EncoderConfig
from .loss import clip_loss
from .towers import TwoTowerModel

log = logging.getLogger(__name__)


@dataclass
class PretrainConfig:
    epochs: int = 5
    lr: float = 2e-3
    batch_size: int = 16
    weight_decay: float = 0.02
    warmup_fraction: float = 0.1
    seed: int = 0


def _stack_frames(clip_list: Sequence[Clip]):
    """Pad a batch of clips to a common frame count (repeat last frame)."""
    t_max = max(c.num_frames for c in clip_list)
    batch, mask = [], []
    for c in clip_list:
        t = c.num_frames
        frames = c.frames
        if t < t_max:
            pad = np.repeat(frames[-1:], t_max - t, axis=0)
            frames = np.concatenate([frames, pad], axis=0)
        batch.append(frames)
        mask.append([True] * t + [False] * (t_max - t))
    return (
        torch.from_numpy(np.stack(batch)),
        torch.tensor(mask, dtype=torch.bool),
    )


def contrastive_steps(
    model: TwoTowerModel,
    pairs: Sequence[ClipTextPair],
    clips: Mapping[str, Clip],
    epochs: int,
    lr: float,
    batch_size: int,
    weight_decay: float,
    warmup_fraction: float,
    seed: int,
) -> List[float]:
    """Run the contrastive loop in place; returns per-epoch mean losses."""
    missing = [p.clip_id for p in pairs if p.clip_id not in clips]
    if missing:
        raise KeyError(f"pairs reference unknown clips: {missing[:5]}")
    optimizer = torch.optim.AdamW(
        [p for p in model.parameters() if p.requires_grad],
        lr=lr,
        weight_decay=weight_decay,
    )
    steps_per_epoch = max((len(pairs) + batch_size - 1) // batch_size, 1)
    total_steps = steps_per_epoch * epochs
    warmup_steps = int(total_steps * warmup_fraction)
    epoch_losses: List[float] = []
    step = 0
    for epoch in range(epochs):
        model.train()
        rng = np.random.default_rng([seed & 0x7FFFFFFF, epoch])
        losses = []
        for batch_idx in shuffled_batches(len(pairs), batch_size, rng):
            batch_pairs = [pairs[i] for i in batch_idx]
            frames, frame_mask = _stack_frames([clips[p.clip_id] for p in batch_pairs])
            token_ids, token_mask = model.tokenize_batch([p.caption for p in batch_pairs])
            set_lr(optimizer, warmup_cosine_lr(step, total_steps, warmup_steps, lr))
            optimizer.zero_grad()
            v = model.video(frames, frame_mask)
            t = model.text(token_ids, token_mask)
            loss = clip_loss(v, t, model.temperature())
            loss.backward()
            optimizer.step()
            losses.append(float(loss.detach()))
            step += 1
        epoch_losses.append(float(np.mean(losses)))
        log.info("stage2 epoch %d/%d mean loss %.4f", epoch + 1, epochs, epoch_losses[-1])
    return epoch_losses


def post_pretrain(
    pairs: Sequence[ClipTextPair],
    clips: Mapping[str, Clip],
    cfg: EncoderConfig,
    train_cfg: PretrainConfig = None,
) -> Checkpoint:
    """Stage-2 training from scratch-initialized towers.

    With ``epochs == 0`` the returned checkpoint holds the seeded
    initialization unchanged.
    """
    if not pairs:
        raise ValueError("empty corpus")
    train_cfg = train_cfg or PretrainConfig()
    model = TwoTowerModel.build(cfg)
    epoch_losses: List[float] = []
    if train_cfg.epochs > 0:
        epoch_losses = contrastive_steps(
            model,
            pairs,
            clips,
            epochs=train_cfg.epochs,
            lr=train_cfg.lr,
            batch_size=train_cfg.batch_size,
            weight_decay=train_cfg.weight_decay,
            warmup_fraction=train_cfg.warmup_fraction,
            seed=train_cfg.seed,
        )
    meta = {
        "stage": "post_pretrain",
        "epochs": train_cfg.epochs,
        "epoch_mean_loss": epoch_losses,
        "num_pairs": len(pairs),
        "temperature": float(model.temperature().detach()),
    }
    return checkpoint_from_model(model, cfg, meta)


def finetune_contrastive(
    ckpt: Checkpoint,
    pairs: Sequence[ClipTextPair],
    clips: Mapping[str, Clip],
    epochs: int,
    lr: float,
    batch_size: int,
    warmup_epochs: int,
    seed: int = 0,
) -> Checkpoint:
    """Continue contrastive training from an existing checkpoint."""
    if not pairs:
        raise ValueError("empty corpus")
    cfg = encoder_config_from_dict(ckpt.config)
    model = TwoTowerModel.build(cfg)
    from .checkpoint import load_model_state

    load_model_state(model, ckpt)
    epoch_losses: List[float] = []
    if epochs > 0:
        steps_per_epoch = max((len(pairs) + batch_size - 1) // batch_size, 1)
        warmup_fraction = warmup_epochs * steps_per_epoch / max(steps_per_epoch * epochs, 1)
        epoch_losses = contrastive_steps(
            model,
            pairs,
            clips,
            epochs=epochs,
            lr=lr,
            batch_size=batch_size,
            weight_decay=0.02,
            warmup_fraction=warmup_fraction,
            seed=seed,
        )
    meta = {
        "stage": "finetune_retrieval",
        "epochs": epochs,
        "epoch_mean_loss": epoch_losses,
        "num_pairs": len(pairs),
        "temperature": float(model.temperature().detach()),
    }
    return checkpoint_from_model(model, cfg, meta)
