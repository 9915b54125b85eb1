"""Small shared training utilities for the task heads."""

from __future__ import annotations

import math
from typing import Iterator, List, Sequence

import numpy as np
import torch
from torch import nn


def warmup_cosine_lr(step: int, total_steps: int, warmup_steps: int, max_lr: float) -> float:
    """Linear warmup to ``max_lr`` then cosine decay to zero."""
    if total_steps <= 0:
        return max_lr
    if warmup_steps > 0 and step < warmup_steps:
        return max_lr * (step + 1) / warmup_steps
    span = max(total_steps - warmup_steps, 1)
    progress = min(max(step - warmup_steps, 0) / span, 1.0)
    return max_lr * 0.5 * (1.0 + math.cos(math.pi * progress))


def set_lr(optimizer: torch.optim.Optimizer, lr: float) -> None:
    for group in optimizer.param_groups:
        group["lr"] = lr


def shuffled_batches(
    count: int, batch_size: int, rng: np.random.Generator
) -> Iterator[List[int]]:
    order = rng.permutation(count)
    for i in range(0, count, batch_size):
        yield [int(j) for j in order[i : i + batch_size]]


def focal_bce(
    logits: torch.Tensor,
    targets: torch.Tensor,
    alpha: float = 0.5,
    gamma: float = 2.0,
) -> torch.Tensor:
    """Per-element focal binary cross entropy (no reduction)."""
    p = torch.sigmoid(logits)
    ce = nn.functional.binary_cross_entropy_with_logits(
        logits, targets, reduction="none"
    )
    p_t = p * targets + (1 - p) * (1 - targets)
    alpha_t = alpha * targets + (1 - alpha) * (1 - targets)
    return alpha_t * (1 - p_t).pow(gamma) * ce


class DropPath(nn.Module):
    """Per-sample residual-branch dropout (stochastic depth)."""

    def __init__(self, rate: float = 0.0):
        super().__init__()
        self.rate = rate

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if self.rate == 0.0 or not self.training:
            return x
        keep = 1.0 - self.rate
        shape = (x.shape[0],) + (1,) * (x.ndim - 1)
        mask = torch.bernoulli(torch.full(shape, keep, device=x.device))
        return x * mask / keep


def segment_iou_loss(
    pred_start: torch.Tensor,
    pred_end: torch.Tensor,
    gt_start: torch.Tensor,
    gt_end: torch.Tensor,
) -> torch.Tensor:
    """1 - IoU between predicted and target intervals (no reduction)."""
    inter = (torch.minimum(pred_end, gt_end) - torch.maximum(pred_start, gt_start)).clamp(min=0)
    union = (pred_end - pred_start) + (gt_end - gt_start) - inter
    return 1.0 - inter / union.clamp(min=1e-9)
