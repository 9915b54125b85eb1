"""Symmetric video-text contrastive loss.

``contrastive_loss`` is the reference implementation in float64 numpy and
returns analytic gradients with respect to both embedding matrices; the
training loop uses the equivalent torch criterion ``clip_loss``.

With similarity matrix S = V Txᵀ / τ and the diagonal as targets, the loss
is the mean of the row-wise and column-wise cross entropies, halved:

    loss = 1/(2B) · Σ_i [ (lse(S[i,:]) − S[i,i]) + (lse(S[:,i]) − S[i,i]) ]

so the gradient w.r.t. S is ((P_row − I) + (P_col − I)) / (2B), with P_row
and P_col the row/column softmaxes.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np
import torch


def contrastive_loss(
    video: np.ndarray, text: np.ndarray, tau: float
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Loss plus gradients (d loss / d video, d loss / d text).

    Expects B x D matrices with matching shapes and ``tau > 0``.  The B = 1
    case is exactly zero (softmax over a single logit).
    """
    if tau <= 0:
        raise ValueError(f"temperature must be positive, got {tau}")
    v = np.asarray(video, dtype=np.float64)
    t = np.asarray(text, dtype=np.float64)
    if v.ndim != 2 or v.shape != t.shape:
        raise ValueError(f"embedding shapes must match, got {v.shape} vs {t.shape}")
    b = v.shape[0]
    if b < 1:
        raise ValueError("batch must contain at least one pair")

    s = v @ t.T / tau
    s_row = s - s.max(axis=1, keepdims=True)
    p_row = np.exp(s_row)
    p_row /= p_row.sum(axis=1, keepdims=True)
    s_col = s - s.max(axis=0, keepdims=True)
    p_col = np.exp(s_col)
    p_col /= p_col.sum(axis=0, keepdims=True)

    diag = np.arange(b)
    row_ce = -np.log(p_row[diag, diag])
    col_ce = -np.log(p_col[diag, diag])
    loss = float((row_ce.mean() + col_ce.mean()) / 2.0)

    eye = np.eye(b)
    ds = ((p_row - eye) + (p_col - eye)) / (2.0 * b * tau)
    grad_v = ds @ t
    grad_t = ds.T @ v
    return loss, grad_v, grad_t


def clip_loss(video: torch.Tensor, text: torch.Tensor, tau: torch.Tensor) -> torch.Tensor:
    """Torch counterpart of ``contrastive_loss`` for training."""
    sim = video @ text.T / tau
    targets = torch.arange(sim.shape[0], device=sim.device)
    return (
        torch.nn.functional.cross_entropy(sim, targets)
        + torch.nn.functional.cross_entropy(sim.T, targets)
    ) / 2.0
