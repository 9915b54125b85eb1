"""Two-tower encoders and stage-2 contrastive post-pretraining."""

from .config import EncoderConfig
from .tokenizer import PAD_ID, UNK_ID, Vocabulary
from .towers import TwoTowerModel, VideoTower, TextTower, encode_text, encode_video
from .loss import clip_loss, contrastive_loss
from .checkpoint import (
    Checkpoint,
    checkpoint_from_model,
    encoder_config_from_dict,
    load_checkpoint,
    load_model_state,
    save_checkpoint,
)
from .train import PretrainConfig, finetune_contrastive, post_pretrain

__all__ = [
    "EncoderConfig",
    "PAD_ID",
    "UNK_ID",
    "Vocabulary",
    "TwoTowerModel",
    "VideoTower",
    "TextTower",
    "encode_text",
    "encode_video",
    "clip_loss",
    "contrastive_loss",
    "Checkpoint",
    "checkpoint_from_model",
    "encoder_config_from_dict",
    "load_checkpoint",
    "load_model_state",
    "save_checkpoint",
    "PretrainConfig",
    "finetune_contrastive",
    "post_pretrain",
    "model_from_checkpoint",
]


def model_from_checkpoint(ckpt: Checkpoint) -> TwoTowerModel:
    """Rebuild a two-tower model with a checkpoint's config and weights."""
    cfg = encoder_config_from_dict(ckpt.config)
    model = TwoTowerModel.build(cfg)
    load_model_state(model, ckpt)
    model.eval()
    return model
