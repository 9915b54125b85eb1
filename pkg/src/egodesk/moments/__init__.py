"""Moment detection: two-head pyramid model, soft-NMS, average mAP."""

from .types import DecodeConfig, DetectionOutput, MomentAnnotation, MomentsTrainConfig
from .nms import soft_nms
from .model import (
    MomentsModel,
    decode_detections,
    detect_moments,
    ensemble_detections,
    train_moments,
)
from .eval import (
    average_map,
    load_moment_predictions,
    save_moment_predictions,
)

__all__ = [
    "DecodeConfig",
    "DetectionOutput",
    "MomentAnnotation",
    "MomentsTrainConfig",
    "soft_nms",
    "MomentsModel",
    "decode_detections",
    "detect_moments",
    "ensemble_detections",
    "train_moments",
    "average_map",
    "load_moment_predictions",
    "save_moment_predictions",
]
