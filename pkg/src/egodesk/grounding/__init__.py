"""Natural-language temporal grounding: multiscale head, two-phase
training, recall evaluation."""

from ..segments import TemporalSegment
from .types import GroundingConfig, GroundingQuery, PhaseConfig
from .pyramid import PyramidLevel, build_pyramid, pool_pairs
from .model import GroundingModel, decode_positions, ground_query, level_stamps
from .train import synthesize_pretrain_queries, train_grounding
from .eval import eval_grounding, load_predictions, save_predictions

__all__ = [
    "TemporalSegment",
    "GroundingConfig",
    "GroundingQuery",
    "PhaseConfig",
    "PyramidLevel",
    "build_pyramid",
    "pool_pairs",
    "GroundingModel",
    "decode_positions",
    "ground_query",
    "level_stamps",
    "synthesize_pretrain_queries",
    "train_grounding",
    "eval_grounding",
    "load_predictions",
    "save_predictions",
]
