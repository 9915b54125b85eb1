"""Desk-scale egocentric video-language pipeline.

Three stages over a procedurally generated first-person world:

1. corpus selection (``egodesk.world``): synthetic clips with latent
   action scripts, pair scoring, dedup and source mixing;
2. video-text contrastive post-pretraining (``egodesk.encoders``);
3. downstream adaptation heads and the metric suite for the grounding,
   moment detection, anticipation, recognition, retrieval and domain
   adaptation tracks.
"""

__version__ = "0.1.0"
