"""Synthetic egocentric world: clip generation, pair scoring, corpus selection."""

from .types import (
    ActionScript,
    Clip,
    ClipTextPair,
    ScriptEntry,
    WorldAnnotations,
    WorldConfig,
    SOURCES,
)
from .vocab import WorldVocabulary, caption_for, query_for
from .generate import generate_world
from .filtering import (
    EmptyCorpusError,
    FilterRules,
    score_pair,
    score_pairs,
    select_corpus,
)
from .io import (
    load_clip,
    load_pair_manifest,
    save_clip,
    save_pair_manifest,
    save_world,
    load_world,
)

__all__ = [
    "ActionScript",
    "Clip",
    "ClipTextPair",
    "ScriptEntry",
    "WorldAnnotations",
    "WorldConfig",
    "WorldVocabulary",
    "SOURCES",
    "caption_for",
    "query_for",
    "generate_world",
    "EmptyCorpusError",
    "FilterRules",
    "score_pair",
    "score_pairs",
    "select_corpus",
    "load_clip",
    "save_clip",
    "load_pair_manifest",
    "save_pair_manifest",
    "save_world",
    "load_world",
]
