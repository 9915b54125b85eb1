"""Domain types for long-horizon action anticipation."""

from __future__ import annotations

from dataclasses import dataclass

HISTORY_LEN = 8
FUTURE_LEN = 20


@dataclass(frozen=True)
class ActionToken:
    """A (verb, noun) pair; the flat action id is verb * num_nouns + noun."""

    verb_id: int
    noun_id: int

    def action_id(self, num_nouns: int) -> int:
        return self.verb_id * num_nouns + self.noun_id

    @classmethod
    def from_action_id(cls, action_id: int, num_nouns: int) -> "ActionToken":
        verb, noun = divmod(action_id, num_nouns)
        return cls(verb_id=verb, noun_id=noun)


@dataclass(frozen=True)
class AnticipationExample:
    """Eight observed actions and the twenty that follow them.

    ``history_clip_ids`` names one rendered clip per history step so the
    observed side can be re-derived from video at inference time.
    """

    example_id: str
    history: tuple
    future: tuple
    history_clip_ids: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "history", tuple(self.history))
        object.__setattr__(self, "future", tuple(self.future))
        object.__setattr__(self, "history_clip_ids", tuple(self.history_clip_ids))
        if len(self.history) != HISTORY_LEN:
            raise ValueError(f"history must hold {HISTORY_LEN} actions")
        if len(self.future) != FUTURE_LEN:
            raise ValueError(f"future must hold {FUTURE_LEN} actions")
        if self.history_clip_ids and len(self.history_clip_ids) != HISTORY_LEN:
            raise ValueError("history_clip_ids must align with history")


@dataclass
class LTATrainConfig:
    """Anticipation fine-tuning schedule; gamma is a per-epoch lr decay."""

    lr: float = 3e-4
    gamma: float = 0.85
    batch_size: int = 32
    epochs: int = 3
    candidates: int = 5
    temperature: float = 1.0
    hidden_dim: int = 64
    num_blocks: int = 2
    num_heads: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.candidates < 1:
            raise ValueError("candidates must be >= 1")
