"""Stage-1 pair scoring, deduplication and source mixing.

Scoring is rule-based: hard rules (nonempty caption, token count within
bounds) zero the score outright; otherwise the score blends a constant base
with the caption's in-vocabulary token fraction and takes a multiplicative
penalty when the same (clip, caption) was already seen.

Source mixing keeps each pair independently, with per-source keep rates
proportional to the mixing weights (the largest weight keeps everything).
The keep decision hashes (seed, source, clip, caption), which makes
selection deterministic, order-independent and idempotent: re-selecting an
already selected corpus with the same arguments returns it unchanged.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, List, Mapping, Optional, Sequence

from .types import ClipTextPair, SOURCES
from .vocab import WorldVocabulary


class EmptyCorpusError(RuntimeError):
    pass


@dataclass(frozen=True)
class FilterRules:
    vocabulary: WorldVocabulary
    min_tokens: int = 2
    max_tokens: int = 12
    vocab_weight: float = 0.5
    duplicate_penalty: float = 0.5

    def __post_init__(self):
        if self.min_tokens < 1 or self.max_tokens < self.min_tokens:
            raise ValueError("token bounds must satisfy 1 <= min <= max")
        if not 0.0 <= self.vocab_weight <= 1.0:
            raise ValueError("vocab_weight must lie in [0, 1]")
        if not 0.0 <= self.duplicate_penalty <= 1.0:
            raise ValueError("duplicate_penalty must lie in [0, 1]")


def _pair_key(pair: ClipTextPair) -> tuple:
    return (pair.clip_id, pair.caption)


def score_pair(
    pair: ClipTextPair,
    rules: FilterRules,
    seen: Optional[Iterable[tuple]] = None,
) -> float:
    """Quality in [0, 1]; exactly 0 iff a hard rule fails.

    ``seen`` holds (clip_id, caption) keys already admitted, so repeats of
    an identical pair take the duplicate penalty.
    """
    tokens = rules.vocabulary.tokenize(pair.caption)
    if not tokens:
        return 0.0
    if not rules.min_tokens <= len(tokens) <= rules.max_tokens:
        return 0.0
    frac = rules.vocabulary.in_vocab_fraction(pair.caption)
    quality = (1.0 - rules.vocab_weight) + rules.vocab_weight * frac
    if seen is not None and _pair_key(pair) in seen:
        quality *= 1.0 - rules.duplicate_penalty
    return float(quality)


def score_pairs(pairs: Sequence[ClipTextPair], rules: FilterRules) -> List[ClipTextPair]:
    """Assign a quality to every pair, penalizing repeats after the first."""
    seen: set = set()
    out = []
    for pair in pairs:
        out.append(pair.scored(score_pair(pair, rules, seen)))
        seen.add(_pair_key(pair))
    return out


def _keep_fraction(seed: int, pair: ClipTextPair) -> float:
    payload = f"{seed}|{pair.source}|{pair.clip_id}|{pair.caption}".encode()
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "little") / 2.0**64


def select_corpus(
    pairs: Sequence[ClipTextPair],
    threshold: float,
    mix_weights: Optional[Mapping[str, float]] = None,
    seed: int = 0,
    allow_empty: bool = False,
) -> List[ClipTextPair]:
    """Filter by quality, drop exact duplicates, then subsample per source.

    Pairs must already carry a quality.  Output order follows input order.
    Raises ``EmptyCorpusError`` when everything is filtered out, unless
    ``allow_empty`` is set.
    """
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    if mix_weights is None:
        mix_weights = {s: 1.0 for s in SOURCES}
    if any(w < 0 for w in mix_weights.values()):
        raise ValueError("mix weights must be nonnegative")
    w_max = max(mix_weights.values(), default=0.0)

    out: List[ClipTextPair] = []
    seen: set = set()
    for pair in pairs:
        if pair.quality is None:
            raise ValueError(f"pair {pair.clip_id!r} has no quality; score pairs first")
        if pair.quality < threshold:
            continue
        key = _pair_key(pair)
        if key in seen:
            continue
        seen.add(key)
        rate = mix_weights.get(pair.source, 0.0) / w_max if w_max > 0 else 0.0
        if _keep_fraction(seed, pair) < rate:
            out.append(pair)

    if not out and not allow_empty:
        raise EmptyCorpusError("empty corpus")
    return out
