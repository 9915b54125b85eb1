"""Procedural world generation.

Each clip renders its latent script as a moving colored square: the noun id
picks the hue, the verb id picks the motion pattern (angular rate, spin
direction, phase).  A small encoder can therefore recover both labels from
pixels, which is what makes desk-scale training runs informative.
"""

from __future__ import annotations

import colorsys
import math
from typing import List, Tuple

import numpy as np

from ..anticipation.types import FUTURE_LEN, HISTORY_LEN, ActionToken, AnticipationExample
from ..grounding.types import GroundingQuery
from ..moments.types import MomentAnnotation
from ..segments import TemporalSegment
from .types import (
    ActionScript,
    Clip,
    ClipTextPair,
    ScriptEntry,
    SOURCES,
    WorldAnnotations,
    WorldConfig,
)
from .vocab import QUERY_TEMPLATE, caption_for, noun_word, verb_word

_BACKGROUND = 0.45
_NOISE_AMPLITUDE = 0.02


def _rng_for(config: WorldConfig, *stream) -> np.random.Generator:
    return np.random.default_rng([config.seed & 0x7FFFFFFF, *stream])


def _noun_color(noun_id: int, num_nouns: int, hue_shift: float) -> np.ndarray:
    hue = (noun_id / num_nouns + hue_shift) % 1.0
    return np.array(colorsys.hsv_to_rgb(hue, 0.9, 1.0), dtype=np.float64)


def _verb_motion(verb_id: int, num_verbs: int) -> Tuple[float, float, float]:
    """(cycles per second, spin direction, phase offset) for a verb."""
    rate = 0.35 * (1 + verb_id)
    direction = 1.0 if verb_id % 2 == 0 else -1.0
    phase = 2.0 * math.pi * verb_id / max(num_verbs, 1)
    return rate, direction, phase


def render_frames(
    script: ActionScript,
    num_frames: int,
    config: WorldConfig,
    rng: np.random.Generator,
    hue_shift: float = 0.0,
    speed: float = 1.0,
) -> np.ndarray:
    size = config.frame_size
    frames = np.full((num_frames, size, size, 3), _BACKGROUND, dtype=np.float64)
    frames += rng.uniform(-_NOISE_AMPLITUDE, _NOISE_AMPLITUDE, size=frames.shape)

    half = max(size // 6, 1)
    radius = 0.3 * size
    for entry in script.entries:
        color = _noun_color(entry.noun_id, config.num_nouns, hue_shift)
        rate, direction, phase = _verb_motion(entry.verb_id, config.num_verbs)
        f0 = int(round(entry.start_s * config.fps))
        f1 = int(round(entry.end_s * config.fps))
        for t in range(max(f0, 0), min(f1, num_frames)):
            elapsed = speed * (t - f0) / config.fps
            angle = phase + direction * 2.0 * math.pi * rate * elapsed
            cx = size / 2 + radius * math.cos(angle)
            cy = size / 2 + radius * math.sin(angle)
            y0, y1 = int(round(cy - half)), int(round(cy + half))
            x0, x1 = int(round(cx - half)), int(round(cx + half))
            frames[t, max(y0, 0): max(y1, 0), max(x0, 0): max(x1, 0)] = color

    return np.clip(frames * 255.0, 0, 255).round().astype(np.uint8)


def _draw_script(config: WorldConfig, rng: np.random.Generator) -> Tuple[ActionScript, float]:
    lo, hi = config.duration_range
    duration = float(rng.uniform(lo, hi))
    max_fit = max(int(duration / config.min_action_s), 1)
    count = int(rng.integers(1, min(config.max_actions_per_clip, max_fit) + 1))
    weights = rng.uniform(0.5, 1.5, size=count)
    slack = duration - count * config.min_action_s
    lengths = config.min_action_s + slack * weights / weights.sum()
    entries = []
    cursor = 0.0
    for length in lengths:
        verb = int(rng.integers(config.num_verbs))
        noun = int(rng.integers(config.num_nouns))
        start = round(cursor, 4)
        end = round(min(cursor + float(length), duration), 4)
        entries.append(ScriptEntry(verb, noun, start, end))
        cursor += float(length)
    return ActionScript(tuple(entries)), round(duration, 4)


def _corrupt_caption(caption: str, rng: np.random.Generator) -> str:
    tokens = caption.split()
    idx = int(rng.integers(len(tokens)))
    junk = "".join(rng.choice(list("zxqvjkw"), size=5))
    tokens[idx] = junk
    return " ".join(tokens)


def _split_ids(ids: List[str], fraction: float, rng: np.random.Generator):
    n_eval = int(round(len(ids) * fraction))
    order = rng.permutation(len(ids))
    eval_set = {ids[i] for i in order[:n_eval]}
    train = [cid for cid in ids if cid not in eval_set]
    eval_ = [cid for cid in ids if cid in eval_set]
    return train, eval_


def _anticipation_chain(
    covered: List[int], length: int, config: WorldConfig, rng: np.random.Generator
) -> List[int]:
    """Action-id walk over the covered label set.

    With chain_noise 0 the walk is the deterministic cycle through the
    sorted covered ids; noise injects uniform jumps.
    """
    pos = int(rng.integers(len(covered)))
    chain = [covered[pos]]
    for _ in range(length - 1):
        if config.chain_noise > 0 and rng.random() < config.chain_noise:
            pos = int(rng.integers(len(covered)))
        else:
            pos = (pos + 1) % len(covered)
        chain.append(covered[pos])
    return chain


def cyclic_successor(action_id: int, covered: List[int]) -> int:
    """Next action id in the noise-free chain, given the covered id set."""
    ordered = sorted(covered)
    return ordered[(ordered.index(action_id) + 1) % len(ordered)]


def generate_world(config: WorldConfig):
    """Build (clips, pairs, annotations) deterministically from the config.

    Every annotation references a rendered clip, and every caption names a
    (verb, noun) present in its clip's script.
    """
    clips: List[Clip] = []
    pairs: List[ClipTextPair] = []
    ann = WorldAnnotations()

    if config.num_clips == 0:
        return clips, pairs, ann

    domain_rng = _rng_for(config, 1)
    n_target = int(round(config.num_clips * config.target_fraction))
    target_idx = set(
        int(i) for i in domain_rng.permutation(config.num_clips)[:n_target]
    )

    for i in range(config.num_clips):
        rng = _rng_for(config, 2, i)
        script, duration = _draw_script(config, rng)
        num_frames = int(round(duration * config.fps))
        shifted = i in target_idx
        frames = render_frames(
            script,
            num_frames,
            config,
            rng,
            hue_shift=config.target_hue_shift if shifted else 0.0,
            speed=config.target_speed if shifted else 1.0,
        )
        clip = Clip(
            id=f"clip_{i:05d}",
            frames=frames,
            fps=config.fps,
            duration_s=duration,
            script=script,
        )
        script.validate_against(duration, config.num_verbs, config.num_nouns)
        clips.append(clip)

    pair_rng = _rng_for(config, 3)
    source_p = np.asarray(config.source_probs, dtype=np.float64)
    source_p = source_p / source_p.sum()
    for clip in clips:
        first = clip.script.entries[0]
        template = config.caption_templates[
            int(pair_rng.integers(len(config.caption_templates)))
        ]
        caption = caption_for(first.verb_id, first.noun_id, template)
        if config.caption_noise > 0 and pair_rng.random() < config.caption_noise:
            caption = _corrupt_caption(caption, pair_rng)
        source = SOURCES[int(pair_rng.choice(len(SOURCES), p=source_p))]
        pair = ClipTextPair(clip_id=clip.id, caption=caption, source=source)
        pairs.append(pair)
        if config.duplicate_rate > 0 and pair_rng.random() < config.duplicate_rate:
            pairs.append(ClipTextPair(clip_id=clip.id, caption=caption, source=source))

    # Recognition labels: a clip is labelled by its opening action.
    for clip in clips:
        first = clip.script.entries[0]
        ann.recognition[clip.id] = (first.verb_id, first.noun_id)

    # Grounding: one query per clip over a randomly chosen script entry.
    query_rng = _rng_for(config, 4)
    for clip in clips:
        entry = clip.script.entries[int(query_rng.integers(len(clip.script.entries)))]
        ann.grounding.append(
            GroundingQuery(
                clip_id=clip.id,
                query_text=QUERY_TEMPLATE.format(
                    verb=verb_word(entry.verb_id),
                    noun=noun_word(entry.noun_id),
                ),
                gt=TemporalSegment(entry.start_s, entry.end_s),
                query_id=f"q_{clip.id}",
            )
        )

    # Moments: verb ids are the category vocabulary.
    for clip in clips:
        by_verb = {}
        for entry in clip.script.entries:
            by_verb.setdefault(entry.verb_id, []).append(
                TemporalSegment(entry.start_s, entry.end_s)
            )
        for verb_id, segments in sorted(by_verb.items()):
            ann.moments.append(
                MomentAnnotation(clip_id=clip.id, category_id=verb_id, segments=segments)
            )

    # Anticipation: chains over action ids that have at least one labelled clip.
    if config.num_anticipation_examples > 0:
        lta_rng = _rng_for(config, 5)
        by_action = {}
        for clip_id, (v, n) in ann.recognition.items():
            by_action.setdefault(v * config.num_nouns + n, []).append(clip_id)
        covered = sorted(by_action)
        for k in range(config.num_anticipation_examples):
            chain = _anticipation_chain(
                covered, HISTORY_LEN + FUTURE_LEN, config, lta_rng
            )
            history = tuple(
                ActionToken.from_action_id(a, config.num_nouns)
                for a in chain[:HISTORY_LEN]
            )
            future = tuple(
                ActionToken.from_action_id(a, config.num_nouns)
                for a in chain[HISTORY_LEN:]
            )
            history_clips = tuple(
                by_action[a][int(lta_rng.integers(len(by_action[a])))]
                for a in chain[:HISTORY_LEN]
            )
            ann.anticipation.append(
                AnticipationExample(
                    example_id=f"lta_{k:05d}",
                    history=history,
                    future=future,
                    history_clip_ids=history_clips,
                )
            )

    split_rng = _rng_for(config, 6)
    non_target = [c.id for i, c in enumerate(clips) if i not in target_idx]
    train_ids, eval_ids = _split_ids(non_target, config.holdout_fraction, split_rng)
    ann.splits = {"train": train_ids, "eval": eval_ids}
    ann.domain = {
        "source": non_target,
        "target": [c.id for i, c in enumerate(clips) if i in target_idx],
    }
    return clips, pairs, ann
