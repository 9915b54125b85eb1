"""Verb/noun vocabulary, caption templates and caption parsing.

Captions are first-person narration style ("C cuts the tomato"); grounding
queries are the matching question form.  All surface words come from fixed
verb/noun lists so a whitespace tokenizer with a closed vocabulary covers
the whole world, and so captions can be parsed back to (verb, noun) id sets
for relevance grading.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

VERB_WORDS = [
    "cut", "take", "put", "open", "close", "wash", "pour", "stir",
    "shake", "push", "pull", "lift", "drop", "wipe", "peel", "flip",
]

NOUN_WORDS = [
    "tomato", "onion", "cup", "knife", "plate", "pan", "door", "drawer",
    "bottle", "bowl", "towel", "spoon", "lid", "box", "jar", "apple",
]

CAPTION_TEMPLATE = "C {verb}s the {noun}"
QUERY_TEMPLATE = "when did C {verb} the {noun}"

# Words any template can introduce beyond verb/noun forms.
TEMPLATE_WORDS = ["c", "the", "when", "did"]


def _word(base_list, prefix, i):
    if i < len(base_list):
        return base_list[i]
    return f"{prefix}{i}"


def verb_word(verb_id: int) -> str:
    return _word(VERB_WORDS, "verb", verb_id)


def noun_word(noun_id: int) -> str:
    return _word(NOUN_WORDS, "noun", noun_id)


def caption_for(verb_id: int, noun_id: int, template: str = CAPTION_TEMPLATE) -> str:
    return template.format(verb=verb_word(verb_id), noun=noun_word(noun_id))


def query_for(verb_id: int, noun_id: int, template: str = QUERY_TEMPLATE) -> str:
    return template.format(verb=verb_word(verb_id), noun=noun_word(noun_id))


@dataclass
class WorldVocabulary:
    """Closed word list for a world with V verbs and Nn nouns.

    ``words`` enumerates every surface form a clean caption or query can
    contain; ``parse`` inverts caption tokens back to verb/noun id sets
    (accepting both the bare verb and the narration "-s" form).
    """

    num_verbs: int
    num_nouns: int
    _verb_forms: dict = field(init=False, repr=False)
    _noun_forms: dict = field(init=False, repr=False)

    def __post_init__(self):
        self._verb_forms = {}
        self._noun_forms = {}
        for v in range(self.num_verbs):
            w = verb_word(v)
            self._verb_forms[w] = v
            self._verb_forms[w + "s"] = v
        for n in range(self.num_nouns):
            self._noun_forms[noun_word(n)] = n

    @property
    def words(self) -> list:
        seen = dict.fromkeys(TEMPLATE_WORDS)
        for w in self._verb_forms:
            seen.setdefault(w)
        for w in self._noun_forms:
            seen.setdefault(w)
        return list(seen)

    def tokenize(self, caption: str) -> list:
        return caption.lower().split()

    def in_vocab_fraction(self, caption: str) -> float:
        toks = self.tokenize(caption)
        if not toks:
            return 0.0
        known = set(TEMPLATE_WORDS) | set(self._verb_forms) | set(self._noun_forms)
        return sum(t in known for t in toks) / len(toks)

    def parse(self, caption: str) -> tuple[set, set]:
        """Verb-id and noun-id sets mentioned by a caption."""
        verbs, nouns = set(), set()
        for tok in self.tokenize(caption):
            if tok in self._verb_forms:
                verbs.add(self._verb_forms[tok])
            elif tok in self._noun_forms:
                nouns.add(self._noun_forms[tok])
        return verbs, nouns

    def label_of(self, caption: str) -> Optional[tuple]:
        """(verb_id, noun_id) if the caption names exactly one of each."""
        verbs, nouns = self.parse(caption)
        if len(verbs) == 1 and len(nouns) == 1:
            return next(iter(verbs)), next(iter(nouns))
        return None
