"""Whitespace tokenizer over a closed vocabulary.

Id 0 is padding, id 1 the reserved unknown-token id, then the configured
words in list order.  Captions are lowercased and split on whitespace; the
empty caption maps to a single padding token so every string encodes to a
nonempty sequence.
"""

from __future__ import annotations

from typing import List, Sequence

PAD_ID = 0
UNK_ID = 1


class Vocabulary:
    def __init__(self, words: Sequence[str]):
        self.words = tuple(words)
        self._ids = {}
        for i, w in enumerate(self.words):
            self._ids.setdefault(w.lower(), i + 2)

    def __len__(self) -> int:
        return len(self.words) + 2

    def token_id(self, token: str) -> int:
        return self._ids.get(token.lower(), UNK_ID)

    def encode(self, caption: str, max_tokens: int = 0) -> List[int]:
        ids = [self.token_id(t) for t in caption.lower().split()]
        if not ids:
            ids = [PAD_ID]
        if max_tokens > 0:
            ids = ids[:max_tokens]
        return ids

    def pad(self, ids: List[int], length: int) -> List[int]:
        if len(ids) > length:
            return ids[:length]
        return ids + [PAD_ID] * (length - len(ids))
