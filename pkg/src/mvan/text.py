"""Tweet text processing: tokenizer, vocabulary, fixed-length index encoding."""

from __future__ import annotations

import re
from collections import Counter
from typing import Dict, Iterable, List, Tuple

import numpy as np

PAD_INDEX = 0
UNK_INDEX = 1
RESERVED = 2

_URL_RE = re.compile(r"(?:https?://\S+|www\.\S+)")
_MENTION_RE = re.compile(r"@\w+")
_URL_MARK = "\x00url\x00"
_USER_MARK = "\x00user\x00"


def tokenize(text: str) -> List[str]:
    """Lowercase and split a tweet into signal-bearing tokens.

    URLs collapse to <url>, @mentions to <user>. '?' and '!' survive as
    standalone tokens; '#' is dropped so hashtag text stays a word; all other
    punctuation becomes whitespace.
    """
    text = text.replace("\x00", " ").lower()
    text = _URL_RE.sub(f" {_URL_MARK} ", text)
    text = _MENTION_RE.sub(f" {_USER_MARK} ", text)
    text = text.replace("#", "")
    text = re.sub(r"([?!])", r" \1 ", text)
    text = re.sub(r"[^\w\s?!\x00]", " ", text)
    out = []
    for tok in text.split():
        if tok == _URL_MARK:
            out.append("<url>")
        elif tok == _USER_MARK:
            out.append("<user>")
        else:
            out.append(tok)
    return out


class Vocabulary:
    """Token-to-index map with two reserved slots: 0 padding, 1 unknown."""

    def __init__(self, ordered_tokens: Iterable[str]):
        self._index: Dict[str, int] = {}
        for tok in ordered_tokens:
            if tok in self._index:
                raise ValueError(f"duplicate vocabulary token: {tok!r}")
            self._index[tok] = RESERVED + len(self._index)

    def __len__(self) -> int:
        return len(self._index) + RESERVED

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def index(self, token: str) -> int:
        return self._index.get(token, UNK_INDEX)

    @property
    def ordered_tokens(self) -> List[str]:
        return sorted(self._index, key=self._index.__getitem__)

    def to_jsonable(self) -> List[str]:
        return self.ordered_tokens

    @classmethod
    def from_jsonable(cls, tokens: List[str]) -> "Vocabulary":
        return cls(tokens)


def build_vocab(corpus: Iterable[List[str]], cap: int = 250_000) -> Vocabulary:
    """Rank tokens by frequency (ties broken lexicographically) and keep the
    top ``cap - 2``; the cap counts the two reserved slots."""
    if cap < 2:
        raise ValueError(f"vocabulary cap must be at least 2, got {cap}")
    counts: Counter = Counter()
    for tokens in corpus:
        counts.update(tokens)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return Vocabulary(tok for tok, _ in ranked[: cap - RESERVED])


def encode_tweet(
    tokens: List[str], vocab: Vocabulary, max_len: int
) -> Tuple[np.ndarray, int]:
    """Map tokens to indices, truncating to the first ``max_len`` and padding
    the rest with 0. Returns (indices of length max_len, true length)."""
    if max_len < 1:
        raise ValueError(f"max_len must be at least 1, got {max_len}")
    ids = np.zeros(max_len, dtype=np.int64)
    kept = tokens[:max_len]
    for i, tok in enumerate(kept):
        ids[i] = vocab.index(tok)
    return ids, len(kept)
