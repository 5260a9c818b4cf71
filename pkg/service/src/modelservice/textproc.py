"""Word tokenization with character offsets.

Model tokens follow the wire contract's whole-token convention: whitespace
chunks with boundary punctuation detached (chunks with internal punctuation
stay whole). One model token therefore maps to exactly one wire token, so a
span of k model tokens always satisfies a k-token cap on the client side.
"""

from __future__ import annotations

import string
from dataclasses import dataclass

_PUNCT = frozenset(string.punctuation)


@dataclass(frozen=True)
class WordToken:
    surface: str
    char_start: int
    char_end: int

    @property
    def key(self) -> str:
        """Lowercased vocabulary key."""
        return self.surface.lower()


def _split_chunk(chunk: str, offset: int) -> list[WordToken]:
    core = chunk.strip(string.punctuation)
    if not core:
        return [WordToken(c, offset + k, offset + k + 1) for k, c in enumerate(chunk)]
    if any(c in _PUNCT for c in core):
        return [WordToken(chunk, offset, offset + len(chunk))]
    lead = len(chunk) - len(chunk.lstrip(string.punctuation))
    trail_at = len(chunk.rstrip(string.punctuation))
    tokens = [WordToken(chunk[k], offset + k, offset + k + 1) for k in range(lead)]
    tokens.append(WordToken(core, offset + lead, offset + trail_at))
    tokens.extend(
        WordToken(chunk[k], offset + k, offset + k + 1)
        for k in range(trail_at, len(chunk))
    )
    return tokens


def word_tokens(text: str) -> list[WordToken]:
    tokens: list[WordToken] = []
    i, n = 0, len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace():
            j += 1
        tokens.extend(_split_chunk(text[i:j], i))
        i = j
    return tokens


def words(text: str) -> list[str]:
    """Lowercased token keys, offsets dropped."""
    return [t.key for t in word_tokens(text)]
