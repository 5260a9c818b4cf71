"""Shared domain types and deterministic text processing.

Everything in this module is immutable after construction and all functions
are pure, so concurrent use needs no locking.
"""

from __future__ import annotations

import hashlib
import string
from dataclasses import dataclass
from functools import cached_property

_PUNCT = frozenset(string.punctuation)
_TERMINATORS = frozenset(".!?")


@dataclass(frozen=True)
class Token:
    """One token with its original character span in the source string."""

    surface: str
    normalized: str
    char_start: int
    char_end: int


@dataclass(frozen=True)
class TokenSeq:
    """Ordered tokens; spans are non-overlapping and strictly increasing."""

    tokens: tuple[Token, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]

    def normalized(self) -> list[str]:
        return [t.normalized for t in self.tokens]


@dataclass(frozen=True)
class Fact:
    """One factual sentence of a corpus."""

    index: int
    text: str

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ValueError(f"fact index must be >= 0, got {self.index}")
        if not self.text.strip():
            raise ValueError("fact text must be non-empty after trimming")


@dataclass(frozen=True)
class Corpus:
    """Ordered factual sentences with a cached token vocabulary.

    Fact indices are dense and zero-based: ``facts[i].index == i``.
    """

    facts: tuple[Fact, ...]

    def __post_init__(self) -> None:
        for pos, fact in enumerate(self.facts):
            if fact.index != pos:
                raise ValueError(
                    f"fact at position {pos} carries index {fact.index}; "
                    "indices must be dense and zero-based"
                )

    @classmethod
    def from_texts(cls, texts: list[str] | tuple[str, ...]) -> "Corpus":
        return cls(tuple(Fact(i, t) for i, t in enumerate(texts)))

    @cached_property
    def vocabulary(self) -> frozenset[str]:
        """Union of non-empty normalized tokens over all facts."""
        vocab: set[str] = set()
        for fact in self.facts:
            vocab.update(t.normalized for t in tokenize(fact.text) if t.normalized)
        return frozenset(vocab)

    def __len__(self) -> int:
        return len(self.facts)


@dataclass(frozen=True)
class TransferTask:
    """One unit of work: rewrite source_text from source_topic to target_topic.

    ``reference_text`` is the gold target, present only for evaluation.
    """

    task_id: str
    source_text: str
    source_topic: str
    target_topic: str
    corpus_ref: str
    reference_text: str | None = None

    def __post_init__(self) -> None:
        if not self.source_text:
            raise ValueError(f"task {self.task_id!r}: source_text is empty")
        if not self.source_topic:
            raise ValueError(f"task {self.task_id!r}: source_topic is empty")
        if not self.target_topic:
            raise ValueError(f"task {self.task_id!r}: target_topic is empty")
        if self.source_topic.lower() not in self.source_text.lower():
            raise ValueError(
                f"task {self.task_id!r}: source_topic {self.source_topic!r} "
                "does not occur in source_text"
            )


@dataclass(frozen=True)
class PipelineConfig:
    """Inference hyperparameters for the transfer engine."""

    n_pairs: int = 10
    top_p: float = 0.75
    k_retrieve: int = 5
    span_multiplier: int = 2
    max_generation_rounds: int = 5
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.n_pairs < 1:
            raise ValueError("n_pairs must be >= 1")
        if not 0 < self.top_p <= 1:
            raise ValueError("top_p must be in (0, 1]")
        if self.k_retrieve < 1:
            raise ValueError("k_retrieve must be >= 1")
        if self.span_multiplier < 1:
            raise ValueError("span_multiplier must be >= 1")
        if self.max_generation_rounds < 1:
            raise ValueError("max_generation_rounds must be >= 1")


def _split_chunk(chunk: str, offset: int) -> list[Token]:
    """Tokenize one whitespace-delimited chunk starting at ``offset``."""
    core = chunk.strip(string.punctuation)
    if not core:
        # pure punctuation: one token per character
        return [Token(c, "", offset + k, offset + k + 1) for k, c in enumerate(chunk)]
    if any(c in _PUNCT for c in core):
        # internal punctuation (abbreviations, contractions): keep the chunk whole
        return [Token(chunk, core.lower(), offset, offset + len(chunk))]
    lead = len(chunk) - len(chunk.lstrip(string.punctuation))
    trail_at = len(chunk.rstrip(string.punctuation))
    tokens = [
        Token(chunk[k], "", offset + k, offset + k + 1) for k in range(lead)
    ]
    tokens.append(Token(core, core.lower(), offset + lead, offset + trail_at))
    tokens.extend(
        Token(chunk[k], "", offset + k, offset + k + 1)
        for k in range(trail_at, len(chunk))
    )
    return tokens


def tokenize(text: str) -> TokenSeq:
    """Split on whitespace, detaching boundary punctuation into its own tokens.

    The normalized form is the lowercased surface with surrounding punctuation
    stripped; it is empty only for pure-punctuation tokens. Chunks whose core
    still contains punctuation ("U.S.", "don't") are kept whole.
    """
    tokens: list[Token] = []
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
    return TokenSeq(tuple(tokens))


def _guarded_period(text: str, i: int) -> bool:
    """True when the period at ``i`` follows a single uppercase letter (an initial)."""
    if text[i] != ".":
        return False
    if i == 0 or not text[i - 1].isupper():
        return False
    return i < 2 or not text[i - 2].isalnum()


def sentence_split(text: str) -> list[str]:
    """Split on . ! ? followed by whitespace and an uppercase letter.

    A period preceded by a single uppercase letter ("A.", "U.S.") never
    splits. Every non-whitespace character of the input lands in exactly one
    output sentence, in order.
    """
    n = len(text)
    cuts: list[int] = []
    for i, ch in enumerate(text):
        if ch not in _TERMINATORS:
            continue
        if _guarded_period(text, i):
            continue
        j = i + 1
        if j >= n or not text[j].isspace():
            continue
        while j < n and text[j].isspace():
            j += 1
        if j < n and text[j].isupper():
            cuts.append(i + 1)
    pieces: list[str] = []
    prev = 0
    for cut in cuts:
        pieces.append(text[prev:cut])
        prev = cut
    pieces.append(text[prev:])
    return [p.strip() for p in pieces if p.strip()]


def derive_seed(*parts: int | str) -> int:
    """Stable 63-bit seed mixed from integer and string parts.

    Unlike ``hash()``, stable across processes, so concurrency and process
    boundaries never change sampled results.
    """
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        h.update(str(part).encode("utf-8"))
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little") >> 1


def find_occurrences(haystack: str, needle: str) -> list[tuple[int, int]]:
    """All case-insensitive, non-overlapping matches, leftmost first.

    Matching is over raw characters; no token-boundary requirement.
    """
    if not needle:
        raise ValueError("needle must be non-empty")
    hs = haystack.lower()
    nd = needle.lower()
    spans: list[tuple[int, int]] = []
    i = 0
    while True:
        i = hs.find(nd, i)
        if i < 0:
            break
        spans.append((i, i + len(nd)))
        i += len(nd)
    return spans
