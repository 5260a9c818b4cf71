"""Word-level vocabulary with the special and marker tokens."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

PAD = "<pad>"
BOS = "<bos>"
EOS = "<eos>"
UNK = "<unk>"
SEP = "<sep>"
QUESTION_MARKER = "<|question|>"
ANSWER_MARKER = "<|answer|>"

SPECIALS = (PAD, BOS, EOS, UNK, SEP, QUESTION_MARKER, ANSWER_MARKER)


@dataclass(frozen=True)
class Vocab:
    itos: tuple[str, ...]

    @property
    def stoi(self) -> dict[str, int]:
        cached = self.__dict__.get("_stoi")
        if cached is None:
            cached = {tok: i for i, tok in enumerate(self.itos)}
            self.__dict__["_stoi"] = cached
        return cached

    def __len__(self) -> int:
        return len(self.itos)

    @classmethod
    def build(cls, token_streams: Iterable[Iterable[str]]) -> "Vocab":
        seen: dict[str, None] = {}
        for stream in token_streams:
            for token in stream:
                seen.setdefault(token, None)
        return cls(SPECIALS + tuple(t for t in seen if t not in SPECIALS))

    def encode(self, tokens: Iterable[str]) -> list[int]:
        unk = self.stoi[UNK]
        return [self.stoi.get(t, unk) for t in tokens]

    def decode(self, ids: Iterable[int]) -> list[str]:
        return [self.itos[i] for i in ids]

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(list(self.itos), handle)

    @classmethod
    def load(cls, path) -> "Vocab":
        with open(path, encoding="utf-8") as handle:
            return cls(tuple(json.load(handle)))
