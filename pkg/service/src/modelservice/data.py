"""Training-data preparation for the generator and the guided reader."""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass

from .vocab import ANSWER_MARKER, QUESTION_MARKER

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SquadRecord:
    """One QA record: a context, its topic/title, and an answered question."""

    context: str
    topic: str
    question: str
    answer: str
    answer_start: int = -1


@dataclass(frozen=True)
class QgTrainExample:
    context: str
    topic: str
    target_sequence: str

    def __post_init__(self) -> None:
        if self.target_sequence.count(QUESTION_MARKER) != 1:
            raise ValueError("target_sequence needs exactly one question marker")
        if self.target_sequence.count(ANSWER_MARKER) != 1:
            raise ValueError("target_sequence needs exactly one answer marker")


@dataclass(frozen=True)
class SaqaTrainExample:
    context: str
    question: str
    guidance: str
    answer_start: int
    answer_end: int

    def __post_init__(self) -> None:
        if not 0 <= self.answer_start < self.answer_end <= len(self.context):
            raise ValueError(
                f"span [{self.answer_start}, {self.answer_end}) outside context"
            )


def load_records(path) -> list[SquadRecord]:
    """Read JSONL records with context/topic/question/answer[/answer_start]."""
    records: list[SquadRecord] = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
            missing = {"context", "topic", "question", "answer"} - set(obj)
            if missing:
                raise ValueError(
                    f"{path}:{lineno}: missing keys: {', '.join(sorted(missing))}"
                )
            records.append(
                SquadRecord(
                    context=obj["context"],
                    topic=obj["topic"],
                    question=obj["question"],
                    answer=obj["answer"],
                    answer_start=obj.get("answer_start", -1),
                )
            )
    return records


def load_lexicon(path) -> dict[str, tuple[str, ...]]:
    """word<TAB>neighbor... lines; lists deduplicated and capped at 20."""
    table: dict[str, tuple[str, ...]] = {}
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            cells = [c.strip() for c in line.rstrip("\n").split("\t") if c.strip()]
            if len(cells) < 2:
                continue
            head, neighbors = cells[0].lower(), []
            for word in cells[1:]:
                if word not in neighbors:
                    neighbors.append(word)
            table[head] = tuple(neighbors[:20])
    return table


def prepare_qg_dataset(records: list[SquadRecord]) -> list[QgTrainExample]:
    """Keep records whose topic is a substring of the question; format targets.

    The topic-in-question filter is what later makes generated questions
    transferable by plain topic substitution.
    """
    kept: list[QgTrainExample] = []
    dropped = 0
    for rec in records:
        if rec.topic.lower() not in rec.question.lower():
            dropped += 1
            continue
        target = f"{QUESTION_MARKER} {rec.question} {ANSWER_MARKER} {rec.answer}"
        kept.append(QgTrainExample(rec.context, rec.topic, target))
    if dropped:
        logger.info("prepare_qg_dataset dropped %d/%d records", dropped, len(records))
    return kept


def perturb_answer(answer: str, lexicon: dict[str, tuple[str, ...]],
                   rng: random.Random) -> str:
    """Replace each word with a sampled neighbor; unknown words stay."""
    out = []
    for word in answer.split():
        options = lexicon.get(word.lower())
        out.append(options[rng.randrange(len(options))] if options else word)
    return " ".join(out)


def prepare_saqa_dataset(
    records: list[SquadRecord],
    lexicon: dict[str, tuple[str, ...]] | None,
    seed: int,
) -> list[SaqaTrainExample]:
    """Attach specificity guidance (perturbed answers) to span records.

    With no lexicon the guidance degenerates to the answer itself. Records
    whose span does not reproduce the answer are rejected.
    """
    rng = random.Random(seed)
    table = lexicon or {}
    examples: list[SaqaTrainExample] = []
    for rec in records:
        start = rec.answer_start
        if start < 0:
            start = rec.context.find(rec.answer)
        end = start + len(rec.answer)
        if start < 0 or rec.context[start:end] != rec.answer:
            raise ValueError(
                f"answer {rec.answer!r} not at offset {rec.answer_start} "
                f"of its context"
            )
        examples.append(
            SaqaTrainExample(
                context=rec.context,
                question=rec.question,
                guidance=perturb_answer(rec.answer, table, rng),
                answer_start=start,
                answer_end=end,
            )
        )
    return examples
