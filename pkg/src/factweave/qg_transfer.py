"""Question generation orchestration, post-filters, and question transferring.

Question/entity pairs are sampled per source sentence and filtered; each
surviving question is then rewritten for the target topic (specific form)
and stripped of topic tokens (generic form).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Literal

from .backends import Backend, QgRequest
from .core import (
    PipelineConfig,
    TransferTask,
    derive_seed,
    find_occurrences,
    sentence_split,
    tokenize,
)

SPECIFIC = "specific"
GENERIC = "generic"

QuestionKind = Literal["specific", "generic"]


class UntransferableQuestionError(ValueError):
    """Raised when a question does not contain the source topic."""


@dataclass(frozen=True)
class QuestionEntityPair:
    """A sampled question with the source-text entity that answers it."""

    question: str
    entity: str
    sentence_index: int


@dataclass(frozen=True)
class TransferredQuestion:
    """A topic-swapped (specific) or topic-stripped (generic) question."""

    question: str
    kind: QuestionKind
    source_entity: str


def _filter_pairs(
    pairs: list[QuestionEntityPair], task: TransferTask
) -> list[QuestionEntityPair]:
    """Apply the post-filters, in order, preserving first-appearance order."""
    source = task.source_text.lower()
    topic = task.source_topic.lower()
    # (1) entity must occur in the source text; (2) question must contain the topic
    kept = [
        p
        for p in pairs
        if p.entity and p.entity.lower() in source and topic in p.question.lower()
    ]
    # (3) drop entities that are strict substrings of another surviving entity
    entities = {p.entity.lower() for p in kept}
    kept = [
        p
        for p in kept
        if not any(
            p.entity.lower() != other and p.entity.lower() in other
            for other in entities
        )
    ]
    # (4) deduplicate exact (question, entity) pairs
    seen: set[tuple[str, str]] = set()
    out: list[QuestionEntityPair] = []
    for p in kept:
        key = (p.question, p.entity)
        if key not in seen:
            seen.add(key)
            out.append(p)
    return out


def collect_pairs(
    task: TransferTask, config: PipelineConfig, qg_backend: Backend
) -> list[QuestionEntityPair]:
    """Sample question/entity pairs per sentence until enough survive filtering.

    Repeats up to ``max_generation_rounds`` rounds; returns what survived
    (possibly fewer than ``n_pairs``, possibly nothing). Output order is
    round-then-sentence-then-sample, independent of any backend scheduling.
    """
    sentences = sentence_split(task.source_text)
    base_seed = derive_seed(config.rng_seed, task.task_id)
    raw: list[QuestionEntityPair] = []
    surviving: list[QuestionEntityPair] = []
    for round_no in range(config.max_generation_rounds):
        for si, sentence in enumerate(sentences):
            req = QgRequest(
                context=sentence,
                topic=task.source_topic,
                num_samples=config.n_pairs,
                top_p=config.top_p,
            )
            resp = qg_backend.generate_pairs(req, derive_seed(base_seed, round_no, si))
            raw.extend(QuestionEntityPair(q, e, si) for q, e in resp.pairs)
        surviving = _filter_pairs(raw, task)
        if len(surviving) >= config.n_pairs:
            break
    return surviving


def transfer_specific(question: str, source_topic: str, target_topic: str) -> str:
    """Replace every case-insensitive occurrence of the source topic.

    The target topic is inserted verbatim (no case adaptation).
    """
    spans = find_occurrences(question, source_topic)
    if not spans:
        raise UntransferableQuestionError(
            f"question {question!r} does not contain topic {source_topic!r}"
        )
    pieces: list[str] = []
    prev = 0
    for start, end in spans:
        pieces.append(question[prev:start])
        pieces.append(target_topic)
        prev = end
    pieces.append(question[prev:])
    return "".join(pieces)


def make_generic(question: str, specific: str) -> str:
    """Token-multiset intersection of a question and its topic-swapped form.

    Keeps tokens of ``question`` in order, each capped by its count in
    ``specific`` (matched on normalized form; pure-punctuation tokens match
    on surface). This strips each topic's non-shared tokens; the result may
    be empty when the topics cover the whole question.
    """

    def key(tok) -> str:
        return tok.normalized if tok.normalized else tok.surface

    budget = Counter(key(t) for t in tokenize(specific))
    kept: list[str] = []
    for tok in tokenize(question):
        k = key(tok)
        if budget[k] > 0:
            budget[k] -= 1
            kept.append(tok.surface)
    return " ".join(kept)


def build_transferred_set(
    pairs: list[QuestionEntityPair], task: TransferTask
) -> list[TransferredQuestion]:
    """Emit the specific and generic question for each pair, deduplicated.

    The generic question is omitted when the intersection collapses to the
    empty string; deduplication is on exact (question, source_entity) keys,
    so equal questions with different entities all survive.
    """
    out: list[TransferredQuestion] = []
    seen: set[tuple[str, str]] = set()
    for pair in pairs:
        specific = transfer_specific(
            pair.question, task.source_topic, task.target_topic
        )
        generic = make_generic(pair.question, specific)
        for question, kind in ((specific, SPECIFIC), (generic, GENERIC)):
            if not question:
                continue
            key = (question, pair.entity)
            if key in seen:
                continue
            seen.add(key)
            out.append(TransferredQuestion(question, kind, pair.entity))
    return out
