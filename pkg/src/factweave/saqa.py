"""Specificity-aware QA over retrieved contexts and entity-map folding.

Each transferred question retrieves its own context, is answered under a
span-length cap proportional to its source entity, and the best-scoring
answer per entity is folded into the entity map.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .backends import Backend, BackendError, QaRequest
from .core import PipelineConfig, tokenize
from .qg_transfer import SPECIFIC, QuestionKind, TransferredQuestion
from .retrieval import RetrievedContext, VectorIndex, retrieve

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnswerCandidate:
    """A scored extracted span with full provenance."""

    answer: str
    score: float
    question: str
    question_kind: QuestionKind
    source_entity: str
    fact_index: int
    char_start: int
    char_end: int


@dataclass(frozen=True)
class EntityEntry:
    answer: str
    score: float
    provenance: AnswerCandidate


@dataclass(frozen=True)
class EntityMap:
    """source_entity -> best (answer, score), keys in sorted order."""

    entries: dict[str, EntityEntry]

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, entity: str) -> bool:
        return entity in self.entries

    def __getitem__(self, entity: str) -> EntityEntry:
        return self.entries[entity]

    def items(self):
        return self.entries.items()


def span_token_cap(source_entity: str, config: PipelineConfig) -> int:
    """Maximum answer span length: span_multiplier x entity token count."""
    return config.span_multiplier * max(1, len(tokenize(source_entity)))


def answer_all(
    questions: list[TransferredQuestion],
    index: VectorIndex,
    config: PipelineConfig,
    embed_backend: Backend,
    qa_backend: Backend,
    skip_on_error: bool = False,
    retrieval_log: list[tuple[str, RetrievedContext]] | None = None,
    warnings: list[str] | None = None,
) -> list[AnswerCandidate]:
    """Retrieve and answer every question; no-answer results are dropped.

    Backend failures abort (fail-fast) unless ``skip_on_error`` is set, in
    which case the question is skipped and logged. ``retrieval_log``
    collects (question, context) pairs for tracing when provided.
    """
    candidates: list[AnswerCandidate] = []
    for tq in questions:
        try:
            context = retrieve(index, tq.question, config.k_retrieve, embed_backend)
            if retrieval_log is not None:
                retrieval_log.append((tq.question, context))
            resp = qa_backend.answer_span(
                QaRequest(
                    question=tq.question,
                    guidance=tq.source_entity,
                    contexts=context.texts,
                    max_span_tokens=span_token_cap(tq.source_entity, config),
                )
            )
        except BackendError:
            if not skip_on_error:
                raise
            message = f"backend error on question {tq.question!r}; skipped"
            logger.warning(message)
            if warnings is not None:
                warnings.append(message)
            continue
        if resp.no_answer:
            continue
        candidates.append(
            AnswerCandidate(
                answer=resp.answer,
                score=resp.score,
                question=tq.question,
                question_kind=tq.kind,
                source_entity=tq.source_entity,
                fact_index=context.fact_indices[resp.context_index],
                char_start=resp.char_start,
                char_end=resp.char_end,
            )
        )
    return candidates


def _preference(c: AnswerCandidate) -> tuple:
    # max() picks: higher score, specific over generic, lower fact_index,
    # lower char_start; the trailing keys cover every remaining field so the
    # order is total and the fold is permutation-invariant even for
    # degenerate candidate sets
    return (
        c.score,
        1 if c.question_kind == SPECIFIC else 0,
        -c.fact_index,
        -c.char_start,
        c.question,
        c.answer,
        c.char_end,
    )


def fold_entity_map(candidates: list[AnswerCandidate]) -> EntityMap:
    """Keep the best-scoring candidate per source entity.

    Deterministic for any input permutation; map keys come out sorted.
    """
    best: dict[str, AnswerCandidate] = {}
    for c in candidates:
        current = best.get(c.source_entity)
        if current is None or _preference(c) > _preference(current):
            best[c.source_entity] = c
    entries = {
        entity: EntityEntry(c.answer, c.score, c)
        for entity, c in sorted(best.items())
    }
    return EntityMap(entries)
