"""Behavior suite for backend implementations.

Exercises any ``Backend`` (usually an ``HttpBackend`` pointed at a live
service) through the same client the pipeline uses: span-substring
exactness, the span-length cap, embed length parity, and seeded question
sampling determinism. Probe inputs are caller-configurable so a service
can be probed within its own training distribution.
"""

from __future__ import annotations

from dataclasses import dataclass

from .backends import (
    Backend,
    BackendError,
    EmbedRequest,
    QaRequest,
    QgRequest,
)
from .core import tokenize


@dataclass(frozen=True)
class ConformanceProbe:
    """Inputs the suite sends; defaults target the template grammar."""

    qg_context: str = "the party of joseph stalin is communist party ."
    qg_topic: str = "joseph stalin"
    qg_num_samples: int = 4
    qa_question: str = "what is the party of nelson mandela ?"
    qa_guidance: str = "communist party"
    qa_contexts: tuple[str, ...] = (
        "the party of nelson mandela is anc .",
        "the home of nelson mandela is soweto .",
    )
    embed_texts: tuple[str, ...] = ("alpha beta", "gamma", "alpha beta")


@dataclass(frozen=True)
class ConformanceCheck:
    name: str
    passed: bool
    detail: str = ""


def _check(name: str, fn) -> ConformanceCheck:
    try:
        detail = fn()
    except BackendError as exc:
        return ConformanceCheck(name, False, f"backend error: {exc}")
    except AssertionError as exc:
        return ConformanceCheck(name, False, str(exc))
    return ConformanceCheck(name, True, detail or "")


def run_conformance(
    backend: Backend, probe: ConformanceProbe | None = None
) -> list[ConformanceCheck]:
    """Run every check; returns one result per check, failures included."""
    p = probe or ConformanceProbe()
    checks: list[ConformanceCheck] = []

    def qg_determinism():
        req = QgRequest(p.qg_context, p.qg_topic, p.qg_num_samples, 0.75)
        first = backend.generate_pairs(req, seed=20240817)
        second = backend.generate_pairs(req, seed=20240817)
        assert first == second, "same seed produced different pairs"
        assert len(first.pairs) <= p.qg_num_samples, "pair count exceeds num_samples"
        for question, entity in first.pairs:
            assert question and entity, "empty question or entity"
        return f"{len(first.pairs)} pairs, stable under reseeding"

    def qa_span_exactness():
        req = QaRequest(p.qa_question, p.qa_guidance, p.qa_contexts, 6)
        resp = backend.answer_span(req)
        assert not resp.no_answer, "no answer for the canonical probe question"
        cited = p.qa_contexts[resp.context_index][resp.char_start : resp.char_end]
        assert cited == resp.answer, "answer is not the cited substring"
        return f"answer {resp.answer!r} at context {resp.context_index}"

    def qa_span_cap():
        req = QaRequest(p.qa_question, p.qa_guidance, p.qa_contexts, 1)
        resp = backend.answer_span(req)
        if resp.no_answer:
            return "no answer under cap 1 (allowed)"
        got = len(tokenize(resp.answer))
        assert got <= 1, f"answer {resp.answer!r} has {got} tokens under cap 1"
        return f"answer {resp.answer!r} respects cap"

    def embed_parity():
        resp = backend.embed(EmbedRequest(p.embed_texts))
        assert len(resp.vectors) == len(p.embed_texts), "vector/text length mismatch"
        dims = {len(v) for v in resp.vectors}
        assert len(dims) == 1, f"inconsistent dimensions {dims}"
        assert resp.vectors[0] == resp.vectors[2], "identical texts embed differently"
        return f"{len(resp.vectors)} vectors, dim {dims.pop()}"

    checks.append(_check("qg_seeded_determinism", qg_determinism))
    checks.append(_check("qa_span_exactness", qa_span_exactness))
    checks.append(_check("qa_span_cap", qa_span_cap))
    checks.append(_check("embed_length_parity", embed_parity))
    return checks
