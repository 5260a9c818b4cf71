"""Output-similarity and model-free factuality metrics.

All metrics tokenize with the package tokenizer: lowercase normalized
forms, punctuation participating as itself. Hallucination additionally
drops punctuation tokens entirely, since punctuation is never a factual
hallucination.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Mapping

from .core import Corpus, TransferTask, tokenize

_BLEU_EPS = 1e-9
_METRIC_FIELDS = ("r1", "r2", "bleu", "halluc_pct", "length_ratio")


@dataclass(frozen=True)
class ExampleMetrics:
    task_id: str
    r1: float
    r2: float
    bleu: float
    halluc_pct: float
    length_ratio: float


@dataclass(frozen=True)
class MetricsReport:
    per_example: tuple[ExampleMetrics, ...]
    aggregate: dict[str, float]

    def to_json_dict(self) -> dict:
        return {
            "aggregate": dict(self.aggregate),
            "per_example": [asdict(row) for row in self.per_example],
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.to_json_dict(), handle, indent=2)
            handle.write("\n")


def _metric_tokens(text: str) -> list[str]:
    """Normalized tokens; pure-punctuation tokens keep their surface."""
    return [t.normalized if t.normalized else t.surface for t in tokenize(text)]


def _content_tokens(text: str) -> list[str]:
    """Normalized tokens with punctuation-only tokens dropped."""
    return [t.normalized for t in tokenize(text) if t.normalized]


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _overlap(a: Counter, b: Counter) -> int:
    return sum(min(count, b[gram]) for gram, count in a.items())


def rouge_n(prediction: str, reference: str, n: int) -> float:
    """F1 of n-gram multiset overlap, n in {1, 2}.

    Two empty texts (or two texts too short to carry an n-gram) score 1.0;
    exactly one empty scores 0.0.
    """
    if n not in (1, 2):
        raise ValueError("n must be 1 or 2")
    pred = _metric_tokens(prediction)
    ref = _metric_tokens(reference)
    if not pred and not ref:
        return 1.0
    if not pred or not ref:
        return 0.0
    pred_grams = _ngrams(pred, n)
    ref_grams = _ngrams(ref, n)
    total_pred = sum(pred_grams.values())
    total_ref = sum(ref_grams.values())
    if total_pred == 0 and total_ref == 0:
        return 1.0
    if total_pred == 0 or total_ref == 0:
        return 0.0
    overlap = _overlap(pred_grams, ref_grams)
    precision = overlap / total_pred
    recall = overlap / total_ref
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def bleu(prediction: str, reference: str) -> float:
    """Sentence-level smoothed BLEU-4.

    Geometric mean of modified n-gram precisions (n=1..4) with 1e-9 added to
    the numerator and denominator of zero-count orders, times the brevity
    penalty exp(1 - |ref|/|pred|) when the prediction is shorter.
    """
    pred = _metric_tokens(prediction)
    ref = _metric_tokens(reference)
    if not pred:
        return 0.0
    log_sum = 0.0
    for n in range(1, 5):
        pred_grams = _ngrams(pred, n)
        ref_grams = _ngrams(ref, n)
        matched = _overlap(pred_grams, ref_grams)
        total = sum(pred_grams.values())
        if matched == 0 or total == 0:
            precision = (matched + _BLEU_EPS) / (total + _BLEU_EPS)
        else:
            precision = matched / total
        log_sum += math.log(precision)
    geometric = math.exp(log_sum / 4)
    brevity = math.exp(1 - len(ref) / len(pred)) if len(pred) < len(ref) else 1.0
    return brevity * geometric


def halluc(prediction: str, source_text: str, corpus: Corpus) -> float:
    """Percentage of prediction tokens absent from corpus and source text.

    Token occurrences are counted (not types); punctuation tokens are
    excluded from numerator and denominator; empty prediction scores 0.0.
    """
    pred = _content_tokens(prediction)
    if not pred:
        return 0.0
    vocabulary = set(corpus.vocabulary)
    vocabulary.update(_content_tokens(source_text))
    novel = sum(1 for token in pred if token not in vocabulary)
    return 100.0 * novel / len(pred)


def length_ratio(prediction: str, reference: str) -> float:
    """Prediction token count divided by reference token count."""
    ref = _metric_tokens(reference)
    if not ref:
        raise ValueError("reference must be non-empty")
    return len(_metric_tokens(prediction)) / len(ref)


def evaluate(
    predictions: list[tuple[str, str]],
    tasks: list[TransferTask],
    corpora: Mapping[str, Corpus],
) -> MetricsReport:
    """Score every prediction against its task's reference text.

    Aggregates are arithmetic means, summed in input order for
    reproducibility.
    """
    if not predictions:
        raise ValueError("no predictions to evaluate")
    by_id = {t.task_id: t for t in tasks}
    missing = [
        tid
        for tid, _ in predictions
        if tid not in by_id or by_id[tid].reference_text is None
    ]
    if missing:
        raise ValueError(
            "no reference_text for task_ids: " + ", ".join(sorted(set(missing)))
        )
    missing_corpora = sorted(
        {
            by_id[tid].corpus_ref
            for tid, _ in predictions
            if by_id[tid].corpus_ref not in corpora
        }
    )
    if missing_corpora:
        raise ValueError("unresolvable corpus_refs: " + ", ".join(missing_corpora))

    rows: list[ExampleMetrics] = []
    for tid, text in predictions:
        task = by_id[tid]
        reference = task.reference_text
        rows.append(
            ExampleMetrics(
                task_id=tid,
                r1=rouge_n(text, reference, 1),
                r2=rouge_n(text, reference, 2),
                bleu=bleu(text, reference),
                halluc_pct=halluc(text, task.source_text, corpora[task.corpus_ref]),
                length_ratio=length_ratio(text, reference),
            )
        )
    aggregate = {
        name: sum(getattr(row, name) for row in rows) / len(rows)
        for name in _METRIC_FIELDS
    }
    return MetricsReport(tuple(rows), aggregate)
