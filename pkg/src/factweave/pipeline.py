"""End-to-end transfer engine: one task, or a batch with index caching.

Every stage's intermediate state is recorded in a trace so each step of the
transfer is auditable after the fact.
"""

from __future__ import annotations

import dataclasses
import json
import time
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .backends import Backend, BackendError
from .core import Corpus, PipelineConfig, TransferTask
from .infill import InfillPlan, apply_infill, plan_infill
from .qg_transfer import (
    QuestionEntityPair,
    TransferredQuestion,
    build_transferred_set,
    collect_pairs,
)
from .retrieval import RetrievedContext, VectorIndex, build_index
from .saqa import AnswerCandidate, EntityMap, answer_all, fold_entity_map


@dataclass(frozen=True)
class BackendSettings:
    """The [backend] block of the config file."""

    kind: str = "mock"
    base_url: str = ""
    timeout_ms: int = 30000

    def __post_init__(self) -> None:
        if self.kind not in ("mock", "http"):
            raise ValueError(f"backend kind must be 'mock' or 'http', got {self.kind!r}")
        if self.kind == "http" and not self.base_url:
            raise ValueError("backend kind 'http' requires base_url")
        if self.timeout_ms < 1:
            raise ValueError("timeout_ms must be positive")


def load_config(path) -> tuple[PipelineConfig, BackendSettings]:
    """Parse the TOML config file ([pipeline] and [backend] tables)."""
    with open(path, "rb") as handle:
        data = tomllib.load(handle)
    sections = set(data) - {"pipeline", "backend"}
    if sections:
        raise ValueError(f"{path}: unknown config sections: {', '.join(sorted(sections))}")

    def build(cls, table_name):
        table = data.get(table_name, {})
        allowed = {f.name for f in dataclasses.fields(cls)}
        unknown = set(table) - allowed
        if unknown:
            raise ValueError(
                f"{path}: unknown [{table_name}] keys: {', '.join(sorted(unknown))}"
            )
        return cls(**table)

    return build(PipelineConfig, "pipeline"), build(BackendSettings, "backend")


@dataclass(frozen=True)
class PipelineTrace:
    """Intermediate state of every stage for one task."""

    task_id: str
    generated_pairs: tuple[QuestionEntityPair, ...]
    transferred: tuple[TransferredQuestion, ...]
    retrievals: tuple[tuple[str, RetrievedContext], ...]
    candidates: tuple[AnswerCandidate, ...]
    entity_map: EntityMap
    plan: InfillPlan
    output: str
    timings: dict[str, float]
    warnings: tuple[str, ...]

    def to_json_dict(self) -> dict:
        return dataclasses.asdict(self)


def run_transfer(
    task: TransferTask,
    config: PipelineConfig,
    backend: Backend,
    index: VectorIndex,
    skip_on_error: bool = False,
) -> tuple[str, PipelineTrace]:
    """Execute the full transfer for one task against a prebuilt index.

    When question generation yields nothing usable the pipeline degrades to
    topic-only substitution and flags it in the trace warnings.
    """
    warnings: list[str] = []
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    pairs = collect_pairs(task, config, backend)
    timings["question_generation"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if pairs:
        transferred = build_transferred_set(pairs, task)
    else:
        transferred = []
        warnings.append(
            "degraded mode: no question/entity pairs survived filtering; "
            "output is the source text with only the topic substituted"
        )
    timings["question_transfer"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    retrievals: list[tuple[str, RetrievedContext]] = []
    candidates = answer_all(
        transferred,
        index,
        config,
        embed_backend=backend,
        qa_backend=backend,
        skip_on_error=skip_on_error,
        retrieval_log=retrievals,
        warnings=warnings,
    )
    timings["answering"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    entity_map = fold_entity_map(candidates)
    plan, plan_warnings = plan_infill(
        task.source_text, entity_map, task.source_topic, task.target_topic
    )
    warnings.extend(plan_warnings)
    output = apply_infill(task.source_text, plan)
    timings["infill"] = time.perf_counter() - t0

    trace = PipelineTrace(
        task_id=task.task_id,
        generated_pairs=tuple(pairs),
        transferred=tuple(transferred),
        retrievals=tuple(retrievals),
        candidates=tuple(candidates),
        entity_map=entity_map,
        plan=plan,
        output=output,
        timings=timings,
        warnings=tuple(warnings),
    )
    return output, trace


@dataclass
class BatchResult:
    predictions: list[tuple[str, str]] = field(default_factory=list)
    traces: list[PipelineTrace] = field(default_factory=list)
    failures: list[tuple[str, str]] = field(default_factory=list)


def run_batch(
    tasks: list[TransferTask],
    config: PipelineConfig,
    backend: Backend,
    corpora: dict[str, Corpus],
    skip_on_error: bool = False,
) -> BatchResult:
    """Transfer a batch of tasks, building one index per distinct corpus_ref.

    Per-task failures are collected rather than raised; outputs keep the
    input task order.
    """
    result = BatchResult()
    index_cache: dict[str, VectorIndex] = {}
    for task in tasks:
        corpus = corpora.get(task.corpus_ref)
        if corpus is None:
            result.failures.append(
                (task.task_id, f"corpus_ref {task.corpus_ref!r} not found")
            )
            continue
        try:
            index = index_cache.get(task.corpus_ref)
            if index is None:
                index = build_index(corpus, backend, corpus_ref=task.corpus_ref)
                index_cache[task.corpus_ref] = index
            output, trace = run_transfer(
                task, config, backend, index, skip_on_error=skip_on_error
            )
        except (BackendError, ValueError) as exc:
            result.failures.append((task.task_id, str(exc)))
            continue
        result.predictions.append((task.task_id, output))
        result.traces.append(trace)
    return result


def save_traces(path, traces: list[PipelineTrace]) -> None:
    """Write one JSON object per trace (JSON-lines)."""
    with open(path, "w", encoding="utf-8") as handle:
        for trace in traces:
            handle.write(json.dumps(trace.to_json_dict()) + "\n")
