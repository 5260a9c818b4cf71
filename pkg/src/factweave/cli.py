"""The factweave command line.

Exit codes: 0 success, 1 task failures, 2 usage or config errors.
"""

from __future__ import annotations

import logging
import sys

import click

from .backends import Backend, BackendError, HttpBackend, MockBackend
from .data_io import (
    SyntheticSpec,
    load_corpus,
    load_grouped_documents,
    load_predictions,
    load_tasks,
    load_triples,
    pair_by_group,
    pair_triples,
    save_tasks,
    write_synthetic_dataset,
)
from .metrics import evaluate
from .pipeline import BackendSettings, load_config, run_batch, save_traces
from .retrieval import build_index, save_index

logger = logging.getLogger(__name__)


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _resolve_backend(spec: str, settings: BackendSettings | None = None) -> Backend:
    """CLI --backend value: 'mock' or a base URL; timeout comes from config."""
    timeout_ms = settings.timeout_ms if settings else 30000
    if spec == "mock":
        return MockBackend()
    if spec.startswith("http://") or spec.startswith("https://"):
        return HttpBackend(spec, timeout_ms=timeout_ms)
    _fail(2, f"--backend must be 'mock' or an http(s) URL, got {spec!r}")
    raise AssertionError("unreachable")


@click.group()
def main() -> None:
    """Transfer the factual content of a text between topics."""
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")


@main.group()
def index() -> None:
    """Vector index utilities."""


@index.command("build")
@click.option("--corpus", "corpus_path", required=True, help="Corpus JSON file.")
@click.option("--backend", "backend_spec", required=True, help="'mock' or a base URL.")
@click.option("--out", "out_path", required=True, help="Output index file.")
def index_build(corpus_path: str, backend_spec: str, out_path: str) -> None:
    """Embed a corpus and write its inner-product index."""
    try:
        corpora = load_corpus(corpus_path)
    except (OSError, ValueError) as exc:
        _fail(2, str(exc))
    if len(corpora) != 1:
        _fail(2, f"expected exactly one corpus at {corpus_path}, found {len(corpora)}")
    backend = _resolve_backend(backend_spec)
    ref, corpus = next(iter(corpora.items()))
    try:
        vector_index = build_index(corpus, backend, corpus_ref=ref)
    except BackendError as exc:
        _fail(1, str(exc))
    save_index(vector_index, out_path)
    click.echo(
        f"indexed {len(vector_index)} facts (dim {vector_index.dimension}) -> {out_path}"
    )


@main.command()
@click.option("--tasks", "tasks_path", required=True, help="tasks.jsonl input.")
@click.option("--corpus-dir", "corpus_dir", required=True, help="Directory of corpus files.")
@click.option("--backend", "backend_spec", required=True, help="'mock' or a base URL.")
@click.option("--config", "config_path", required=True, help="TOML config file.")
@click.option("--trace", "trace_path", default=None, help="Optional traces.jsonl output.")
@click.option("--skip-on-error", is_flag=True, help="Skip failing questions instead of aborting the task.")
@click.option("--out", "out_path", required=True, help="predictions.jsonl output.")
def transfer(
    tasks_path: str,
    corpus_dir: str,
    backend_spec: str,
    config_path: str,
    trace_path: str | None,
    skip_on_error: bool,
    out_path: str,
) -> None:
    """Run the transfer pipeline over a task batch."""
    try:
        config, backend_settings = load_config(config_path)
        task_list = load_tasks(tasks_path)
        corpora = load_corpus(corpus_dir)
    except (OSError, ValueError) as exc:
        _fail(2, str(exc))
    backend = _resolve_backend(backend_spec, backend_settings)
    result = run_batch(
        task_list, config, backend, corpora, skip_on_error=skip_on_error
    )
    from .data_io import save_predictions

    save_predictions(out_path, result.predictions)
    if trace_path:
        save_traces(trace_path, result.traces)
    for task_id, message in result.failures:
        click.echo(f"task {task_id} failed: {message}", err=True)
    click.echo(f"transferred {len(result.predictions)}/{len(task_list)} tasks -> {out_path}")
    if result.failures:
        sys.exit(1)


@main.command("evaluate")
@click.option("--pred", "pred_path", required=True, help="predictions.jsonl input.")
@click.option("--tasks", "tasks_path", required=True, help="tasks.jsonl with reference_text.")
@click.option("--corpus-dir", "corpus_dir", required=True, help="Directory of corpus files.")
@click.option("--report", "report_path", required=True, help="Report JSON output.")
def evaluate_cmd(pred_path: str, tasks_path: str, corpus_dir: str, report_path: str) -> None:
    """Score predictions against reference texts."""
    try:
        predictions = load_predictions(pred_path)
        task_list = load_tasks(tasks_path)
        corpora = load_corpus(corpus_dir)
        report = evaluate(predictions, task_list, corpora)
    except (OSError, ValueError) as exc:
        _fail(2, str(exc))
    report.save(report_path)
    summary = "  ".join(f"{k}={v:.4f}" for k, v in report.aggregate.items())
    click.echo(f"{len(report.per_example)} examples  {summary}")


@main.group()
def pairs() -> None:
    """Build transfer tasks from raw datasets."""


@pairs.command("from-triples")
@click.option("--triples", "triples_path", required=True, help="subject<TAB>relation<TAB>object file.")
@click.option("--seed", required=True, type=int, help="Pairing seed.")
@click.option("--out", "out_path", required=True, help="tasks.jsonl output.")
def pairs_from_triples(triples_path: str, seed: int, out_path: str) -> None:
    """Pair same-relation triples into tasks."""
    try:
        triples = load_triples(triples_path)
        tasks = pair_triples(triples, seed)
    except (OSError, ValueError) as exc:
        _fail(2, str(exc))
    save_tasks(out_path, tasks)
    click.echo(f"paired {len(tasks)} tasks -> {out_path}")


@pairs.command("by-group")
@click.option("--docs", "docs_path", required=True, help="docs.jsonl with text/topic/group.")
@click.option("--seed", required=True, type=int, help="Pairing seed.")
@click.option("--out", "out_path", required=True, help="tasks.jsonl output.")
def pairs_by_group(docs_path: str, seed: int, out_path: str) -> None:
    """Pair documents within their groups into tasks."""
    try:
        documents = load_grouped_documents(docs_path)
        tasks = pair_by_group(documents, seed)
    except (OSError, ValueError) as exc:
        _fail(2, str(exc))
    save_tasks(out_path, tasks)
    click.echo(f"paired {len(tasks)} tasks -> {out_path}")


@main.command()
@click.option("--n", "num_tasks", required=True, type=int, help="Number of tasks.")
@click.option("--attrs", required=True, type=int, help="Attribute sentences per task.")
@click.option("--seed", required=True, type=int, help="Generator seed.")
@click.option("--out-dir", "out_dir", required=True, help="Output directory.")
def synth(num_tasks: int, attrs: int, seed: int, out_dir: str) -> None:
    """Generate a synthetic benchmark (tasks.jsonl + corpora/)."""
    try:
        spec = SyntheticSpec(
            num_tasks=num_tasks,
            attrs_per_topic=attrs,
            vocab_size=max(200, 3 * attrs + 4),
            rng_seed=seed,
        )
        write_synthetic_dataset(out_dir, spec)
    except (OSError, ValueError) as exc:
        _fail(2, str(exc))
    click.echo(f"wrote {num_tasks} synthetic tasks under {out_dir}")


if __name__ == "__main__":
    main()
