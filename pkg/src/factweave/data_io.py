"""Task/corpus serialization, dataset pairing adapters, and the synthetic
benchmark generator.

File formats: tasks and predictions are JSON-lines; corpora are JSON
objects ({"corpus_ref": ..., "facts": [...]}), one corpus per file;
relation triples are tab-separated. All loaders report the offending line
on malformed input.
"""

from __future__ import annotations

import json
import logging
import random
import re
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

from .core import Corpus, TransferTask

logger = logging.getLogger(__name__)

_CONSONANTS = "bcdfgklmnprstvz"
_VOWELS = "aeiou"


@dataclass(frozen=True)
class RelationTriple:
    subject: str
    relation: str
    object: str

    def __post_init__(self) -> None:
        if not (self.subject and self.relation and self.object):
            raise ValueError("triple fields must all be non-empty")


@dataclass(frozen=True)
class GroupedDocument:
    text: str
    topic: str
    group: str


@dataclass(frozen=True)
class SyntheticSpec:
    num_tasks: int
    attrs_per_topic: int
    vocab_size: int
    rng_seed: int

    def __post_init__(self) -> None:
        for name in ("num_tasks", "attrs_per_topic", "vocab_size", "rng_seed"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


def slugify(text: str) -> str:
    """Lowercase identifier: alphanumeric runs joined by single dashes."""
    return re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-") or "x"


def pair_triples(triples: list[RelationTriple], rng_seed: int) -> list[TransferTask]:
    """Pair same-relation triples into transfer tasks.

    Within each relation group, every triple is used exactly once as source
    and paired with a seeded-random other triple as reference. The corpus_ref
    is the slug of the target topic; corpora are supplied separately.
    """
    groups: dict[str, list[RelationTriple]] = defaultdict(list)
    for triple in triples:
        groups[triple.relation].append(triple)
    shareable = {r: g for r, g in groups.items() if len(g) >= 2}
    if not shareable:
        logger.warning("no relation is shared by two or more triples")
        return []
    rng = random.Random(rng_seed)
    tasks: list[TransferTask] = []
    counter = 0
    for relation in sorted(shareable):
        group = shareable[relation]
        for source in group:
            partners = [t for t in group if t is not source]
            target = partners[rng.randrange(len(partners))]
            tasks.append(
                TransferTask(
                    task_id=f"pair-{counter:05d}",
                    source_text=f"{source.subject} {source.relation} {source.object}",
                    source_topic=source.subject,
                    target_topic=target.subject,
                    corpus_ref=slugify(target.subject),
                    reference_text=f"{target.subject} {target.relation} {target.object}",
                )
            )
            counter += 1
    return tasks


def pair_by_group(
    documents: list[GroupedDocument], rng_seed: int
) -> list[TransferTask]:
    """Pair each document with a seeded-random same-group partner as source.

    Documents in singleton groups are skipped with a warning.
    """
    groups: dict[str, list[GroupedDocument]] = defaultdict(list)
    for doc in documents:
        groups[doc.group].append(doc)
    rng = random.Random(rng_seed)
    tasks: list[TransferTask] = []
    counter = 0
    for group_name in sorted(groups):
        members = groups[group_name]
        if len(members) < 2:
            logger.warning("group %r has a single document; skipped", group_name)
            continue
        for doc in members:
            partners = [m for m in members if m is not doc]
            source = partners[rng.randrange(len(partners))]
            tasks.append(
                TransferTask(
                    task_id=f"group-{counter:05d}",
                    source_text=source.text,
                    source_topic=source.topic,
                    target_topic=doc.topic,
                    corpus_ref=slugify(doc.topic),
                    reference_text=doc.text,
                )
            )
            counter += 1
    return tasks


def _make_vocab(rng: random.Random, size: int) -> list[str]:
    """Distinct six-letter CV words; fixed length rules out substring clashes."""
    words: list[str] = []
    seen: set[str] = set()
    while len(words) < size:
        word = "".join(
            rng.choice(_CONSONANTS) + rng.choice(_VOWELS) for _ in range(3)
        )
        if word not in seen:
            seen.add(word)
            words.append(word)
    return words


def generate_synthetic(
    spec: SyntheticSpec,
) -> tuple[list[TransferTask], dict[str, Corpus], dict[str, str]]:
    """Seeded template tasks solvable exactly by the rule backend.

    Each task uses two-word topics and one attribute sentence per attr:
    source "the <a> of <t_s> is <v> ." with corpus facts
    "the <a> of <t_t> is <w> ." and a gold target substituting topic and
    values. All words in a task are distinct, so replacements never collide.
    """
    attrs = spec.attrs_per_topic
    words_per_task = 3 * attrs + 4
    if spec.vocab_size < words_per_task:
        raise ValueError(
            f"vocab_size {spec.vocab_size} too small; need >= {words_per_task} "
            f"for {attrs} attrs"
        )
    rng = random.Random(spec.rng_seed)
    vocab = _make_vocab(rng, spec.vocab_size)

    tasks: list[TransferTask] = []
    corpora: dict[str, Corpus] = {}
    gold: dict[str, str] = {}
    for i in range(spec.num_tasks):
        words = rng.sample(vocab, words_per_task)
        source_topic = f"{words[0]} {words[1]}"
        target_topic = f"{words[2]} {words[3]}"
        attr_words = words[4 : 4 + attrs]
        source_values = words[4 + attrs : 4 + 2 * attrs]
        target_values = words[4 + 2 * attrs : 4 + 3 * attrs]

        source_text = " ".join(
            f"the {a} of {source_topic} is {v} ."
            for a, v in zip(attr_words, source_values)
        )
        target_text = " ".join(
            f"the {a} of {target_topic} is {w} ."
            for a, w in zip(attr_words, target_values)
        )
        facts = [
            f"the {a} of {target_topic} is {w} ."
            for a, w in zip(attr_words, target_values)
        ]
        task_id = f"synth-{i:05d}"
        corpus_ref = f"corpus-{i:05d}"
        tasks.append(
            TransferTask(
                task_id=task_id,
                source_text=source_text,
                source_topic=source_topic,
                target_topic=target_topic,
                corpus_ref=corpus_ref,
                reference_text=target_text,
            )
        )
        corpora[corpus_ref] = Corpus.from_texts(facts)
        gold[task_id] = target_text
    return tasks, corpora, gold


_TASK_KEYS = {
    "task_id",
    "source_text",
    "source_topic",
    "target_topic",
    "corpus_ref",
    "reference_text",
}


def load_tasks(path) -> list[TransferTask]:
    """Read tasks.jsonl; malformed lines and duplicate task_ids are errors."""
    tasks: list[TransferTask] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise ValueError(f"{path}:{lineno}: expected a JSON object")
            missing = _TASK_KEYS - {"reference_text"} - set(obj)
            if missing:
                raise ValueError(
                    f"{path}:{lineno}: missing keys: {', '.join(sorted(missing))}"
                )
            if obj["task_id"] in seen:
                raise ValueError(
                    f"{path}:{lineno}: duplicate task_id {obj['task_id']!r}"
                )
            seen.add(obj["task_id"])
            try:
                tasks.append(
                    TransferTask(
                        task_id=obj["task_id"],
                        source_text=obj["source_text"],
                        source_topic=obj["source_topic"],
                        target_topic=obj["target_topic"],
                        corpus_ref=obj["corpus_ref"],
                        reference_text=obj.get("reference_text"),
                    )
                )
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return tasks


def save_tasks(path, tasks: list[TransferTask]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for task in tasks:
            handle.write(
                json.dumps(
                    {
                        "task_id": task.task_id,
                        "source_text": task.source_text,
                        "source_topic": task.source_topic,
                        "target_topic": task.target_topic,
                        "corpus_ref": task.corpus_ref,
                        "reference_text": task.reference_text,
                    }
                )
                + "\n"
            )


def load_corpus(path) -> dict[str, Corpus]:
    """Read one corpus file or a directory of them, keyed by corpus_ref."""
    root = Path(path)
    files = sorted(root.glob("*.json")) if root.is_dir() else [root]
    if not files:
        raise ValueError(f"{path}: no corpus files found")
    corpora: dict[str, Corpus] = {}
    for file in files:
        try:
            data = json.loads(file.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValueError(f"{file}: malformed JSON: {exc}") from exc
        if (
            not isinstance(data, dict)
            or "corpus_ref" not in data
            or not isinstance(data.get("facts"), list)
        ):
            raise ValueError(f"{file}: expected {{'corpus_ref': ..., 'facts': [...]}}")
        ref = data["corpus_ref"]
        if ref in corpora:
            raise ValueError(f"{file}: duplicate corpus_ref {ref!r}")
        try:
            corpora[ref] = Corpus.from_texts(data["facts"])
        except (TypeError, ValueError) as exc:
            raise ValueError(f"{file}: {exc}") from exc
    return corpora


def save_corpus(path, corpus_ref: str, corpus: Corpus) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(
            {"corpus_ref": corpus_ref, "facts": [f.text for f in corpus.facts]},
            handle,
        )
        handle.write("\n")


def load_triples(path) -> list[RelationTriple]:
    """Read subject<TAB>relation<TAB>object lines."""
    triples: list[RelationTriple] = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            cells = line.split("\t")
            if len(cells) != 3:
                raise ValueError(
                    f"{path}:{lineno}: expected 3 tab-separated fields, got {len(cells)}"
                )
            try:
                triples.append(RelationTriple(*cells))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return triples


def load_grouped_documents(path) -> list[GroupedDocument]:
    """Read docs.jsonl with {"text", "topic", "group"} per line."""
    docs: list[GroupedDocument] = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
            missing = {"text", "topic", "group"} - set(obj)
            if missing:
                raise ValueError(
                    f"{path}:{lineno}: missing keys: {', '.join(sorted(missing))}"
                )
            docs.append(GroupedDocument(obj["text"], obj["topic"], obj["group"]))
    return docs


def load_predictions(path) -> list[tuple[str, str]]:
    """Read predictions.jsonl as (task_id, prediction) pairs."""
    preds: list[tuple[str, str]] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
            if "task_id" not in obj or "prediction" not in obj:
                raise ValueError(f"{path}:{lineno}: missing task_id or prediction")
            if obj["task_id"] in seen:
                raise ValueError(
                    f"{path}:{lineno}: duplicate task_id {obj['task_id']!r}"
                )
            seen.add(obj["task_id"])
            preds.append((obj["task_id"], obj["prediction"]))
    return preds


def save_predictions(path, predictions: list[tuple[str, str]]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for task_id, prediction in predictions:
            handle.write(
                json.dumps({"task_id": task_id, "prediction": prediction}) + "\n"
            )


def write_synthetic_dataset(out_dir, spec: SyntheticSpec) -> None:
    """Materialize a synthetic benchmark: tasks.jsonl plus corpora/*.json."""
    out = Path(out_dir)
    corpora_dir = out / "corpora"
    corpora_dir.mkdir(parents=True, exist_ok=True)
    tasks, corpora, _ = generate_synthetic(spec)
    save_tasks(out / "tasks.jsonl", tasks)
    for ref, corpus in corpora.items():
        save_corpus(corpora_dir / f"{ref}.json", ref, corpus)
