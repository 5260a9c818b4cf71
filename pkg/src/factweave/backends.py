"""Inference capability contracts plus two implementations.

Three capabilities back the pipeline: question/entity generation, span QA
with specificity guidance, and text embedding. ``MockBackend`` is a
deterministic rule backend over the template grammar
``"the <attr> of <topic> is <value> ."`` so the whole pipeline is exactly
verifiable; ``HttpBackend`` is the JSON-over-HTTP wire client.
"""

from __future__ import annotations

import hashlib
import random
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import requests

from .core import tokenize

EMBED_DIM = 256
NO_ANSWER_SCORE = float("-inf")


class BackendError(Exception):
    """Base class for backend failures; aborts the current task."""


class TransportError(BackendError):
    """Backend unreachable or server-side failure."""


class ProtocolError(BackendError):
    """Backend reachable but the response violates the wire contract."""


@dataclass(frozen=True)
class QgRequest:
    context: str
    topic: str
    num_samples: int
    top_p: float

    def __post_init__(self) -> None:
        if self.num_samples < 1:
            raise ValueError("num_samples must be >= 1")
        if not 0 < self.top_p <= 1:
            raise ValueError("top_p must be in (0, 1]")


@dataclass(frozen=True)
class QgResponse:
    pairs: tuple[tuple[str, str], ...]  # (question, entity)


@dataclass(frozen=True)
class QaRequest:
    question: str
    guidance: str  # the source entity, as specificity signal
    contexts: tuple[str, ...]
    max_span_tokens: int

    def __post_init__(self) -> None:
        if not self.contexts:
            raise ValueError("contexts must be non-empty")
        if self.max_span_tokens < 1:
            raise ValueError("max_span_tokens must be >= 1")


@dataclass(frozen=True)
class QaResponse:
    answer: str = ""
    score: float = NO_ANSWER_SCORE
    context_index: int = -1
    char_start: int = -1
    char_end: int = -1
    no_answer: bool = False

    @classmethod
    def none(cls) -> "QaResponse":
        return cls(no_answer=True)


@dataclass(frozen=True)
class EmbedRequest:
    texts: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.texts:
            raise ValueError("texts must be non-empty")


@dataclass(frozen=True)
class EmbedResponse:
    vectors: tuple[tuple[float, ...], ...]


@dataclass(frozen=True)
class NeighborLexicon:
    """Map from a normalized word to its ordered neighbor words (at most 20)."""

    neighbors: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for head, words in self.neighbors.items():
            if len(set(words)) != len(words):
                raise ValueError(f"neighbor list for {head!r} has duplicates")
            if len(words) > 20:
                raise ValueError(f"neighbor list for {head!r} exceeds 20 entries")
            if words == (head,):
                raise ValueError(f"{head!r} lists only itself as a neighbor")

    @classmethod
    def load(cls, path) -> "NeighborLexicon":
        """Read a UTF-8 file of ``word<TAB>n1<TAB>n2...`` lines.

        Neighbor lists are deduplicated (order kept) and truncated to 20.
        """
        table: dict[str, tuple[str, ...]] = {}
        with open(path, encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                cells = line.split("\t")
                if len(cells) < 2:
                    raise ValueError(f"{path}:{lineno}: expected word<TAB>neighbors")
                head = cells[0].strip().lower()
                seen: list[str] = []
                for word in cells[1:]:
                    word = word.strip()
                    if word and word not in seen:
                        seen.append(word)
                table[head] = tuple(seen[:20])
        return cls(table)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            for head in sorted(self.neighbors):
                handle.write("\t".join((head, *self.neighbors[head])) + "\n")


def build_guidance(answer: str, lexicon: NeighborLexicon, rng_seed: int) -> str:
    """Replace each word of ``answer`` with a seeded-random neighbor.

    Words absent from the lexicon are kept unchanged; the output has the same
    word count as the input.
    """
    rng = random.Random(rng_seed)
    out: list[str] = []
    for word in answer.split():
        options = lexicon.neighbors.get(word.lower())
        if options:
            out.append(options[rng.randrange(len(options))])
        else:
            out.append(word)
    return " ".join(out)


class Backend(ABC):
    """The three inference capabilities the pipeline consumes.

    Implementations must be stateless across calls (apart from the per-call
    seed channel) and safe for concurrent use.
    """

    @abstractmethod
    def generate_pairs(self, req: QgRequest, seed: int) -> QgResponse:
        """Sample up to ``num_samples`` (question, entity) pairs from a context."""

    @abstractmethod
    def answer_span(self, req: QaRequest) -> QaResponse:
        """Extract the best answer span across contexts under the length cap."""

    @abstractmethod
    def embed(self, req: EmbedRequest) -> EmbedResponse:
        """Embed each text into a fixed-dimension dense vector."""


def _norm_phrase(text: str) -> str:
    return " ".join(t.normalized for t in tokenize(text) if t.normalized)


def _token_count(text: str) -> int:
    return len(tokenize(text))


# question shape emitted and understood by the rule backend;
# the topic group is empty for generic (topic-stripped) questions
_QUESTION_RE = re.compile(
    r"^\s*what\s+is\s+the\s+(.+?)\s+of\s*(.*?)\s*\?\s*$", re.IGNORECASE
)
_FACT_RE = re.compile(
    r"\bthe\s+(.+?)\s+of\s+(.+?)\s+is\s+(.+?)(?=\s*[.!?]|\s*$)", re.IGNORECASE
)


class MockBackend(Backend):
    """Deterministic rule backend over ``"the <attr> of <topic> is <value> ."``.

    QG inverts the template into ``"what is the <attr> of <topic> ?"`` with
    the value as entity. QA scores a candidate value by template match
    quality (attribute match, plus one when the question's topic matches the
    fact's) minus the token-count distance to the guidance. Embedding is a
    hashed bag of normalized tokens, dimension 256, unnormalized.
    """

    def generate_pairs(self, req: QgRequest, seed: int) -> QgResponse:
        del seed  # fully deterministic; the seed channel is honored trivially
        pattern = re.compile(
            r"\bthe\s+(.+?)\s+of\s+(" + re.escape(req.topic) + r")\s+is\s+(.+?)(?=\s*[.!?]|\s*$)",
            re.IGNORECASE,
        )
        pairs: list[tuple[str, str]] = []
        for match in pattern.finditer(req.context):
            attr, topic_surface, value = match.group(1), match.group(2), match.group(3)
            pairs.append((f"what is the {attr} of {topic_surface} ?", value))
            if len(pairs) >= req.num_samples:
                break
        return QgResponse(tuple(pairs))

    def answer_span(self, req: QaRequest) -> QaResponse:
        parsed = _QUESTION_RE.match(req.question)
        if parsed is None:
            return QaResponse.none()
        want_attr = _norm_phrase(parsed.group(1))
        want_topic = _norm_phrase(parsed.group(2))
        guidance_len = _token_count(req.guidance)

        best: QaResponse | None = None
        for ci, context in enumerate(req.contexts):
            fact = _FACT_RE.search(context)
            if fact is None:
                continue
            if _norm_phrase(fact.group(1)) != want_attr:
                continue
            quality = 1.0
            if want_topic and _norm_phrase(fact.group(2)) == want_topic:
                quality += 1.0
            start, end = fact.span(3)
            value_tokens = tokenize(context[start:end])
            if len(value_tokens) > req.max_span_tokens:
                end = start + value_tokens.tokens[req.max_span_tokens - 1].char_end
            answer = context[start:end]
            score = quality - abs(_token_count(answer) - guidance_len)
            candidate = QaResponse(answer, score, ci, start, end)
            if best is None or score > best.score:
                best = candidate
        return best if best is not None else QaResponse.none()

    def embed(self, req: EmbedRequest) -> EmbedResponse:
        vectors = []
        for text in req.texts:
            vec = [0.0] * EMBED_DIM
            for token in tokenize(text):
                if token.normalized:
                    vec[_hash_bucket(token.normalized)] += 1.0
            vectors.append(tuple(vec))
        return EmbedResponse(tuple(vectors))


def _hash_bucket(token: str) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % EMBED_DIM


class HttpBackend(Backend):
    """JSON-over-HTTP client for the /v1/qg, /v1/qa, /v1/embed endpoints."""

    def __init__(self, base_url: str, timeout_ms: int = 30000):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout_ms / 1000.0
        self._session = requests.Session()

    def _post(self, path: str, body: dict) -> dict:
        url = self.base_url + path
        try:
            resp = self._session.post(url, json=body, timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransportError(f"POST {url} failed: {exc}") from exc
        if resp.status_code >= 500:
            raise TransportError(f"POST {url} returned {resp.status_code}")
        if resp.status_code != 200:
            raise ProtocolError(
                f"POST {url} returned {resp.status_code}: {resp.text[:200]}"
            )
        try:
            data = resp.json()
        except ValueError as exc:
            raise ProtocolError(f"POST {url} returned a non-JSON body") from exc
        if not isinstance(data, dict):
            raise ProtocolError(f"POST {url} returned non-object JSON")
        return data

    def generate_pairs(self, req: QgRequest, seed: int) -> QgResponse:
        data = self._post(
            "/v1/qg",
            {
                "context": req.context,
                "topic": req.topic,
                "num_samples": req.num_samples,
                "top_p": req.top_p,
                "seed": seed,
            },
        )
        raw = data.get("pairs")
        if not isinstance(raw, list):
            raise ProtocolError("/v1/qg response missing 'pairs' list")
        if len(raw) > req.num_samples:
            raise ProtocolError(
                f"/v1/qg returned {len(raw)} pairs for num_samples={req.num_samples}"
            )
        pairs: list[tuple[str, str]] = []
        for item in raw:
            if not isinstance(item, dict):
                raise ProtocolError("/v1/qg pair is not an object")
            question, entity = item.get("question"), item.get("entity")
            if not isinstance(question, str) or not question:
                raise ProtocolError("/v1/qg pair has an invalid 'question'")
            if not isinstance(entity, str) or not entity:
                raise ProtocolError("/v1/qg pair has an invalid 'entity'")
            pairs.append((question, entity))
        return QgResponse(tuple(pairs))

    def answer_span(self, req: QaRequest) -> QaResponse:
        data = self._post(
            "/v1/qa",
            {
                "question": req.question,
                "guidance": req.guidance,
                "contexts": list(req.contexts),
                "max_span_tokens": req.max_span_tokens,
            },
        )
        if data.get("no_answer") is True:
            return QaResponse.none()
        try:
            resp = QaResponse(
                answer=data["answer"],
                score=float(data["score"]),
                context_index=int(data["context_index"]),
                char_start=int(data["char_start"]),
                char_end=int(data["char_end"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolError(f"/v1/qa response malformed: {exc}") from exc
        if not 0 <= resp.context_index < len(req.contexts):
            raise ProtocolError("/v1/qa context_index out of range")
        cited = req.contexts[resp.context_index][resp.char_start : resp.char_end]
        if cited != resp.answer:
            raise ProtocolError("/v1/qa answer does not match the cited span")
        if _token_count(resp.answer) > req.max_span_tokens:
            raise ProtocolError("/v1/qa answer exceeds max_span_tokens")
        return resp

    def embed(self, req: EmbedRequest) -> EmbedResponse:
        data = self._post("/v1/embed", {"texts": list(req.texts)})
        raw = data.get("vectors")
        if not isinstance(raw, list) or len(raw) != len(req.texts):
            raise ProtocolError("/v1/embed vectors missing or length mismatch")
        vectors: list[tuple[float, ...]] = []
        dim: int | None = None
        for vec in raw:
            if not isinstance(vec, list) or not vec:
                raise ProtocolError("/v1/embed vector is not a non-empty list")
            values = tuple(float(x) for x in vec)
            if any(x != x or x in (float("inf"), float("-inf")) for x in values):
                raise ProtocolError("/v1/embed vector contains non-finite values")
            if dim is None:
                dim = len(values)
            elif len(values) != dim:
                raise ProtocolError("/v1/embed vectors have inconsistent dimensions")
            vectors.append(values)
        return EmbedResponse(tuple(vectors))


def make_backend(kind: str, timeout_ms: int = 30000) -> Backend:
    """Resolve a CLI backend spec: ``"mock"`` or a base URL."""
    if kind == "mock":
        return MockBackend()
    if kind.startswith("http://") or kind.startswith("https://"):
        return HttpBackend(kind, timeout_ms=timeout_ms)
    raise ValueError(f"unknown backend {kind!r}; expected 'mock' or an http(s) URL")
