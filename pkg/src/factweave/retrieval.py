"""Exact top-k maximum inner-product search over corpus fact embeddings.

The index is a flat float32 matrix scanned with a vectorized dot product;
no approximation. Ties break toward the lower fact index, which makes the
top-k list a prefix of every larger-k list.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .backends import Backend, EmbedRequest, ProtocolError
from .core import Corpus

INDEX_MAGIC = b"FWIX1"
EMBED_BATCH = 64


@dataclass(frozen=True)
class VectorIndex:
    """Immutable dense index: row i holds the vector for fact_indices[i]."""

    dimension: int
    fact_indices: tuple[int, ...]
    vectors: np.ndarray  # (n, dimension) float32
    corpus_ref: str
    texts: tuple[str, ...]  # fact texts aligned with fact_indices

    def __len__(self) -> int:
        return len(self.fact_indices)


@dataclass(frozen=True)
class RetrievedContext:
    """Top-k facts for one query; scores are non-increasing."""

    fact_indices: tuple[int, ...]
    texts: tuple[str, ...]
    scores: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.fact_indices)


def build_index(
    corpus: Corpus, embed_backend: Backend, corpus_ref: str = ""
) -> VectorIndex:
    """Embed every corpus fact (batched) into an immutable index."""
    if len(corpus) == 0:
        raise ValueError("corpus must be non-empty")
    blocks: list[np.ndarray] = []
    dimension: int | None = None
    for start in range(0, len(corpus), EMBED_BATCH):
        batch = corpus.facts[start : start + EMBED_BATCH]
        resp = embed_backend.embed(EmbedRequest(tuple(f.text for f in batch)))
        block = np.asarray(resp.vectors, dtype=np.float32)
        if dimension is None:
            dimension = int(block.shape[1])
        elif int(block.shape[1]) != dimension:
            raise ProtocolError("embedding dimension changed across batches")
        blocks.append(block)
    matrix = np.vstack(blocks)
    matrix.setflags(write=False)
    return VectorIndex(
        dimension=int(dimension),
        fact_indices=tuple(range(len(corpus))),
        vectors=matrix,
        corpus_ref=corpus_ref,
        texts=tuple(f.text for f in corpus.facts),
    )


def search(index: VectorIndex, query_vector: np.ndarray, k: int) -> np.ndarray:
    """Row positions of the min(k, n) largest inner products.

    Exact full scan; equal scores order by ascending fact index.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    query = np.asarray(query_vector, dtype=np.float32)
    if query.shape != (index.dimension,):
        raise ValueError(
            f"query vector has shape {query.shape}, expected ({index.dimension},)"
        )
    scores = index.vectors @ query
    order = np.lexsort((np.asarray(index.fact_indices), -scores))
    return order[: min(k, len(scores))]


def retrieve(
    index: VectorIndex, query: str, k: int, embed_backend: Backend
) -> RetrievedContext:
    """Embed the query and return its top-k facts by inner product."""
    resp = embed_backend.embed(EmbedRequest((query,)))
    query_vector = np.asarray(resp.vectors[0], dtype=np.float32)
    if query_vector.shape != (index.dimension,):
        raise ProtocolError(
            f"query embedding dimension {query_vector.shape[0]} does not match "
            f"index dimension {index.dimension}"
        )
    rows = search(index, query_vector, k)
    scores = index.vectors[rows] @ query_vector
    return RetrievedContext(
        fact_indices=tuple(int(index.fact_indices[r]) for r in rows),
        texts=tuple(index.texts[r] for r in rows),
        scores=tuple(float(s) for s in scores),
    )


def save_index(index: VectorIndex, path) -> None:
    """Write the binary index file (magic, dimension u32, count u64, records)."""
    with open(path, "wb") as handle:
        handle.write(INDEX_MAGIC)
        handle.write(struct.pack("<I", index.dimension))
        handle.write(struct.pack("<Q", len(index.fact_indices)))
        for row, fact_index in enumerate(index.fact_indices):
            handle.write(struct.pack("<Q", fact_index))
            handle.write(index.vectors[row].astype("<f4").tobytes())


def load_index(path, corpus: Corpus, corpus_ref: str = "") -> VectorIndex:
    """Read an index file and rejoin fact texts from the corpus."""
    with open(path, "rb") as handle:
        magic = handle.read(len(INDEX_MAGIC))
        if magic != INDEX_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, not an index file")
        dimension = struct.unpack("<I", handle.read(4))[0]
        count = struct.unpack("<Q", handle.read(8))[0]
        fact_indices: list[int] = []
        rows = np.empty((count, dimension), dtype=np.float32)
        record = struct.Struct("<Q")
        for i in range(count):
            fact_indices.append(record.unpack(handle.read(8))[0])
            rows[i] = np.frombuffer(handle.read(4 * dimension), dtype="<f4")
        trailing = handle.read(1)
    if trailing:
        raise ValueError(f"{path}: trailing bytes after {count} records")
    if len(set(fact_indices)) != count:
        raise ValueError(f"{path}: duplicate fact indices")
    for fi in fact_indices:
        if not 0 <= fi < len(corpus):
            raise ValueError(f"{path}: fact index {fi} outside corpus of {len(corpus)}")
    rows.setflags(write=False)
    return VectorIndex(
        dimension=dimension,
        fact_indices=tuple(fact_indices),
        vectors=rows,
        corpus_ref=corpus_ref,
        texts=tuple(corpus.facts[fi].text for fi in fact_indices),
    )
