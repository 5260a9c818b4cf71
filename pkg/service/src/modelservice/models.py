"""Model architectures, span prediction, and checkpoint IO.

All models are small word-level transformers trained from scratch; they are
sized to train on one CPU. Dropout is zero throughout: these models are
expected to interpolate, and zero dropout keeps forward passes
deterministic.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import torch
import torch.nn.functional as F
from torch import nn

from .textproc import WordToken, word_tokens, words
from .vocab import BOS, EOS, PAD, SEP, Vocab


@dataclass(frozen=True)
class QgConfig:
    vocab_size: int
    d_model: int = 64
    nhead: int = 4
    num_layers: int = 2
    dim_feedforward: int = 128
    max_len: int = 96


class QgModel(nn.Module):
    """Encoder-decoder over (topic <sep> context) -> marked question/answer."""

    def __init__(self, config: QgConfig):
        super().__init__()
        self.config = config
        self.token_emb = nn.Embedding(config.vocab_size, config.d_model, padding_idx=0)
        self.pos_emb = nn.Embedding(config.max_len, config.d_model)
        encoder_layer = nn.TransformerEncoderLayer(
            d_model=config.d_model,
            nhead=config.nhead,
            dim_feedforward=config.dim_feedforward,
            dropout=0.0,
            batch_first=True,
        )
        encoder = nn.TransformerEncoder(
            encoder_layer,
            config.num_layers,
            norm=nn.LayerNorm(config.d_model),
            enable_nested_tensor=False,
        )
        self.transformer = nn.Transformer(
            d_model=config.d_model,
            nhead=config.nhead,
            num_decoder_layers=config.num_layers,
            dim_feedforward=config.dim_feedforward,
            dropout=0.0,
            batch_first=True,
            custom_encoder=encoder,
        )
        self.out = nn.Linear(config.d_model, config.vocab_size)

    def _embed(self, ids: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(ids.shape[1], device=ids.device)
        return self.token_emb(ids) + self.pos_emb(positions)[None, :, :]

    def forward(
        self,
        src_ids: torch.Tensor,
        tgt_ids: torch.Tensor,
        src_pad: torch.Tensor,
        tgt_pad: torch.Tensor,
    ) -> torch.Tensor:
        causal = torch.triu(
            torch.ones(tgt_ids.shape[1], tgt_ids.shape[1], dtype=torch.bool,
                       device=tgt_ids.device),
            diagonal=1,
        )
        hidden = self.transformer(
            self._embed(src_ids),
            self._embed(tgt_ids),
            tgt_mask=causal,
            src_key_padding_mask=src_pad,
            tgt_key_padding_mask=tgt_pad,
            memory_key_padding_mask=src_pad,
        )
        return self.out(hidden)


@dataclass(frozen=True)
class SaqaConfig:
    vocab_size: int
    d_model: int = 64
    nhead: int = 4
    num_layers: int = 2
    dim_feedforward: int = 128
    max_len: int = 160


class SaqaModel(nn.Module):
    """Encoder over (question <sep> guidance <sep> context) with span heads."""

    def __init__(self, config: SaqaConfig):
        super().__init__()
        self.config = config
        self.token_emb = nn.Embedding(config.vocab_size, config.d_model, padding_idx=0)
        self.pos_emb = nn.Embedding(config.max_len, config.d_model)
        layer = nn.TransformerEncoderLayer(
            d_model=config.d_model,
            nhead=config.nhead,
            dim_feedforward=config.dim_feedforward,
            dropout=0.0,
            batch_first=True,
        )
        self.encoder = nn.TransformerEncoder(
            layer, config.num_layers, enable_nested_tensor=False
        )
        self.start_head = nn.Linear(config.d_model, 1)
        self.end_head = nn.Linear(config.d_model, 1)

    def forward(
        self, ids: torch.Tensor, pad: torch.Tensor
    ) -> tuple[torch.Tensor, torch.Tensor]:
        positions = torch.arange(ids.shape[1], device=ids.device)
        hidden = self.encoder(
            self.token_emb(ids) + self.pos_emb(positions)[None, :, :],
            src_key_padding_mask=pad,
        )
        start = self.start_head(hidden).squeeze(-1)
        end = self.end_head(hidden).squeeze(-1)
        start = start.masked_fill(pad, -1e4)
        end = end.masked_fill(pad, -1e4)
        return start, end


def saqa_loss(
    start_logits: torch.Tensor,
    end_logits: torch.Tensor,
    start_gold: torch.Tensor,
    end_gold: torch.Tensor,
) -> torch.Tensor:
    """Sum of the start-index and end-index cross-entropies."""
    return F.cross_entropy(start_logits, start_gold) + F.cross_entropy(
        end_logits, end_gold
    )


def encode_qg_source(vocab: Vocab, topic: str, context: str) -> list[int]:
    tokens = [BOS, *words(topic), SEP, *words(context), EOS]
    return vocab.encode(tokens)


def encode_reader_input(
    vocab: Vocab, question: str, guidance: str, context: str
) -> tuple[list[int], int, list[WordToken]]:
    """Returns (ids, position of the first context token, context tokens)."""
    q_words = words(question)
    g_words = words(guidance)
    ctx_tokens = word_tokens(context)
    tokens = [BOS, *q_words, SEP, *g_words, SEP]
    ctx_offset = len(tokens)
    tokens.extend(t.key for t in ctx_tokens)
    tokens.append(EOS)
    return vocab.encode(tokens), ctx_offset, ctx_tokens


@dataclass(frozen=True)
class SpanPrediction:
    char_start: int
    char_end: int
    score: float


@torch.no_grad()
def predict_span(
    model: SaqaModel,
    vocab: Vocab,
    question: str,
    guidance: str,
    context: str,
    max_span_tokens: int,
) -> SpanPrediction | None:
    """Best span of at most ``max_span_tokens`` model tokens.

    Scores are start plus end log-probabilities after softmax over the
    context positions, so they are comparable across contexts of different
    lengths.
    """
    ids, ctx_offset, ctx_tokens = encode_reader_input(
        vocab, question, guidance, context
    )
    if not ctx_tokens or len(ids) > model.config.max_len:
        return None
    batch = torch.tensor([ids], dtype=torch.long)
    pad = torch.zeros_like(batch, dtype=torch.bool)
    start_logits, end_logits = model(batch, pad)
    n_ctx = len(ctx_tokens)
    ctx_positions = slice(ctx_offset, ctx_offset + n_ctx)
    start_lp = F.log_softmax(start_logits[0, ctx_positions], dim=-1)
    end_lp = F.log_softmax(end_logits[0, ctx_positions], dim=-1)

    best: tuple[float, int, int] | None = None
    for i in range(n_ctx):
        j_hi = min(n_ctx, i + max_span_tokens)
        for j in range(i, j_hi):
            score = float(start_lp[i] + end_lp[j])
            if best is None or score > best[0]:
                best = (score, i, j)
    if best is None:
        return None
    score, i, j = best
    return SpanPrediction(ctx_tokens[i].char_start, ctx_tokens[j].char_end, score)


@dataclass(frozen=True)
class EmbedConfig:
    dim: int = 128
    buckets: int = 4096
    seed: int = 0


class Embedder:
    """Mean of seeded random bucket vectors over hashed words."""

    def __init__(self, config: EmbedConfig, matrix: torch.Tensor | None = None):
        self.config = config
        if matrix is None:
            generator = torch.Generator().manual_seed(config.seed)
            matrix = torch.randn(config.buckets, config.dim, generator=generator)
        if matrix.shape != (config.buckets, config.dim):
            raise ValueError(f"embed matrix shape {tuple(matrix.shape)} mismatch")
        self.matrix = matrix

    def _bucket(self, word: str) -> int:
        digest = hashlib.blake2b(word.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "little") % self.config.buckets

    def embed(self, text: str) -> list[float]:
        keys = words(text)
        if not keys:
            return [0.0] * self.config.dim
        rows = torch.tensor([self._bucket(w) for w in keys], dtype=torch.long)
        return self.matrix[rows].mean(dim=0).tolist()


def _save_config(path: Path, config) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(dataclasses.asdict(config), handle)


def _load_config(path: Path, cls):
    with open(path, encoding="utf-8") as handle:
        return cls(**json.load(handle))


def save_qg(out_dir, model: QgModel, vocab: Vocab) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    torch.save(model.state_dict(), out / "model.pt")
    vocab.save(out / "vocab.json")
    _save_config(out / "config.json", model.config)


def load_qg(model_dir) -> tuple[QgModel, Vocab]:
    path = Path(model_dir)
    config = _load_config(path / "config.json", QgConfig)
    model = QgModel(config)
    model.load_state_dict(torch.load(path / "model.pt", weights_only=True))
    model.eval()
    return model, Vocab.load(path / "vocab.json")


def save_saqa(out_dir, model: SaqaModel, vocab: Vocab) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    torch.save(model.state_dict(), out / "model.pt")
    vocab.save(out / "vocab.json")
    _save_config(out / "config.json", model.config)


def load_saqa(model_dir) -> tuple[SaqaModel, Vocab]:
    path = Path(model_dir)
    config = _load_config(path / "config.json", SaqaConfig)
    model = SaqaModel(config)
    model.load_state_dict(torch.load(path / "model.pt", weights_only=True))
    model.eval()
    return model, Vocab.load(path / "vocab.json")


def save_embedder(out_dir, embedder: Embedder) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    torch.save(embedder.matrix, out / "matrix.pt")
    _save_config(out / "config.json", embedder.config)


def load_embedder(model_dir) -> Embedder:
    path = Path(model_dir)
    config = _load_config(path / "config.json", EmbedConfig)
    matrix = torch.load(path / "matrix.pt", weights_only=True)
    return Embedder(config, matrix)
