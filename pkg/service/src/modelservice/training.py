"""Training loops for the generator and the guided reader."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import torch
from torch import nn

from .data import QgTrainExample, SaqaTrainExample
from .models import (
    QgConfig,
    QgModel,
    SaqaConfig,
    SaqaModel,
    encode_qg_source,
    encode_reader_input,
    saqa_loss,
)
from .textproc import word_tokens, words
from .vocab import BOS, EOS, SEP, Vocab

logger = logging.getLogger(__name__)


class TrainingDiverged(RuntimeError):
    """Raised when the loss goes non-finite; carries the loss history."""

    def __init__(self, message: str, losses: list[float]):
        super().__init__(message)
        self.losses = losses


@dataclass
class TrainSettings:
    """Defaults follow the reference recipe (batch 8, lr 2e-5); the small
    from-scratch models used here normally override the learning rate."""

    epochs: int = 3
    batch_size: int = 8
    learning_rate: float = 2e-5
    seed: int = 0
    d_model: int = 64
    num_layers: int = 2


@dataclass
class TrainResult:
    model: nn.Module
    vocab: Vocab
    epoch_losses: list[float] = field(default_factory=list)


def _pad_batch(rows: list[list[int]], pad_id: int) -> tuple[torch.Tensor, torch.Tensor]:
    width = max(len(r) for r in rows)
    ids = torch.full((len(rows), width), pad_id, dtype=torch.long)
    pad = torch.ones((len(rows), width), dtype=torch.bool)
    for i, row in enumerate(rows):
        ids[i, : len(row)] = torch.tensor(row, dtype=torch.long)
        pad[i, : len(row)] = False
    return ids, pad


def _epoch_order(n: int, generator: torch.Generator) -> list[int]:
    return torch.randperm(n, generator=generator).tolist()


def train_qg(examples: list[QgTrainExample], settings: TrainSettings) -> TrainResult:
    """Fit the generator to produce marked question/answer sequences."""
    if not examples:
        raise ValueError("no training examples")
    torch.manual_seed(settings.seed)
    vocab = Vocab.build(
        [words(ex.topic) + words(ex.context) + ex.target_sequence.split()
         for ex in examples]
    )
    config = QgConfig(
        vocab_size=len(vocab),
        d_model=settings.d_model,
        num_layers=settings.num_layers,
    )
    model = QgModel(config)
    optimizer = torch.optim.Adam(model.parameters(), lr=settings.learning_rate)
    pad_id = vocab.stoi["<pad>"]
    bos_id, eos_id = vocab.stoi[BOS], vocab.stoi[EOS]

    sources = [encode_qg_source(vocab, ex.topic, ex.context) for ex in examples]
    targets = [vocab.encode(ex.target_sequence.split()) for ex in examples]
    shuffler = torch.Generator().manual_seed(settings.seed)
    criterion = nn.CrossEntropyLoss(ignore_index=pad_id)

    losses: list[float] = []
    model.train()
    for epoch in range(settings.epochs):
        order = _epoch_order(len(examples), shuffler)
        total, batches = 0.0, 0
        for at in range(0, len(order), settings.batch_size):
            chosen = order[at : at + settings.batch_size]
            src_ids, src_pad = _pad_batch([sources[i] for i in chosen], pad_id)
            tgt_in, tgt_pad = _pad_batch(
                [[bos_id] + targets[i] for i in chosen], pad_id
            )
            tgt_out, _ = _pad_batch([targets[i] + [eos_id] for i in chosen], pad_id)
            logits = model(src_ids, tgt_in, src_pad, tgt_pad)
            loss = criterion(logits.reshape(-1, len(vocab)), tgt_out.reshape(-1))
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            value = float(loss.item())
            if value != value or value == float("inf"):
                raise TrainingDiverged(
                    f"qg loss non-finite at epoch {epoch}", losses
                )
            total += value
            batches += 1
        losses.append(total / batches)
        logger.info("qg epoch %d loss %.4f", epoch, losses[-1])
    model.eval()
    return TrainResult(model, vocab, losses)


def _reader_gold_positions(
    example: SaqaTrainExample, ctx_offset: int, context: str
) -> tuple[int, int] | None:
    tokens = word_tokens(context)
    start_tok = end_tok = None
    for pos, tok in enumerate(tokens):
        if tok.char_start == example.answer_start:
            start_tok = pos
        if tok.char_end == example.answer_end:
            end_tok = pos
    if start_tok is None or end_tok is None or end_tok < start_tok:
        return None
    return ctx_offset + start_tok, ctx_offset + end_tok


def train_saqa(
    examples: list[SaqaTrainExample], settings: TrainSettings
) -> TrainResult:
    """Fit the reader to recover answer spans under specificity guidance."""
    if not examples:
        raise ValueError("no training examples")
    torch.manual_seed(settings.seed)
    vocab = Vocab.build(
        [words(ex.question) + words(ex.guidance) + words(ex.context)
         for ex in examples]
    )
    config = SaqaConfig(
        vocab_size=len(vocab),
        d_model=settings.d_model,
        num_layers=settings.num_layers,
    )
    model = SaqaModel(config)
    optimizer = torch.optim.Adam(model.parameters(), lr=settings.learning_rate)
    pad_id = vocab.stoi["<pad>"]

    encoded: list[tuple[list[int], int, int]] = []
    skipped = 0
    for ex in examples:
        ids, ctx_offset, _ = encode_reader_input(
            vocab, ex.question, ex.guidance, ex.context
        )
        gold = _reader_gold_positions(ex, ctx_offset, ex.context)
        if gold is None or len(ids) > config.max_len:
            skipped += 1
            continue
        encoded.append((ids, gold[0], gold[1]))
    if skipped:
        logger.info("train_saqa skipped %d/%d unalignable examples",
                    skipped, len(examples))
    if not encoded:
        raise ValueError("no alignable training examples")

    shuffler = torch.Generator().manual_seed(settings.seed)
    losses: list[float] = []
    model.train()
    for epoch in range(settings.epochs):
        order = _epoch_order(len(encoded), shuffler)
        total, batches = 0.0, 0
        for at in range(0, len(order), settings.batch_size):
            chosen = order[at : at + settings.batch_size]
            ids, pad = _pad_batch([encoded[i][0] for i in chosen], pad_id)
            start_gold = torch.tensor([encoded[i][1] for i in chosen])
            end_gold = torch.tensor([encoded[i][2] for i in chosen])
            start_logits, end_logits = model(ids, pad)
            loss = saqa_loss(start_logits, end_logits, start_gold, end_gold)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            value = float(loss.item())
            if value != value or value == float("inf"):
                raise TrainingDiverged(
                    f"saqa loss non-finite at epoch {epoch}", losses
                )
            total += value
            batches += 1
        losses.append(total / batches)
        logger.info("saqa epoch %d loss %.4f", epoch, losses[-1])
    model.eval()
    return TrainResult(model, vocab, losses)
