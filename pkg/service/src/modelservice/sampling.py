"""Seeded nucleus (top-p) sampling and sequence generation."""

from __future__ import annotations

import torch
import torch.nn.functional as F

from .models import QgModel, encode_qg_source
from .vocab import ANSWER_MARKER, BOS, EOS, QUESTION_MARKER, Vocab


def nucleus_sample(
    logits: torch.Tensor, top_p: float, generator: torch.Generator
) -> int:
    """Sample from the smallest token set whose probability mass reaches top_p."""
    probs = F.softmax(logits, dim=-1)
    sorted_probs, sorted_ids = torch.sort(probs, descending=True)
    cumulative = torch.cumsum(sorted_probs, dim=-1)
    # keep every token up to and including the one that crosses top_p
    cutoff = int(torch.searchsorted(cumulative, torch.tensor(top_p)).item()) + 1
    cutoff = min(cutoff, sorted_probs.shape[-1])
    kept = sorted_probs[:cutoff]
    choice = torch.multinomial(kept / kept.sum(), 1, generator=generator)
    return int(sorted_ids[choice].item())


@torch.no_grad()
def sample_sequence(
    model: QgModel,
    vocab: Vocab,
    topic: str,
    context: str,
    top_p: float,
    generator: torch.Generator,
    max_steps: int = 48,
) -> list[str]:
    """Decode one marked question/answer sequence token by token."""
    src = torch.tensor([encode_qg_source(vocab, topic, context)], dtype=torch.long)
    if src.shape[1] > model.config.max_len:
        return []
    src_pad = torch.zeros_like(src, dtype=torch.bool)
    produced: list[int] = [vocab.stoi[BOS]]
    eos = vocab.stoi[EOS]
    for _ in range(min(max_steps, model.config.max_len - 1)):
        tgt = torch.tensor([produced], dtype=torch.long)
        tgt_pad = torch.zeros_like(tgt, dtype=torch.bool)
        logits = model(src, tgt, src_pad, tgt_pad)
        token = nucleus_sample(logits[0, -1], top_p, generator)
        if token == eos:
            break
        produced.append(token)
    return vocab.decode(produced[1:])


def parse_marked_sequence(tokens: list[str]) -> tuple[str, str] | None:
    """Split a generated sequence into (question, entity) at the markers."""
    if tokens.count(QUESTION_MARKER) != 1 or tokens.count(ANSWER_MARKER) != 1:
        return None
    q_at = tokens.index(QUESTION_MARKER)
    a_at = tokens.index(ANSWER_MARKER)
    if not q_at < a_at:
        return None
    question = " ".join(tokens[q_at + 1 : a_at])
    entity = " ".join(tokens[a_at + 1 :])
    if not question or not entity:
        return None
    return question, entity
