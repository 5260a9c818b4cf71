"""Zero-shot source-text infilling via explicit replacement plans.

The plan is materialized (rather than replacing in place) so every splice
is auditable in the trace and an external infiller could consume it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

from .core import find_occurrences
from .saqa import EntityMap

ORIGIN_ENTITY = "entity"
ORIGIN_TOPIC = "topic"

Origin = Literal["entity", "topic"]


@dataclass(frozen=True)
class Replacement:
    char_start: int
    char_end: int
    replacement: str
    origin: Origin


@dataclass(frozen=True)
class InfillPlan:
    """Non-overlapping replacement spans, sorted ascending by start."""

    replacements: tuple[Replacement, ...]

    def __post_init__(self) -> None:
        prev_end = 0
        for r in self.replacements:
            if r.char_start < prev_end:
                raise ValueError(
                    f"plan spans overlap or are unsorted at {r.char_start}"
                )
            if r.char_end < r.char_start:
                raise ValueError(f"inverted span ({r.char_start}, {r.char_end})")
            prev_end = r.char_end

    def __len__(self) -> int:
        return len(self.replacements)


def plan_infill(
    source_text: str,
    entity_map: EntityMap,
    source_topic: str,
    target_topic: str,
) -> tuple[InfillPlan, list[str]]:
    """Plan the replacement of every entity occurrence and every topic occurrence.

    Overlaps resolve deterministically: longer match wins, an entity beats
    the topic at equal length, and remaining ties go leftmost-first greedy.
    Entities absent from the text are skipped with a warning record.
    """
    warnings: list[str] = []
    candidates: list[Replacement] = []
    for entity, entry in entity_map.items():
        spans = find_occurrences(source_text, entity)
        if not spans:
            warnings.append(f"entity {entity!r} not found in source text; skipped")
            continue
        candidates.extend(
            Replacement(s, e, entry.answer, ORIGIN_ENTITY) for s, e in spans
        )
    candidates.extend(
        Replacement(s, e, target_topic, ORIGIN_TOPIC)
        for s, e in find_occurrences(source_text, source_topic)
    )

    # precedence: longer first, entity before topic, then leftmost
    candidates.sort(
        key=lambda r: (
            -(r.char_end - r.char_start),
            0 if r.origin == ORIGIN_ENTITY else 1,
            r.char_start,
        )
    )
    accepted: list[Replacement] = []
    for cand in candidates:
        if any(
            cand.char_start < a.char_end and a.char_start < cand.char_end
            for a in accepted
        ):
            continue
        accepted.append(cand)
    accepted.sort(key=lambda r: r.char_start)
    return InfillPlan(tuple(accepted)), warnings


def apply_infill(source_text: str, plan: InfillPlan) -> str:
    """Splice the plan into the text; characters outside all spans are untouched."""
    pieces: list[str] = []
    prev = 0
    for r in plan.replacements:
        if r.char_start < prev:
            raise ValueError("plan spans overlap")
        pieces.append(source_text[prev : r.char_start])
        pieces.append(r.replacement)
        prev = r.char_end
    pieces.append(source_text[prev:])
    return "".join(pieces)
