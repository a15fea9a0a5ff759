"""Deterministic textualization of partial observations."""
from __future__ import annotations

from dataclasses import dataclass

from ..kitchen.types import CellKind, Item, ObservationWindow, WindowCell

FALLBACK_SENTENCE = "You see nothing notable."

_NUMBER_WORDS = {1: "one", 2: "two"}

_STATION_PHRASES = {
    CellKind.TOMATO_SOURCE: "a tomato source",
    CellKind.PLATE_SOURCE: "a plate source",
    CellKind.CUTBOARD: "a cutboard",
    CellKind.DELIVERY: "a delivery counter",
}


@dataclass(frozen=True)
class TextObservation:
    text: str
    source_window: ObservationWindow


def offset_phrase(dr: int, dc: int) -> str:
    """Relative locator such as 'two steps north and one step east'."""
    parts = []
    if dr:
        parts.append(_axis_phrase(abs(dr), "north" if dr < 0 else "south"))
    if dc:
        parts.append(_axis_phrase(abs(dc), "west" if dc < 0 else "east"))
    if not parts:
        raise ValueError("entity shares the observer's cell")
    return " and ".join(parts)


def _axis_phrase(count: int, direction: str) -> str:
    unit = "step" if count == 1 else "steps"
    return f"{_NUMBER_WORDS[count]} {unit} {direction}"


def _entity_sentences(dr: int, dc: int, cell: WindowCell) -> list[str]:
    where = offset_phrase(dr, dc)
    sentences = []
    if cell.kind in _STATION_PHRASES:
        phrase = _STATION_PHRASES[cell.kind]
        if cell.item is not None:
            sentences.append(f"{_cap(phrase)} with {cell.item.phrase()} is {where}.")
        else:
            sentences.append(f"{_cap(phrase)} is {where}.")
    elif cell.item is not None:
        sentences.append(f"{_cap(cell.item.phrase())} is on a counter {where}.")
    if cell.agent is not None:
        if cell.agent_held is not None:
            sentences.append(f"Your teammate is {where} holding {cell.agent_held.phrase()}.")
        else:
            sentences.append(f"Your teammate is {where}.")
    return sentences


def _cap(phrase: str) -> str:
    return phrase[0].upper() + phrase[1:]


def _held_phrase(item: Item | None) -> str:
    return item.phrase() if item is not None else "nothing"


def textualize(window: ObservationWindow) -> TextObservation:
    """Render one agent's window as text.

    Sentence order is fixed: held item, facing, then visible entities in
    row-major window order, so identical windows give identical text.
    """
    sentences = [
        f"You hold {_held_phrase(window.own_held)}.",
        f"You face {window.own_facing.value}.",
    ]
    entity_sentences: list[str] = []
    for dr, dc, cell in window.visible():
        if dr == 0 and dc == 0:
            continue
        entity_sentences.extend(_entity_sentences(dr, dc, cell))
    if entity_sentences:
        sentences.extend(entity_sentences)
    else:
        sentences.append(FALLBACK_SENTENCE)
    return TextObservation(text=" ".join(sentences), source_window=window)


# Every word textualize() can emit, for vocabulary construction.
OBSERVATION_WORDS: frozenset[str] = frozenset(
    {
        "You",
        "hold",
        "face",
        "nothing",
        "see",
        "notable",
        "a",
        "tomato",
        "chopped",
        "salad",
        "plate",
        "source",
        "cutboard",
        "delivery",
        "counter",
        "with",
        "is",
        "on",
        "Your",
        "teammate",
        "holding",
        "and",
        "one",
        "two",
        "step",
        "steps",
        "north",
        "south",
        "east",
        "west",
        "A",
    }
)
