"""ASCII rendering for logs and replay transcripts."""
from __future__ import annotations

from .layouts import GLYPHS
from .types import CellKind, Item, ItemKind, ChopState, KitchenState

_ITEM_GLYPHS = {"tomato_whole": "t", "tomato_chopped": "c", "plate": "p", "salad": "s"}


def item_glyph(item: Item) -> str:
    if item.assembled is not None:
        return _ITEM_GLYPHS["salad"]
    if item.kind is ItemKind.PLATE:
        return _ITEM_GLYPHS["plate"]
    if item.chop_state is ChopState.CHOPPED:
        return _ITEM_GLYPHS["tomato_chopped"]
    return _ITEM_GLYPHS["tomato_whole"]


def render(state: KitchenState) -> str:
    """One character per cell; agents drawn as 1/2 over their floor cell."""
    agent_at = {pose.position: str(i + 1) for i, pose in enumerate(state.agents)}
    lines = []
    for r, row in enumerate(state.grid):
        chars = []
        for c, cell in enumerate(row):
            if (r, c) in agent_at:
                chars.append(agent_at[(r, c)])
            elif cell.item is not None:
                chars.append(item_glyph(cell.item))
            else:
                chars.append(GLYPHS[cell.kind])
        lines.append("".join(chars))
    held = ", ".join(
        f"agent {i + 1} holds {pose.held.phrase() if pose.held else 'nothing'}"
        for i, pose in enumerate(state.agents)
    )
    lines.append(f"t={state.timestep} {held}")
    return "\n".join(lines)
