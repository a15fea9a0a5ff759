"""Plain-text layout fixtures.

One character per cell:

    ``.`` floor        ``#`` counter      ``X`` wall
    ``T`` tomato source  ``P`` plate source
    ``C`` cutboard       ``D`` delivery
    ``1``/``2`` agent start positions (floor underneath)

Agents always start facing north with empty hands.
"""
from __future__ import annotations

from importlib import resources

from .types import AgentPose, Cell, CellKind, ConfigurationError, Direction

LEGEND: dict[str, CellKind] = {
    ".": CellKind.FLOOR,
    "#": CellKind.COUNTER,
    "X": CellKind.WALL,
    "T": CellKind.TOMATO_SOURCE,
    "P": CellKind.PLATE_SOURCE,
    "C": CellKind.CUTBOARD,
    "D": CellKind.DELIVERY,
}

GLYPHS: dict[CellKind, str] = {kind: ch for ch, kind in LEGEND.items()}

MAP_IDS = ("single_room", "separate_rooms")


def parse_layout(text: str) -> tuple[list[list[Cell]], list[AgentPose]]:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ConfigurationError("empty layout")
    width = len(lines[0])
    if any(len(line) != width for line in lines):
        raise ConfigurationError("layout rows have unequal length")

    grid: list[list[Cell]] = []
    starts: dict[int, tuple[int, int]] = {}
    for r, line in enumerate(lines):
        row: list[Cell] = []
        for c, ch in enumerate(line):
            if ch.isdigit():
                idx = int(ch) - 1
                if idx in starts:
                    raise ConfigurationError(f"duplicate agent marker {ch}")
                starts[idx] = (r, c)
                row.append(Cell(CellKind.FLOOR))
            elif ch in LEGEND:
                row.append(Cell(LEGEND[ch]))
            else:
                raise ConfigurationError(f"unknown layout glyph {ch!r} at {(r, c)}")
        grid.append(row)

    if sorted(starts) != list(range(len(starts))):
        raise ConfigurationError("agent markers must be 1..n")
    agents = [
        AgentPose(position=starts[i], facing=Direction.NORTH) for i in sorted(starts)
    ]
    return grid, agents


def load_layout(map_id: str) -> tuple[list[list[Cell]], list[AgentPose]]:
    if map_id not in MAP_IDS:
        raise ConfigurationError(f"unknown map_id {map_id!r}; expected one of {MAP_IDS}")
    text = resources.files("verco.kitchen").joinpath(f"maps/{map_id}.txt").read_text()
    return parse_layout(text)


def floor_regions(grid: list[list[Cell]]) -> list[set[tuple[int, int]]]:
    """Connected components of floor cells (4-neighbourhood)."""
    floors = {
        (r, c)
        for r, row in enumerate(grid)
        for c, cell in enumerate(row)
        if cell.kind is CellKind.FLOOR
    }
    regions: list[set[tuple[int, int]]] = []
    remaining = set(floors)
    while remaining:
        seed = next(iter(remaining))
        region = {seed}
        frontier = [seed]
        while frontier:
            r, c = frontier.pop()
            for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if (nr, nc) in remaining and (nr, nc) not in region:
                    region.add((nr, nc))
                    frontier.append((nr, nc))
        remaining -= region
        regions.append(region)
    return regions
