"""Core domain types for the two-agent kitchen gridworld."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace


class CellKind(enum.Enum):
    FLOOR = "floor"
    COUNTER = "counter"
    TOMATO_SOURCE = "tomato_source"
    CUTBOARD = "cutboard"
    PLATE_SOURCE = "plate_source"
    DELIVERY = "delivery"
    WALL = "wall"


# Cells an item may rest on. Sources never hold items (they mint fresh ones)
# and delivery consumes whatever is handed over.
ITEM_REST_KINDS = frozenset({CellKind.COUNTER, CellKind.CUTBOARD})


class ItemKind(enum.Enum):
    TOMATO = "tomato"
    PLATE = "plate"


class ChopState(enum.Enum):
    WHOLE = "whole"
    CHOPPED = "chopped"
    NA = "n/a"


class DishSpec(enum.Enum):
    TOMATO_SALAD = "tomato_salad"


class Direction(enum.Enum):
    NORTH = "north"
    SOUTH = "south"
    EAST = "east"
    WEST = "west"

    @property
    def delta(self) -> tuple[int, int]:
        return _DIRECTION_DELTAS[self]


# (row, col) offsets; row 0 is the top of the grid, so north decreases row.
_DIRECTION_DELTAS = {
    Direction.NORTH: (-1, 0),
    Direction.SOUTH: (1, 0),
    Direction.EAST: (0, 1),
    Direction.WEST: (0, -1),
}


class Verb(enum.Enum):
    MOVE_UP = "move_up"
    MOVE_DOWN = "move_down"
    MOVE_LEFT = "move_left"
    MOVE_RIGHT = "move_right"
    PICK_UP = "pick_up"
    PUT_DOWN = "put_down"
    CHOP = "chop"
    DELIVER = "deliver"
    NOOP = "noop"


# One canonical phrase per verb; the injective rendering used as the token
# sequence scored by the action policy. All phrases are two words long so the
# unnormalized token-product scores carry no length bias between candidates.
SURFACE_TEXTS: dict[Verb, str] = {
    Verb.MOVE_UP: "move up",
    Verb.MOVE_DOWN: "move down",
    Verb.MOVE_LEFT: "move left",
    Verb.MOVE_RIGHT: "move right",
    Verb.PICK_UP: "pick up",
    Verb.PUT_DOWN: "put down",
    Verb.CHOP: "chop tomato",
    Verb.DELIVER: "deliver dish",
    Verb.NOOP: "stand still",
}

MOVE_DIRECTIONS: dict[Verb, Direction] = {
    Verb.MOVE_UP: Direction.NORTH,
    Verb.MOVE_DOWN: Direction.SOUTH,
    Verb.MOVE_LEFT: Direction.WEST,
    Verb.MOVE_RIGHT: Direction.EAST,
}


@dataclass(frozen=True)
class AgentAction:
    verb: Verb

    @property
    def surface_text(self) -> str:
        return SURFACE_TEXTS[self.verb]

    @staticmethod
    def from_surface_text(text: str) -> "AgentAction":
        for verb, surface in SURFACE_TEXTS.items():
            if surface == text:
                return AgentAction(verb)
        raise ValueError(f"no action verb renders as {text!r}")


ALL_ACTIONS: tuple[AgentAction, ...] = tuple(AgentAction(v) for v in Verb)


@dataclass(frozen=True)
class Item:
    kind: ItemKind
    chop_state: ChopState = ChopState.NA
    assembled: DishSpec | None = None

    def __post_init__(self) -> None:
        if self.kind is ItemKind.PLATE and self.chop_state is not ChopState.NA:
            raise ValueError("plates have no chop state")
        if self.kind is ItemKind.TOMATO and self.chop_state is ChopState.NA:
            raise ValueError("tomatoes are whole or chopped")
        if self.assembled is not None and self.kind is not ItemKind.PLATE:
            raise ValueError("only plates carry an assembled dish")

    @property
    def is_dish(self) -> bool:
        return self.assembled is not None

    def phrase(self) -> str:
        """Noun phrase used in text observations and messages."""
        if self.assembled is DishSpec.TOMATO_SALAD:
            return "a tomato salad"
        if self.kind is ItemKind.PLATE:
            return "a plate"
        if self.chop_state is ChopState.CHOPPED:
            return "a chopped tomato"
        return "a tomato"


WHOLE_TOMATO = Item(ItemKind.TOMATO, ChopState.WHOLE)
CHOPPED_TOMATO = Item(ItemKind.TOMATO, ChopState.CHOPPED)
PLAIN_PLATE = Item(ItemKind.PLATE)
TOMATO_SALAD = Item(ItemKind.PLATE, assembled=DishSpec.TOMATO_SALAD)


def combine(held: Item, resting: Item) -> Item | None:
    """Dish produced by putting `held` onto a cell occupied by `resting`."""
    pair = {held, resting}
    if pair == {CHOPPED_TOMATO, PLAIN_PLATE}:
        return TOMATO_SALAD
    return None


@dataclass(frozen=True)
class Cell:
    kind: CellKind
    item: Item | None = None

    def __post_init__(self) -> None:
        if self.item is not None and self.kind not in ITEM_REST_KINDS:
            raise ValueError(f"items cannot rest on {self.kind.value}")

    def with_item(self, item: Item | None) -> "Cell":
        return replace(self, item=item)


@dataclass(frozen=True)
class AgentPose:
    position: tuple[int, int]
    facing: Direction
    held: Item | None = None


class StepEvent(enum.Enum):
    CHOPPED_CORRECT = "chopped_correct"
    DELIVERED_CORRECT = "delivered_correct"
    DELIVERED_WRONG = "delivered_wrong"
    COLLISION = "collision"


# Reward constants: chop on target +0.2, correct dish +1, wrong delivery
# -0.1, agent collision -0.01, and -0.001 every step.
EVENT_REWARDS: dict[StepEvent, float] = {
    StepEvent.CHOPPED_CORRECT: 0.2,
    StepEvent.DELIVERED_CORRECT: 1.0,
    StepEvent.DELIVERED_WRONG: -0.1,
    StepEvent.COLLISION: -0.01,
}
STEP_PENALTY = -0.001


def reward_from_events(events: list[StepEvent]) -> float:
    total = STEP_PENALTY
    for event in events:
        total += EVENT_REWARDS[event]
    return total


@dataclass(frozen=True)
class WindowCell:
    """Snapshot of one visible cell; occluded cells are stored as None."""

    kind: CellKind
    item: Item | None = None
    agent: int | None = None
    agent_held: Item | None = None
    agent_facing: Direction | None = None


WINDOW_SIZE = 5
WINDOW_RADIUS = WINDOW_SIZE // 2


@dataclass(frozen=True)
class ObservationWindow:
    center: tuple[int, int]
    cells: tuple[tuple[WindowCell | None, ...], ...]
    own_held: Item | None
    own_facing: Direction

    def __post_init__(self) -> None:
        if len(self.cells) != WINDOW_SIZE or any(len(r) != WINDOW_SIZE for r in self.cells):
            raise ValueError("observation window must be 5x5")

    def visible(self) -> list[tuple[int, int, WindowCell]]:
        """(row offset, col offset, cell) for every non-occluded cell."""
        out = []
        for r, row in enumerate(self.cells):
            for c, cell in enumerate(row):
                if cell is not None:
                    out.append((r - WINDOW_RADIUS, c - WINDOW_RADIUS, cell))
        return out


@dataclass
class KitchenState:
    grid: list[list[Cell]]
    agents: list[AgentPose]
    timestep: int
    task: DishSpec
    rng_seed: int
    done: bool
    map_id: str
    horizon: int

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    def cell(self, pos: tuple[int, int]) -> Cell:
        return self.grid[pos[0]][pos[1]]

    def in_bounds(self, pos: tuple[int, int]) -> bool:
        return 0 <= pos[0] < len(self.grid) and 0 <= pos[1] < len(self.grid[0])


@dataclass(frozen=True)
class StepOutcome:
    observations: tuple[ObservationWindow, ...]
    reward: float
    done: bool
    events: tuple[StepEvent, ...]


class ConfigurationError(ValueError):
    """Unknown map, task, or malformed layout fixture."""


class UsageError(RuntimeError):
    """Operation called outside its contract (e.g. stepping a finished episode)."""
