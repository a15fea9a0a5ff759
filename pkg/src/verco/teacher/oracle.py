"""Scripted global-view teacher.

Stands in for an external LLM coordinator: looks at the whole kitchen,
assigns complementary subtasks to the two agents via an ordered rule table
(first match wins), and renders each agent's label message — the directive
for its *teammate's* subtask, since messages are addressed to the teammate.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Sequence

from ..kitchen.layouts import floor_regions
from ..kitchen.types import CellKind, ChopState, ItemKind, KitchenState
from ..text.observation import TextObservation
from ..text.prompts import MESSAGE_WORD_LIMIT

logger = logging.getLogger(__name__)

Pos = tuple[int, int]


@dataclass(frozen=True)
class Message:
    sender: int
    text: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("messages must be non-empty")
        if self.word_count > MESSAGE_WORD_LIMIT:
            raise ValueError(f"message exceeds {MESSAGE_WORD_LIMIT} words: {self.text!r}")

    @property
    def word_count(self) -> int:
        return len(self.text.split())

    @staticmethod
    def clipped(sender: int, text: str) -> "Message":
        """Build a message, truncating to the word limit if needed."""
        words = text.split()
        if not words:
            return Message(sender, "...")
        return Message(sender, " ".join(words[:MESSAGE_WORD_LIMIT]))


@dataclass(frozen=True)
class TaskProgress:
    """Global production-chain summary the privileged teacher reasons over."""

    salad_holder: int | None
    salad_cells: tuple[Pos, ...]
    chopped_holder: int | None
    chopped_cells: tuple[Pos, ...]
    whole_holder: int | None
    whole_cutboard_cells: tuple[Pos, ...]
    whole_cells: tuple[Pos, ...]
    plate_holder: int | None
    plate_cells: tuple[Pos, ...]
    reach: tuple[frozenset[Pos], frozenset[Pos]]
    stations: dict[CellKind, tuple[Pos, ...]]

    def can_reach(self, agent: int, pos: Pos) -> bool:
        return pos in self.reach[agent]

    def reaches_station(self, agent: int, kind: CellKind) -> bool:
        return any(self.can_reach(agent, pos) for pos in self.stations.get(kind, ()))

    def salad_accessible(self, agent: int) -> bool:
        if self.salad_holder == agent:
            return True
        return self.salad_holder is None and any(
            self.can_reach(agent, pos) for pos in self.salad_cells
        )

    def chopped_accessible(self, agent: int) -> bool:
        if self.chopped_holder == agent:
            return True
        return self.chopped_holder is None and any(
            self.can_reach(agent, pos) for pos in self.chopped_cells
        )

    def plate_accessible(self, agent: int) -> bool:
        if self.plate_holder == agent:
            return True
        return self.plate_holder is None and any(
            self.can_reach(agent, pos) for pos in self.plate_cells
        )

    @property
    def salad_exists(self) -> bool:
        return self.salad_holder is not None or bool(self.salad_cells)

    @property
    def chopped_exists(self) -> bool:
        return self.chopped_holder is not None or bool(self.chopped_cells)

    @property
    def whole_exists(self) -> bool:
        return self.whole_holder is not None or bool(self.whole_cells)

    @property
    def plate_exists(self) -> bool:
        return self.plate_holder is not None or bool(self.plate_cells)


def progress_from_state(state: KitchenState) -> TaskProgress:
    salad_holder = chopped_holder = whole_holder = plate_holder = None
    salad_cells: list[Pos] = []
    chopped_cells: list[Pos] = []
    whole_cells: list[Pos] = []
    whole_cutboard_cells: list[Pos] = []
    plate_cells: list[Pos] = []
    stations: dict[CellKind, list[Pos]] = {}

    for r, row in enumerate(state.grid):
        for c, cell in enumerate(row):
            if cell.kind in (
                CellKind.TOMATO_SOURCE,
                CellKind.PLATE_SOURCE,
                CellKind.CUTBOARD,
                CellKind.DELIVERY,
            ):
                stations.setdefault(cell.kind, []).append((r, c))
            item = cell.item
            if item is None:
                continue
            if item.assembled is not None:
                salad_cells.append((r, c))
            elif item.kind is ItemKind.PLATE:
                plate_cells.append((r, c))
            elif item.chop_state is ChopState.CHOPPED:
                chopped_cells.append((r, c))
            else:
                whole_cells.append((r, c))
                if cell.kind is CellKind.CUTBOARD:
                    whole_cutboard_cells.append((r, c))

    for i, pose in enumerate(state.agents):
        item = pose.held
        if item is None:
            continue
        if item.assembled is not None:
            salad_holder = i
        elif item.kind is ItemKind.PLATE:
            plate_holder = i
        elif item.chop_state is ChopState.CHOPPED:
            chopped_holder = i
        else:
            whole_holder = i

    regions = floor_regions(state.grid)
    reach: list[frozenset[Pos]] = []
    for pose in state.agents:
        region = next(reg for reg in regions if pose.position in reg)
        adjacent: set[Pos] = set()
        for r, c in region:
            for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if state.in_bounds((nr, nc)) and state.cell((nr, nc)).kind is not CellKind.FLOOR:
                    adjacent.add((nr, nc))
        reach.append(frozenset(adjacent))

    return TaskProgress(
        salad_holder=salad_holder,
        salad_cells=tuple(salad_cells),
        chopped_holder=chopped_holder,
        chopped_cells=tuple(chopped_cells),
        whole_holder=whole_holder,
        whole_cutboard_cells=tuple(whole_cutboard_cells),
        whole_cells=tuple(whole_cells),
        plate_holder=plate_holder,
        plate_cells=tuple(plate_cells),
        reach=(reach[0], reach[1]),
        stations={kind: tuple(cells) for kind, cells in stations.items()},
    )


# --- rule predicates ---------------------------------------------------------
# each returns the actor agent index, or None when the rule does not apply

def _salad_with_delivery_access(p: TaskProgress) -> int | None:
    for i in (0, 1):
        if p.salad_accessible(i) and p.reaches_station(i, CellKind.DELIVERY):
            return i
    return None


def _salad_without_delivery_access(p: TaskProgress) -> int | None:
    for i in (0, 1):
        if p.salad_accessible(i):
            return i
    return None


def _can_combine_chopped_and_plate(p: TaskProgress) -> int | None:
    if not (p.chopped_exists and p.plate_exists):
        return None
    for i in (0, 1):
        if p.chopped_accessible(i) and p.plate_accessible(i):
            return i
    return None


def _needs_plate(p: TaskProgress) -> bool:
    return not p.plate_exists and not p.salad_exists


def _chopped_stranded_from_plate_source(p: TaskProgress) -> int | None:
    if not p.chopped_exists or p.plate_exists:
        return None
    for i in (0, 1):
        if p.reaches_station(i, CellKind.PLATE_SOURCE) and not p.chopped_accessible(i):
            return i
    return None


def _chopped_without_plate(p: TaskProgress) -> int | None:
    if not p.chopped_exists or p.plate_exists:
        return None
    for i in (0, 1):
        if p.reaches_station(i, CellKind.PLATE_SOURCE):
            return i
    return None


def _tomato_on_cutboard_actor(p: TaskProgress) -> int | None:
    for pos in p.whole_cutboard_cells:
        for i in (0, 1):
            if p.can_reach(i, pos):
                return i
    return None


def _tomato_on_cutboard_needs_plate(p: TaskProgress) -> int | None:
    actor = _tomato_on_cutboard_actor(p)
    if actor is None or not _needs_plate(p):
        return None
    if p.reaches_station(1 - actor, CellKind.PLATE_SOURCE):
        return actor
    return None


def _tomato_on_cutboard(p: TaskProgress) -> int | None:
    return _tomato_on_cutboard_actor(p)


def _held_tomato_near_cutboard_actor(p: TaskProgress) -> int | None:
    i = p.whole_holder
    if i is not None and p.reaches_station(i, CellKind.CUTBOARD):
        return i
    return None


def _held_tomato_near_cutboard_needs_plate(p: TaskProgress) -> int | None:
    actor = _held_tomato_near_cutboard_actor(p)
    if actor is None or not _needs_plate(p):
        return None
    if p.reaches_station(1 - actor, CellKind.PLATE_SOURCE):
        return actor
    return None


def _held_tomato_near_cutboard(p: TaskProgress) -> int | None:
    return _held_tomato_near_cutboard_actor(p)


def _held_tomato_away_from_cutboard(p: TaskProgress) -> int | None:
    i = p.whole_holder
    if i is not None and not p.reaches_station(i, CellKind.CUTBOARD):
        return i
    return None


def _resting_tomato_near_cutboard_actor(p: TaskProgress) -> int | None:
    for pos in p.whole_cells:
        for i in (0, 1):
            if p.can_reach(i, pos) and p.reaches_station(i, CellKind.CUTBOARD):
                return i
    return None


def _resting_tomato_near_cutboard_needs_plate(p: TaskProgress) -> int | None:
    actor = _resting_tomato_near_cutboard_actor(p)
    if actor is None or not _needs_plate(p):
        return None
    if p.reaches_station(1 - actor, CellKind.PLATE_SOURCE):
        return actor
    return None


def _resting_tomato_near_cutboard(p: TaskProgress) -> int | None:
    return _resting_tomato_near_cutboard_actor(p)


def _resting_tomato_away_from_cutboard(p: TaskProgress) -> int | None:
    if not p.whole_cells:
        return None
    for pos in p.whole_cells:
        for i in (0, 1):
            if p.can_reach(i, pos):
                return i
    return None


def _no_tomato_out_no_plate(p: TaskProgress) -> int | None:
    if p.salad_exists or p.chopped_exists or p.whole_exists or p.plate_exists:
        return None
    for i in (0, 1):
        if p.reaches_station(i, CellKind.TOMATO_SOURCE) and p.reaches_station(
            1 - i, CellKind.PLATE_SOURCE
        ):
            return i
    return None


def _no_tomato_out(p: TaskProgress) -> int | None:
    if p.salad_exists or p.chopped_exists or p.whole_exists:
        return None
    for i in (0, 1):
        if p.reaches_station(i, CellKind.TOMATO_SOURCE):
            return i
    return None


_CONDITIONS: dict[str, Callable[[TaskProgress], int | None]] = {
    "salad_with_delivery_access": _salad_with_delivery_access,
    "salad_without_delivery_access": _salad_without_delivery_access,
    "can_combine_chopped_and_plate": _can_combine_chopped_and_plate,
    "chopped_stranded_from_plate_source": _chopped_stranded_from_plate_source,
    "chopped_without_plate": _chopped_without_plate,
    "tomato_on_cutboard_needs_plate": _tomato_on_cutboard_needs_plate,
    "tomato_on_cutboard": _tomato_on_cutboard,
    "held_tomato_near_cutboard_needs_plate": _held_tomato_near_cutboard_needs_plate,
    "held_tomato_near_cutboard": _held_tomato_near_cutboard,
    "held_tomato_away_from_cutboard": _held_tomato_away_from_cutboard,
    "resting_tomato_near_cutboard_needs_plate": _resting_tomato_near_cutboard_needs_plate,
    "resting_tomato_near_cutboard": _resting_tomato_near_cutboard,
    "resting_tomato_away_from_cutboard": _resting_tomato_away_from_cutboard,
    "no_tomato_out_no_plate": _no_tomato_out_no_plate,
    "no_tomato_out": _no_tomato_out,
}


@dataclass(frozen=True)
class CoordinationRule:
    name: str
    condition: Callable[[TaskProgress], int | None]
    actor_goal: str
    partner_goal: str


class RuleTable:
    def __init__(self, rules: list[CoordinationRule], directives: dict[str, str], default: str):
        self.rules = rules
        self.directives = directives
        self.default_message = default

    @staticmethod
    def bundled() -> "RuleTable":
        raw = json.loads(
            resources.files("verco.teacher").joinpath("rules.json").read_text(encoding="utf-8")
        )
        rules = [
            CoordinationRule(
                name=row["name"],
                condition=_CONDITIONS[row["condition"]],
                actor_goal=row["actor_goal"],
                partner_goal=row["partner_goal"],
            )
            for row in raw["rules"]
        ]
        return RuleTable(rules, raw["directives"], raw["default_message"])


class ScriptedTeacher:
    """Deterministic rule-based labeller; the default teacher."""

    def __init__(self, table: RuleTable | None = None):
        self.table = table or RuleTable.bundled()

    def label(
        self, observations: Sequence[TextObservation], progress: TaskProgress
    ) -> list[Message]:
        if len(observations) != 2:
            raise ValueError("scripted teacher coordinates exactly two agents")
        for rule in self.table.rules:
            actor = rule.condition(progress)
            if actor is None:
                continue
            goals = {actor: rule.actor_goal, 1 - actor: rule.partner_goal}
            # each agent's message carries the directive for its *teammate*
            return [
                Message(sender=i, text=self.table.directives[goals[1 - i]])
                for i in (0, 1)
            ]
        logger.info("no coordination rule fired; using default message")
        return [Message(sender=i, text=self.table.default_message) for i in (0, 1)]
