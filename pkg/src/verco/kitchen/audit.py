"""Independent reward auditor.

Re-scores a trajectory without touching the simulator's event list: events
are re-derived from (state before, joint action, state after) snapshots and
priced with the reward constants written out again here on purpose. Any
accounting drift between simulator and auditor is a bug in one of them.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import env
from .types import (
    AgentAction,
    CellKind,
    ChopState,
    DishSpec,
    ItemKind,
    KitchenState,
    MOVE_DIRECTIONS,
)


@dataclass(frozen=True)
class EventCounts:
    chops: int
    delivered_correct: int
    delivered_wrong: int
    collisions: int

    def reward(self) -> float:
        return (
            0.2 * self.chops
            + 1.0 * self.delivered_correct
            - 0.1 * self.delivered_wrong
            - 0.01 * self.collisions
            - 0.001
        )


def _loose_chopped(state: KitchenState) -> int:
    count = 0
    for row in state.grid:
        for cell in row:
            item = cell.item
            if item is not None and item.kind is ItemKind.TOMATO and item.chop_state is ChopState.CHOPPED:
                count += 1
    for pose in state.agents:
        item = pose.held
        if item is not None and item.kind is ItemKind.TOMATO and item.chop_state is ChopState.CHOPPED:
            count += 1
    return count


def _salads(state: KitchenState) -> int:
    count = 0
    for row in state.grid:
        for cell in row:
            if cell.item is not None and cell.item.assembled is not None:
                count += 1
    for pose in state.agents:
        if pose.held is not None and pose.held.assembled is not None:
            count += 1
    return count


def _deliveries(before: KitchenState, joint: list[AgentAction], after: KitchenState) -> tuple[int, int]:
    correct = wrong = 0
    for i, action in enumerate(joint):
        if action.verb.value != "deliver":
            continue
        pose = before.agents[i]
        if pose.held is None or after.agents[i].held is not None:
            continue
        dr, dc = pose.facing.delta
        faced = (pose.position[0] + dr, pose.position[1] + dc)
        if not before.in_bounds(faced) or before.cell(faced).kind is not CellKind.DELIVERY:
            continue
        if pose.held.assembled is before.task:
            correct += 1
        else:
            wrong += 1
    return correct, wrong


def _collisions(before: KitchenState, joint: list[AgentAction]) -> int:
    old = [pose.position for pose in before.agents]
    targets = []
    for i, action in enumerate(joint):
        direction = MOVE_DIRECTIONS.get(action.verb)
        pos = old[i]
        if direction is not None:
            dest = (pos[0] + direction.delta[0], pos[1] + direction.delta[1])
            if before.in_bounds(dest) and before.cell(dest).kind is CellKind.FLOOR:
                pos = dest
        targets.append(pos)
    moved = [t != o for t, o in zip(targets, old)]
    if targets[0] == targets[1] and (moved[0] or moved[1]):
        return 1
    if moved[0] and moved[1] and targets[0] == old[1] and targets[1] == old[0]:
        return 1
    return 0


def recount_step(
    before: KitchenState, joint: list[AgentAction], after: KitchenState
) -> EventCounts:
    correct, wrong = _deliveries(before, joint, after)
    # Every finished salad consumed one chopped tomato, so chops performed
    # this step = growth in loose chopped tomatoes + salads created.
    salads_created = (_salads(after) - _salads(before)) + correct + wrong_salads(before, joint, after)
    chops = (_loose_chopped(after) - _loose_chopped(before)) + salads_created
    return EventCounts(
        chops=chops,
        delivered_correct=correct,
        delivered_wrong=wrong,
        collisions=_collisions(before, joint),
    )


def wrong_salads(before: KitchenState, joint: list[AgentAction], after: KitchenState) -> int:
    """Salads consumed by a wrong delivery (possible only if task ever differs)."""
    consumed = 0
    for i, action in enumerate(joint):
        if action.verb.value != "deliver":
            continue
        pose = before.agents[i]
        if (
            pose.held is not None
            and pose.held.assembled is not None
            and pose.held.assembled is not before.task
            and after.agents[i].held is None
        ):
            consumed += 1
    return consumed


def replay_and_audit(
    map_id: str,
    task: DishSpec,
    seed: int,
    horizon: int,
    episodes: list[list[list[AgentAction]]],
) -> tuple[list[float], list[float]]:
    """Re-simulate recorded episodes; return (simulator rewards, audited rewards)."""
    recorded: list[float] = []
    audited: list[float] = []
    for actions in episodes:
        state = env.create(map_id, task, seed, horizon)
        for joint in actions:
            before = env.clone_state(state)
            outcome = env.step(state, joint)
            counts = recount_step(before, joint, state)
            recorded.append(outcome.reward)
            audited.append(counts.reward())
            if outcome.done:
                break
    return recorded, audited
