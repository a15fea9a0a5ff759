"""Deterministic two-agent kitchen simulator.

The world is a 7x7 grid. Agents move simultaneously; everything else
(interactions with the faced cell) resolves in agent-index order. All
stochasticity lives in the caller's policy, so identical action sequences
replay bit-identically.
"""
from __future__ import annotations

import copy

from .layouts import floor_regions, load_layout
from .types import (
    ALL_ACTIONS,
    AgentAction,
    AgentPose,
    Cell,
    CellKind,
    ChopState,
    ConfigurationError,
    DishSpec,
    ITEM_REST_KINDS,
    Item,
    ItemKind,
    KitchenState,
    MOVE_DIRECTIONS,
    ObservationWindow,
    StepEvent,
    StepOutcome,
    UsageError,
    Verb,
    WHOLE_TOMATO,
    WINDOW_RADIUS,
    WindowCell,
    combine,
    reward_from_events,
)

GRID_SIZE = 7
DEFAULT_HORIZON = 100


def create(
    map_id: str,
    task: DishSpec = DishSpec.TOMATO_SALAD,
    seed: int = 0,
    horizon: int = DEFAULT_HORIZON,
) -> KitchenState:
    """Build the canonical fixed layout for `map_id`.

    The seed is recorded for provenance; the simulator itself has no
    stochastic transitions.
    """
    if task is not DishSpec.TOMATO_SALAD:
        raise ConfigurationError(f"unsupported task {task!r}")
    if horizon < 1:
        raise ConfigurationError("horizon must be positive")
    grid, agents = load_layout(map_id)
    if len(grid) != GRID_SIZE or len(grid[0]) != GRID_SIZE:
        raise ConfigurationError(f"{map_id} layout is not {GRID_SIZE}x{GRID_SIZE}")
    if len(agents) != 2:
        raise ConfigurationError("exactly two agents are supported")
    return KitchenState(
        grid=grid,
        agents=agents,
        timestep=0,
        task=task,
        rng_seed=seed,
        done=False,
        map_id=map_id,
        horizon=horizon,
    )


def clone_state(state: KitchenState) -> KitchenState:
    return copy.deepcopy(state)


def _move_target(state: KitchenState, agent: int, action: AgentAction) -> tuple[int, int]:
    """Cell the agent tries to occupy this step (its own cell if not moving)."""
    pose = state.agents[agent]
    direction = MOVE_DIRECTIONS.get(action.verb)
    if direction is None:
        return pose.position
    r, c = pose.position
    dr, dc = direction.delta
    dest = (r + dr, c + dc)
    if state.in_bounds(dest) and state.cell(dest).kind is CellKind.FLOOR:
        return dest
    return pose.position


def _resolve_moves(
    state: KitchenState, joint_action: list[AgentAction]
) -> tuple[list[tuple[int, int]], bool]:
    """Simultaneous movement: same-target and swap conflicts leave both in
    place and record one collision."""
    old = [pose.position for pose in state.agents]
    targets = [_move_target(state, i, a) for i, a in enumerate(joint_action)]
    moved = [t != o for t, o in zip(targets, old)]
    same_target = targets[0] == targets[1]
    swap = moved[0] and moved[1] and targets[0] == old[1] and targets[1] == old[0]
    if (same_target and (moved[0] or moved[1])) or swap:
        return old, True
    return targets, False


def step(state: KitchenState, joint_action: list[AgentAction]) -> StepOutcome:
    if state.done:
        raise UsageError("step() called on a finished episode")
    if len(joint_action) != state.n_agents:
        raise UsageError(
            f"need one action per agent, got {len(joint_action)} for {state.n_agents}"
        )

    events: list[StepEvent] = []

    positions, collided = _resolve_moves(state, joint_action)
    if collided:
        events.append(StepEvent.COLLISION)
    for i, action in enumerate(joint_action):
        pose = state.agents[i]
        facing = MOVE_DIRECTIONS.get(action.verb, pose.facing)
        state.agents[i] = AgentPose(position=positions[i], facing=facing, held=pose.held)

    for i, action in enumerate(joint_action):
        _apply_interaction(state, i, action, events)

    state.timestep += 1
    delivered = StepEvent.DELIVERED_CORRECT in events
    if delivered or state.timestep >= state.horizon:
        state.done = True

    observations = tuple(local_view(state, i) for i in range(state.n_agents))
    return StepOutcome(
        observations=observations,
        reward=reward_from_events(events),
        done=state.done,
        events=tuple(events),
    )


def _apply_interaction(
    state: KitchenState, agent: int, action: AgentAction, events: list[StepEvent]
) -> None:
    verb = action.verb
    if verb not in (Verb.PICK_UP, Verb.PUT_DOWN, Verb.CHOP, Verb.DELIVER):
        return
    pose = state.agents[agent]
    faced = _faced_position(pose)
    if not state.in_bounds(faced):
        return
    cell = state.cell(faced)

    if verb is Verb.PICK_UP and pose.held is None:
        item = _pick_from(cell)
        if item is not None:
            if cell.item is not None:
                _set_cell(state, faced, cell.with_item(None))
            state.agents[agent] = AgentPose(pose.position, pose.facing, item)

    elif verb is Verb.PUT_DOWN and pose.held is not None:
        if cell.kind in ITEM_REST_KINDS:
            if cell.item is None:
                _set_cell(state, faced, cell.with_item(pose.held))
                state.agents[agent] = AgentPose(pose.position, pose.facing, None)
            else:
                dish = combine(pose.held, cell.item)
                if dish is not None:
                    _set_cell(state, faced, cell.with_item(dish))
                    state.agents[agent] = AgentPose(pose.position, pose.facing, None)

    elif verb is Verb.CHOP:
        if (
            cell.kind is CellKind.CUTBOARD
            and cell.item is not None
            and cell.item.kind is ItemKind.TOMATO
            and cell.item.chop_state is ChopState.WHOLE
        ):
            _set_cell(state, faced, cell.with_item(Item(ItemKind.TOMATO, ChopState.CHOPPED)))
            events.append(StepEvent.CHOPPED_CORRECT)

    elif verb is Verb.DELIVER and pose.held is not None:
        if cell.kind is CellKind.DELIVERY:
            if pose.held.assembled is state.task:
                events.append(StepEvent.DELIVERED_CORRECT)
            else:
                events.append(StepEvent.DELIVERED_WRONG)
            # Either way the handed-over item leaves the world.
            state.agents[agent] = AgentPose(pose.position, pose.facing, None)


def _faced_position(pose: AgentPose) -> tuple[int, int]:
    dr, dc = pose.facing.delta
    return (pose.position[0] + dr, pose.position[1] + dc)


def _pick_from(cell: Cell) -> Item | None:
    if cell.kind is CellKind.TOMATO_SOURCE:
        return WHOLE_TOMATO
    if cell.kind is CellKind.PLATE_SOURCE:
        return Item(ItemKind.PLATE)
    return cell.item


def _set_cell(state: KitchenState, pos: tuple[int, int], cell: Cell) -> None:
    state.grid[pos[0]][pos[1]] = cell


def local_view(state: KitchenState, agent: int) -> ObservationWindow:
    if not 0 <= agent < state.n_agents:
        raise UsageError(f"agent index {agent} out of range")
    pose = state.agents[agent]
    others = {
        p.position: (i, p)
        for i, p in enumerate(state.agents)
        if i != agent
    }
    rows: list[tuple[WindowCell | None, ...]] = []
    cr, cc = pose.position
    for dr in range(-WINDOW_RADIUS, WINDOW_RADIUS + 1):
        row: list[WindowCell | None] = []
        for dc in range(-WINDOW_RADIUS, WINDOW_RADIUS + 1):
            pos = (cr + dr, cc + dc)
            if not state.in_bounds(pos):
                row.append(None)
                continue
            cell = state.cell(pos)
            other = others.get(pos)
            row.append(
                WindowCell(
                    kind=cell.kind,
                    item=cell.item,
                    agent=other[0] if other else None,
                    agent_held=other[1].held if other else None,
                    agent_facing=other[1].facing if other else None,
                )
            )
        rows.append(tuple(row))
    return ObservationWindow(
        center=pose.position,
        cells=tuple(rows),
        own_held=pose.held,
        own_facing=pose.facing,
    )


def legal_actions(state: KitchenState, agent: int) -> list[AgentAction]:
    if not 0 <= agent < state.n_agents:
        raise UsageError(f"agent index {agent} out of range")
    pose = state.agents[agent]
    faced = _faced_position(pose)
    cell = state.cell(faced) if state.in_bounds(faced) else None

    legal: list[AgentAction] = []
    for action in ALL_ACTIONS:
        verb = action.verb
        if verb in MOVE_DIRECTIONS or verb is Verb.NOOP:
            legal.append(action)
        elif cell is None:
            continue
        elif verb is Verb.PICK_UP:
            if pose.held is None and (
                cell.kind in (CellKind.TOMATO_SOURCE, CellKind.PLATE_SOURCE)
                or cell.item is not None
            ):
                legal.append(action)
        elif verb is Verb.PUT_DOWN:
            if pose.held is not None and cell.kind in ITEM_REST_KINDS:
                if cell.item is None or combine(pose.held, cell.item) is not None:
                    legal.append(action)
        elif verb is Verb.CHOP:
            if (
                cell.kind is CellKind.CUTBOARD
                and cell.item is not None
                and cell.item.kind is ItemKind.TOMATO
                and cell.item.chop_state is ChopState.WHOLE
            ):
                legal.append(action)
        elif verb is Verb.DELIVER:
            if cell.kind is CellKind.DELIVERY and pose.held is not None:
                legal.append(action)
    return legal


def agent_regions(state: KitchenState) -> list[set[tuple[int, int]]]:
    """Floor region each agent currently stands in."""
    regions = floor_regions(state.grid)
    out = []
    for pose in state.agents:
        for region in regions:
            if pose.position in region:
                out.append(region)
                break
        else:
            raise RuntimeError(f"agent at {pose.position} is not on a floor cell")
    return out


def item_census(state: KitchenState) -> dict[ItemKind, int]:
    """Items in the world plus agents' hands, by kind."""
    counts = {kind: 0 for kind in ItemKind}
    for row in state.grid:
        for cell in row:
            if cell.item is not None:
                counts[cell.item.kind] += 1
    for pose in state.agents:
        if pose.held is not None:
            counts[pose.held.kind] += 1
    return counts
