from .env import (
    DEFAULT_HORIZON,
    agent_regions,
    clone_state,
    create,
    item_census,
    legal_actions,
    local_view,
    step,
)
from .layouts import MAP_IDS, floor_regions, load_layout, parse_layout
from .render import render
from .types import (
    ALL_ACTIONS,
    AgentAction,
    AgentPose,
    Cell,
    CellKind,
    ChopState,
    ConfigurationError,
    Direction,
    DishSpec,
    EVENT_REWARDS,
    Item,
    ItemKind,
    KitchenState,
    ObservationWindow,
    STEP_PENALTY,
    StepEvent,
    StepOutcome,
    UsageError,
    Verb,
    WindowCell,
    reward_from_events,
)

__all__ = [
    "DEFAULT_HORIZON",
    "MAP_IDS",
    "ALL_ACTIONS",
    "AgentAction",
    "AgentPose",
    "Cell",
    "CellKind",
    "ChopState",
    "ConfigurationError",
    "Direction",
    "DishSpec",
    "EVENT_REWARDS",
    "Item",
    "ItemKind",
    "KitchenState",
    "ObservationWindow",
    "STEP_PENALTY",
    "StepEvent",
    "StepOutcome",
    "UsageError",
    "Verb",
    "WindowCell",
    "agent_regions",
    "clone_state",
    "create",
    "floor_regions",
    "item_census",
    "legal_actions",
    "load_layout",
    "local_view",
    "parse_layout",
    "render",
    "reward_from_events",
    "step",
]
