"""Symbolic PPO baseline: dense network over numeric window encodings.

No language model anywhere — observations become fixed-length one-hot
vectors and a small MLP scores the nine verbs directly. Advantage
estimation and both PPO losses are the exact same functions the
token-scored policy uses.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from ..kitchen import env as kitchen_env
from ..kitchen.types import (
    ALL_ACTIONS,
    AgentAction,
    CellKind,
    ChopState,
    DishSpec,
    Item,
    ItemKind,
    ObservationWindow,
    Verb,
)
from .buffer import RlBuffer
from .distribution import ActionDistribution
from .losses import clipped_surrogate_terms, grouped_mean, value_loss_terms
from .trainer import EpisodeMetrics, RlConfig, RolloutResult, UpdateDiagnostics

CELL_KIND_ORDER = tuple(CellKind) + ("occluded",)
ITEM_STATE_ORDER = ("empty", "tomato_whole", "tomato_chopped", "plate", "salad", "teammate")
HELD_STATE_ORDER = ("none", "tomato_whole", "tomato_chopped", "plate", "salad")
FACING_ORDER = ("north", "south", "east", "west")

N_CELLS = 25
ENCODING_LENGTH = N_CELLS * (len(CELL_KIND_ORDER) + len(ITEM_STATE_ORDER)) + len(
    FACING_ORDER
) + len(HELD_STATE_ORDER)

VERB_ORDER = tuple(a.verb for a in ALL_ACTIONS)


def _item_state(item: Item | None) -> str:
    if item is None:
        return "empty"
    if item.assembled is not None:
        return "salad"
    if item.kind is ItemKind.PLATE:
        return "plate"
    if item.chop_state is ChopState.CHOPPED:
        return "tomato_chopped"
    return "tomato_whole"


def encode_window(window: ObservationWindow) -> np.ndarray:
    """Flatten a 5x5 window into one-hot cell kinds and item states plus the
    agent's own facing and held item."""
    out = np.zeros(ENCODING_LENGTH, dtype=np.float32)
    offset = 0
    for row in window.cells:
        for cell in row:
            if cell is None:
                out[offset + len(CellKind)] = 1.0  # occluded marker
            else:
                out[offset + CELL_KIND_ORDER.index(cell.kind)] = 1.0
                state = "teammate" if cell.agent is not None else _item_state(cell.item)
                out[offset + len(CELL_KIND_ORDER) + ITEM_STATE_ORDER.index(state)] = 1.0
            offset += len(CELL_KIND_ORDER) + len(ITEM_STATE_ORDER)
    out[offset + FACING_ORDER.index(window.own_facing.value)] = 1.0
    offset += len(FACING_ORDER)
    held = _item_state(window.own_held)
    out[offset + HELD_STATE_ORDER.index("none" if held == "empty" else held)] = 1.0
    return out


class SymbolicPolicy(nn.Module):
    def __init__(self, hidden: int = 128, seed: int = 0):
        super().__init__()
        gen = torch.Generator().manual_seed(seed)
        self.fc1 = nn.Linear(ENCODING_LENGTH, hidden)
        self.fc2 = nn.Linear(hidden, hidden)
        self.policy_head = nn.Linear(hidden, len(VERB_ORDER))
        self.value_head = nn.Linear(hidden, 1)
        with torch.no_grad():
            for layer in (self.fc1, self.fc2, self.policy_head, self.value_head):
                bound = 1.0 / math.sqrt(layer.in_features)
                layer.weight.copy_((torch.rand(layer.weight.shape, generator=gen) * 2 - 1) * bound)
                layer.bias.zero_()
            self.value_head.weight.zero_()

    def trunk(self, x: torch.Tensor) -> torch.Tensor:
        return torch.tanh(self.fc2(torch.tanh(self.fc1(x))))

    def logits(self, x: torch.Tensor) -> torch.Tensor:
        return self.policy_head(self.trunk(x))

    def value(self, x: torch.Tensor) -> torch.Tensor:
        return self.value_head(self.trunk(x)).squeeze(-1)


@dataclass
class SymbolicTransition:
    agent: int
    encoding: np.ndarray
    legal: tuple[int, ...]          # indices into VERB_ORDER
    action_index: int               # index into `legal`
    behavior_logprob: float
    value: float
    reward: float
    done: bool
    episode: int
    step: int
    advantage: float | None = None
    value_target: float | None = None


class SymbolicAgent:
    def __init__(self, config: RlConfig, hidden: int = 128, seed: int = 0):
        self.config = config
        self.net = SymbolicPolicy(hidden=hidden, seed=seed)
        self.optimizer = torch.optim.Adam(self.net.parameters(), lr=config.lr)
        self.sample_gen = torch.Generator().manual_seed(config.seed)

    def distribution(
        self, encoding: np.ndarray, candidates: list[AgentAction]
    ) -> tuple[ActionDistribution, tuple[int, ...]]:
        legal = tuple(VERB_ORDER.index(a.verb) for a in candidates)
        with torch.no_grad():
            logits = self.net.logits(torch.from_numpy(encoding))
        return ActionDistribution.from_logprobs(candidates, logits[list(legal)]), legal


def rollout_symbolic(
    agent: SymbolicAgent,
    map_id: str,
    task: DishSpec,
    min_steps: int,
    horizon: int = kitchen_env.DEFAULT_HORIZON,
    seed: int = 0,
    episode_offset: int = 0,
    env_step_offset: int = 0,
    greedy: bool = False,
    max_episodes: int | None = None,
) -> RolloutResult:
    buffer = RlBuffer()
    metrics: list[EpisodeMetrics] = []
    env_steps = 0
    episode = 0
    while env_steps < min_steps and (max_episodes is None or episode < max_episodes):
        state = kitchen_env.create(map_id, task, seed + episode_offset + episode, horizon)
        per_step: list[list[SymbolicTransition]] = []
        ep_return = 0.0
        entropies: list[float] = []
        while not state.done:
            joint = []
            step_transitions: list[SymbolicTransition] = []
            for i in range(state.n_agents):
                window = kitchen_env.local_view(state, i)
                encoding = encode_window(window)
                candidates = kitchen_env.legal_actions(state, i)
                dist, legal = agent.distribution(encoding, candidates)
                if greedy or not agent.config.sample_actions:
                    idx = dist.argmax()
                else:
                    idx = dist.sample(agent.sample_gen)
                with torch.no_grad():
                    value = float(agent.net.value(torch.from_numpy(encoding)).item())
                entropies.append(dist.entropy())
                joint.append(candidates[idx])
                step_transitions.append(
                    SymbolicTransition(
                        agent=i,
                        encoding=encoding,
                        legal=legal,
                        action_index=idx,
                        behavior_logprob=float(dist.normalized_logprob(idx).item()),
                        value=value,
                        reward=0.0,
                        done=False,
                        episode=episode_offset + episode,
                        step=state.timestep,
                    )
                )
            outcome = kitchen_env.step(state, joint)
            for tr in step_transitions:
                tr.reward = outcome.reward
                tr.done = outcome.done
            per_step.append(step_transitions)
            ep_return += outcome.reward
            env_steps += 1
        buffer.add_episode(per_step)
        metrics.append(
            EpisodeMetrics(
                episode=episode_offset + episode,
                env_steps=env_step_offset + env_steps,
                ret=ep_return,
                length=len(per_step),
                entropy=sum(entropies) / len(entropies) if entropies else 0.0,
            )
        )
        episode += 1
    return RolloutResult(buffer=buffer, metrics=metrics, env_steps=env_steps)


def _legal_logprobs(net: SymbolicPolicy, batch: list[SymbolicTransition]) -> tuple[torch.Tensor, torch.Tensor]:
    x = torch.from_numpy(np.stack([tr.encoding for tr in batch]))
    logits = net.logits(x)
    new_logprobs = []
    entropies = []
    for row, tr in zip(logits, batch):
        legal_logits = row[list(tr.legal)]
        logp = F.log_softmax(legal_logits, dim=0)
        new_logprobs.append(logp[tr.action_index])
        entropies.append(-(logp.exp() * logp).sum())
    return torch.stack(new_logprobs), torch.stack(entropies)


def update_symbolic(agent: SymbolicAgent, buffer: RlBuffer) -> UpdateDiagnostics:
    cfg = agent.config
    if len(buffer) == 0:
        raise ValueError("empty buffer")
    buffer.compute_advantages(cfg.gamma, cfg.gae_lambda)
    order_gen = torch.Generator().manual_seed(cfg.seed + len(buffer.transitions))
    last = UpdateDiagnostics(0.0, 0.0, 0.0, 0.0)
    n = len(buffer.transitions)
    for _ in range(cfg.epochs):
        perm = torch.randperm(n, generator=order_gen).tolist()
        for start in range(0, n, cfg.minibatch_size):
            batch = [buffer.transitions[i] for i in perm[start : start + cfg.minibatch_size]]
            groups = [tr.agent for tr in batch]
            new_logprobs, entropies = _legal_logprobs(agent.net, batch)
            old = torch.tensor([tr.behavior_logprob for tr in batch])
            adv = torch.tensor([tr.advantage for tr in batch])
            actor = grouped_mean(
                clipped_surrogate_terms(new_logprobs, old, adv, cfg.clip_eps), groups
            )
            x = torch.from_numpy(np.stack([tr.encoding for tr in batch]))
            values = agent.net.value(x)
            v_old = torch.tensor([tr.value for tr in batch])
            targets = torch.tensor([tr.value_target for tr in batch])
            critic = grouped_mean(
                value_loss_terms(values, v_old, targets, cfg.clip_eps, cfg.critic_clip_mode),
                groups,
            )
            entropy = grouped_mean(entropies, groups)
            total = actor + cfg.critic_coef * critic - cfg.entropy_coef * entropy
            agent.optimizer.zero_grad()
            total.backward()
            agent.optimizer.step()
            last = UpdateDiagnostics(
                policy_loss=float(actor.item()),
                critic_loss=float(critic.item()),
                entropy=float(entropy.item()),
                total_loss=float(total.item()),
            )
    buffer.clear()
    return last
