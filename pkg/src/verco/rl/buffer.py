"""Rollout storage for PPO updates."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..model.vocab import TokenSequence
from .losses import gae


@dataclass
class Transition:
    agent: int
    prompt: TokenSequence                  # action prompt incl. received messages
    value_prompt: TokenSequence            # critic prompt (no messages)
    candidates: tuple[TokenSequence, ...]
    action_index: int
    behavior_logprob: float                # normalized log-prob at collection time
    value: float                           # V_old at collection time
    reward: float                          # shared team reward
    done: bool
    episode: int
    step: int
    advantage: float | None = None
    value_target: float | None = None


@dataclass
class RlBuffer:
    transitions: list[Transition] = field(default_factory=list)
    _episodes: list[list[list[Transition]]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.transitions)

    def add_episode(self, per_step: list[list[Transition]]) -> None:
        """Store one completed episode: per_step[t][agent]."""
        if not per_step:
            return
        self._episodes.append(per_step)
        for step_transitions in per_step:
            self.transitions.extend(step_transitions)

    def compute_advantages(self, gamma: float, lam: float) -> None:
        """Per-agent GAE over each episode's shared rewards; episodes end with
        a zero bootstrap. Value targets are advantage + old value."""
        for episode in self._episodes:
            n_agents = len(episode[0])
            for agent in range(n_agents):
                rewards = [step[agent].reward for step in episode]
                values = [step[agent].value for step in episode]
                advantages = gae(rewards, values, bootstrap=0.0, gamma=gamma, lam=lam)
                for step, adv in zip(episode, advantages):
                    step[agent].advantage = adv
                    step[agent].value_target = adv + step[agent].value

    def clear(self) -> None:
        self.transitions.clear()
        self._episodes.clear()
