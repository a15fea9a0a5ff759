"""Replay transcripts: human-readable episode logs that re-simulate exactly.

A transcript interleaves grid renders, observation texts, sent messages,
chosen actions, and rewards. The structured lines (`actions:`, `reward:`,
and the header) carry enough to replay the episode, and the validator
re-simulates and compares rewards bit-exactly.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from ..kitchen import env as kitchen_env
from ..kitchen.render import render
from ..kitchen.types import AgentAction, DishSpec
from ..model.checkpoint import load_model, load_tensors
from ..rl.symbolic import SymbolicAgent, encode_window
from ..rl.trainer import VercoAgent
from ..text.observation import textualize

HEADER_PREFIX = "#! "
ACTION_SEPARATOR = " | "


@dataclass
class StepRecord:
    grid: str
    observations: list[str]
    messages: list[str]
    actions: list[str]
    reward: float
    cumulative_return: float
    events: list[str]


@dataclass
class ReplayTranscript:
    map_id: str
    task: str
    seed: int
    horizon: int
    method: str
    steps: list[StepRecord] = field(default_factory=list)

    def write(self, path: str | Path) -> None:
        lines = [
            HEADER_PREFIX
            + json.dumps(
                {
                    "map_id": self.map_id,
                    "task": self.task,
                    "seed": self.seed,
                    "horizon": self.horizon,
                    "method": self.method,
                }
            )
        ]
        for i, step in enumerate(self.steps, start=1):
            lines.append(f"== step {i}")
            lines.append(step.grid)
            for agent, obs in enumerate(step.observations, start=1):
                lines.append(f"agent {agent} sees: {obs}")
            for agent, message in enumerate(step.messages, start=1):
                lines.append(f"agent {agent} says: {message}")
            lines.append("actions: " + ACTION_SEPARATOR.join(step.actions))
            lines.append(f"reward: {step.reward!r}")
            lines.append(f"return: {step.cumulative_return!r}")
            lines.append("events: " + (",".join(step.events) if step.events else "none"))
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @staticmethod
    def read(path: str | Path) -> "ReplayTranscript":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if not lines or not lines[0].startswith(HEADER_PREFIX):
            raise ValueError(f"{path} is not a transcript file")
        header = json.loads(lines[0][len(HEADER_PREFIX):])
        transcript = ReplayTranscript(
            map_id=header["map_id"],
            task=header["task"],
            seed=header["seed"],
            horizon=header["horizon"],
            method=header["method"],
        )
        step: StepRecord | None = None
        grid_lines: list[str] = []
        for line in lines[1:]:
            if line.startswith("== step"):
                if step is not None:
                    transcript.steps.append(step)
                step = StepRecord("", [], [], [], 0.0, 0.0, [])
                grid_lines = []
            elif step is None:
                continue
            elif match := re.fullmatch(r"agent \d+ sees: (.*)", line):
                step.observations.append(match.group(1))
            elif match := re.fullmatch(r"agent \d+ says: (.*)", line):
                step.messages.append(match.group(1))
            elif line.startswith("actions: "):
                step.actions = line[len("actions: "):].split(ACTION_SEPARATOR)
            elif line.startswith("reward: "):
                step.reward = float(line[len("reward: "):])
            elif line.startswith("return: "):
                step.cumulative_return = float(line[len("return: "):])
            elif line.startswith("events: "):
                raw = line[len("events: "):]
                step.events = [] if raw == "none" else raw.split(",")
            else:
                grid_lines.append(line)
                step.grid = "\n".join(grid_lines)
        if step is not None:
            transcript.steps.append(step)
        return transcript

    def validate(self) -> None:
        """Re-simulate the recorded joint actions; rewards must match exactly.

        Consecutive episodes in one transcript used seed, seed+1, ... in order.
        """
        episode = 0
        state = kitchen_env.create(self.map_id, DishSpec(self.task), self.seed, self.horizon)
        cumulative = 0.0
        for i, step in enumerate(self.steps, start=1):
            if state.done:
                episode += 1
                state = kitchen_env.create(
                    self.map_id, DishSpec(self.task), self.seed + episode, self.horizon
                )
                cumulative = 0.0
            joint = [AgentAction.from_surface_text(text) for text in step.actions]
            outcome = kitchen_env.step(state, joint)
            cumulative += outcome.reward
            if outcome.reward != step.reward:
                raise AssertionError(
                    f"step {i}: recorded reward {step.reward!r} != simulated {outcome.reward!r}"
                )
            if cumulative != step.cumulative_return:
                raise AssertionError(
                    f"step {i}: recorded return {step.cumulative_return!r} != {cumulative!r}"
                )


def record_episode(
    checkpoint: str | Path, seed: int, episodes: int = 1
) -> ReplayTranscript:
    """Greedy-play episodes from a checkpoint, capturing the full transcript."""
    from .runner import RunConfig, _eval_rl_config, _messenger_for

    _, header = load_tensors(checkpoint)
    if header.get("kind") == "symbolic":
        return _record_symbolic(checkpoint, header, seed, episodes)

    model, meta, _ = load_model(checkpoint)
    method = meta.get("method", "verco")
    config = RunConfig(
        map_id=meta["map_id"], task=meta["task"], method=method, horizon=meta["horizon"]
    )
    agent = VercoAgent(model, _eval_rl_config())
    messenger = _messenger_for(config, model)
    transcript = ReplayTranscript(
        map_id=meta["map_id"],
        task=meta["task"],
        seed=seed,
        horizon=meta["horizon"],
        method=method,
    )
    for episode in range(episodes):
        state = kitchen_env.create(config.map_id, config.dish, seed + episode, meta["horizon"])
        cumulative = 0.0
        while not state.done:
            grid = render(state)
            observations = [
                textualize(kitchen_env.local_view(state, i)) for i in range(state.n_agents)
            ]
            if messenger is not None:
                messages = messenger.messages_for(state, observations)
                received_for = [
                    [m.text for m in messages if m.sender != i] for i in range(state.n_agents)
                ]
                message_texts = [m.text for m in messages]
            else:
                received_for = [[] for _ in range(state.n_agents)]
                message_texts = []
            joint = []
            for i, obs in enumerate(observations):
                candidates = kitchen_env.legal_actions(state, i)
                dist, _, _ = agent.action_distribution_for(obs, received_for[i], candidates)
                joint.append(candidates[dist.argmax()])
            outcome = kitchen_env.step(state, joint)
            cumulative += outcome.reward
            transcript.steps.append(
                StepRecord(
                    grid=grid,
                    observations=[o.text for o in observations],
                    messages=message_texts,
                    actions=[a.surface_text for a in joint],
                    reward=outcome.reward,
                    cumulative_return=cumulative,
                    events=[e.value for e in outcome.events],
                )
            )
    return transcript


def _record_symbolic(
    checkpoint: str | Path, header: dict, seed: int, episodes: int
) -> ReplayTranscript:
    from .runner import _eval_rl_config

    tensors, _ = load_tensors(checkpoint)
    meta = header["meta"]
    agent = SymbolicAgent(_eval_rl_config(), hidden=header.get("hidden", 128), seed=0)
    agent.net.load_state_dict(
        {n[len("net."):]: t for n, t in tensors.items() if n.startswith("net.")}
    )
    transcript = ReplayTranscript(
        map_id=meta["map_id"],
        task=meta["task"],
        seed=seed,
        horizon=meta["horizon"],
        method="symbolic_ppo",
    )
    for episode in range(episodes):
        state = kitchen_env.create(
            meta["map_id"], DishSpec(meta["task"]), seed + episode, meta["horizon"]
        )
        cumulative = 0.0
        while not state.done:
            grid = render(state)
            observations = [
                textualize(kitchen_env.local_view(state, i)) for i in range(state.n_agents)
            ]
            joint = []
            for i in range(state.n_agents):
                window = kitchen_env.local_view(state, i)
                candidates = kitchen_env.legal_actions(state, i)
                dist, _ = agent.distribution(encode_window(window), candidates)
                joint.append(candidates[dist.argmax()])
            outcome = kitchen_env.step(state, joint)
            cumulative += outcome.reward
            transcript.steps.append(
                StepRecord(
                    grid=grid,
                    observations=[o.text for o in observations],
                    messages=[],
                    actions=[a.surface_text for a in joint],
                    reward=outcome.reward,
                    cumulative_return=cumulative,
                    events=[e.value for e in outcome.events],
                )
            )
    return transcript
