"""Collection and training for the shared message adapter.

Collection walks the environment with the untrained action policy (greedy
over candidate scores, no message conditioning yet) while the privileged
teacher labels every step; training then fits the message slot with
token-level cross-entropy on the labels.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

import torch

from ..kitchen import env as kitchen_env
from ..kitchen.types import DishSpec
from ..model.net import TinyCausalLM
from ..model.vocab import TokenSequence
from ..rl.distribution import action_distribution
from ..teacher.oracle import progress_from_state
from ..text.observation import textualize
from ..text.prompts import message_prompt
from .data import SftBuffer, SftExample


@dataclass
class SftSettings:
    episodes: int = 20
    epochs: int = 40
    batch_size: int = 16
    lr: float = 1e-3
    capacity: int | None = None
    seed: int = 0


def collect(
    map_id: str,
    task: DishSpec,
    teacher,
    model: TinyCausalLM,
    action_slot: str,
    episodes: int,
    horizon: int = kitchen_env.DEFAULT_HORIZON,
    seed: int = 0,
    capacity: int | None = None,
) -> SftBuffer:
    """Run `episodes` rollouts with the initial action policy, labelling every
    step with the teacher; one example per agent per step."""
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    vocab = model.vocab
    buffer = SftBuffer(capacity)
    for episode in range(episodes):
        state = kitchen_env.create(map_id, task, seed + episode, horizon)
        while not state.done and not buffer.is_full:
            observations = [
                textualize(kitchen_env.local_view(state, i)) for i in range(state.n_agents)
            ]
            progress = progress_from_state(state)
            labels = teacher.label(observations, progress)
            for i, (obs, label) in enumerate(zip(observations, labels)):
                buffer.append(
                    SftExample(
                        prompt_tokens=vocab.tokenize(message_prompt(obs), add_bos=True),
                        target_tokens=vocab.tokenize(label.text, add_eos=True),
                        agent=i,
                        episode=episode,
                        step=state.timestep,
                    )
                )
            joint = []
            with torch.no_grad():
                for i, obs in enumerate(observations):
                    dist = action_distribution(
                        model,
                        action_slot,
                        obs,
                        received=[],
                        candidates=kitchen_env.legal_actions(state, i),
                    )
                    joint.append(dist.candidates[dist.argmax()])
            kitchen_env.step(state, joint)
        if buffer.is_full:
            break
    return buffer


def sft_loss(model: TinyCausalLM, batch: list[SftExample], slot: str) -> torch.Tensor:
    """Mean per-token negative log-likelihood of the targets; prompt positions
    contribute nothing (they are masked out of the score)."""
    if not batch:
        raise ValueError("empty batch")
    pairs = [(ex.prompt_tokens, ex.target_tokens) for ex in batch]
    logprobs = model.score_pairs(pairs, slot)
    total_tokens = sum(len(ex.target_tokens) for ex in batch)
    return -logprobs.sum() / total_tokens


@dataclass
class SftResult:
    losses: list[float] = field(default_factory=list)

    @property
    def final_loss(self) -> float:
        return self.losses[-1] if self.losses else float("nan")


def train_sft(
    model: TinyCausalLM,
    buffer: SftBuffer,
    slot: str = "message",
    epochs: int = 40,
    batch_size: int = 16,
    lr: float = 1e-3,
    seed: int = 0,
    max_steps: int | None = None,
) -> SftResult:
    """Optimize only the message slot; every other parameter is untouched."""
    if len(buffer) == 0:
        raise ValueError("empty buffer")
    params = model.slot_parameters(slot)
    optimizer = torch.optim.Adam(params, lr=lr)
    rng = random.Random(seed)
    result = SftResult()
    steps = 0
    for _ in range(epochs):
        order = list(range(len(buffer)))
        rng.shuffle(order)
        for start in range(0, len(order), batch_size):
            batch = [buffer.examples[i] for i in order[start : start + batch_size]]
            loss = sft_loss(model, batch, slot)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            result.losses.append(float(loss.item()))
            steps += 1
            if max_steps is not None and steps >= max_steps:
                return result
    return result


def greedy_label_accuracy(
    model: TinyCausalLM, buffer: SftBuffer, slot: str = "message", max_tokens: int = 16
) -> float:
    """Fraction of training prompts whose greedy decode reproduces the label."""
    hits = 0
    seen: dict[tuple[int, ...], TokenSequence] = {}
    for ex in buffer.examples:
        key = ex.prompt_tokens.ids
        if key not in seen:
            seen[key] = ex.prompt_tokens
    decoded = {
        key: model.generate(prompt, slot=slot, max_tokens=max_tokens, mode="greedy")
        for key, prompt in seen.items()
    }
    for ex in buffer.examples:
        if decoded[ex.prompt_tokens.ids].ids == ex.target_tokens.ids:
            hits += 1
    return hits / len(buffer.examples)
