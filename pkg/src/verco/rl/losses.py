"""Pure PPO loss arithmetic, shared by the language-model policy and the
symbolic baseline."""
from __future__ import annotations

from typing import Literal, Sequence

import torch


def gae(
    rewards: Sequence[float],
    values: Sequence[float],
    bootstrap: float,
    gamma: float,
    lam: float,
) -> list[float]:
    """Backward recursion A_t = delta_t + gamma*lam*A_{t+1} with
    delta_t = r_t + gamma*V_{t+1} - V_t; V after the last step is `bootstrap`
    (0 when the segment ended an episode)."""
    if len(rewards) != len(values):
        raise ValueError(f"|rewards|={len(rewards)} != |values|={len(values)}")
    advantages = [0.0] * len(rewards)
    running = 0.0
    next_value = bootstrap
    for t in reversed(range(len(rewards))):
        delta = rewards[t] + gamma * next_value - values[t]
        running = delta + gamma * lam * running
        advantages[t] = running
        next_value = values[t]
    return advantages


def clipped_surrogate_terms(
    new_logprobs: torch.Tensor,
    old_logprobs: torch.Tensor,
    advantages: torch.Tensor,
    clip_eps: float,
) -> torch.Tensor:
    """Per-sample negated clipped surrogate: -min(r*A, clip(r)*A)."""
    ratio = torch.exp(new_logprobs - old_logprobs)
    clipped = torch.clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps)
    return -torch.min(ratio * advantages, clipped * advantages)


def value_loss_terms(
    values: torch.Tensor,
    old_values: torch.Tensor,
    targets: torch.Tensor,
    clip_eps: float,
    mode: Literal["max", "min"] = "max",
) -> torch.Tensor:
    """Per-sample clipped value loss.

    Default is the pessimistic max over the raw and the old-value-anchored
    clipped squared errors; "min" keeps the optimistic variant selectable.
    """
    raw = (values - targets) ** 2
    anchored = old_values + torch.clamp(values - old_values, -clip_eps, clip_eps)
    clipped = (anchored - targets) ** 2
    if mode == "max":
        return torch.max(raw, clipped)
    if mode == "min":
        return torch.min(raw, clipped)
    raise ValueError(f"unknown critic clip mode {mode!r}")


def grouped_mean(terms: torch.Tensor, groups: Sequence[int]) -> torch.Tensor:
    """Sum over groups of the within-group mean (per-agent losses are averaged
    within an agent, then summed across agents)."""
    group_ids = sorted(set(groups))
    index = torch.tensor(list(groups), dtype=torch.long)
    total = terms.new_zeros(())
    for gid in group_ids:
        mask = index == gid
        total = total + terms[mask].mean()
    return total
