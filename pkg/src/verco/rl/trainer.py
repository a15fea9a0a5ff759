"""Rollouts and PPO updates for the token-scored action policy.

The message adapter stays frozen for the whole phase: messages are generated
greedily from it (and cached per observation text, which is sound precisely
because the slot never changes), while the action adapter and the value head
are the only parameters the update touches.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import torch

from ..kitchen import env as kitchen_env
from ..kitchen.types import DishSpec
from ..model.net import TinyCausalLM
from ..model.vocab import TokenSequence
from ..teacher.oracle import Message, progress_from_state
from ..text.observation import TextObservation, textualize
from ..text.prompts import action_prompt, message_prompt
from .buffer import RlBuffer, Transition
from .distribution import ActionDistribution, candidate_sequences, score_action_candidates
from .losses import clipped_surrogate_terms, grouped_mean, value_loss_terms

MESSAGE_MAX_TOKENS = 14


@dataclass
class RlConfig:
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_eps: float = 0.2
    critic_coef: float = 0.5
    entropy_coef: float = 0.01
    epochs: int = 4
    minibatch_size: int = 32
    lr: float = 1e-3
    rollout_steps: int = 512
    total_env_steps: int = 50_000
    sample_actions: bool = True
    token_norm: bool = False
    critic_clip_mode: Literal["max", "min"] = "max"
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must be in (0, 1]")
        if not 0 <= self.gae_lambda <= 1:
            raise ValueError("gae_lambda must be in [0, 1]")
        if not 0 < self.clip_eps < 1:
            raise ValueError("clip_eps must be in (0, 1)")


@dataclass
class EpisodeMetrics:
    episode: int
    env_steps: int
    ret: float
    length: int
    entropy: float
    messages: list[list[str]] = field(default_factory=list)


class TeacherMessenger:
    """Pipes scripted-teacher directives straight into the action prompts;
    used to isolate the value of the channel from message-policy quality."""

    def __init__(self, teacher):
        self.teacher = teacher

    def messages_for(self, state, observations: list[TextObservation]) -> list[Message]:
        progress = progress_from_state(state)
        return self.teacher.label(observations, progress)


class PolicyMessenger:
    """Greedy decodes from the frozen message slot, cached by observation text."""

    def __init__(self, model: TinyCausalLM, slot: str):
        self.model = model
        self.slot = slot
        self._cache: dict[str, str] = {}

    def messages_for(self, state, observations: list[TextObservation]) -> list[Message]:
        out = []
        for i, obs in enumerate(observations):
            text = self._cache.get(obs.text)
            if text is None:
                prompt = self.model.vocab.tokenize(message_prompt(obs), add_bos=True)
                decoded = self.model.generate(
                    prompt, slot=self.slot, max_tokens=MESSAGE_MAX_TOKENS, mode="greedy"
                )
                text = decoded.text
                self._cache[obs.text] = text
            out.append(Message.clipped(i, text))
        return out


class _ScoreCache:
    """Per-policy-version cache of candidate scores and values; must be
    cleared after every parameter update."""

    def __init__(self):
        self.scores: dict[tuple, torch.Tensor] = {}
        self.values: dict[tuple, float] = {}

    def clear(self) -> None:
        self.scores.clear()
        self.values.clear()


@dataclass
class RolloutResult:
    buffer: RlBuffer
    metrics: list[EpisodeMetrics]
    env_steps: int


class VercoAgent:
    """Bundles the shared model with its two adapter slots and update state."""

    def __init__(
        self,
        model: TinyCausalLM,
        config: RlConfig,
        action_slot: str = "action",
        message_slot: str | None = "message",
    ):
        self.model = model
        self.config = config
        self.action_slot = action_slot
        self.message_slot = message_slot
        params = model.slot_parameters(action_slot) + model.value_parameters()
        self.optimizer = torch.optim.Adam(params, lr=config.lr)
        self.sample_gen = torch.Generator().manual_seed(config.seed)
        self.cache = _ScoreCache()

    def action_distribution_for(
        self, obs: TextObservation, received: Sequence[str], candidates
    ) -> tuple[ActionDistribution, TokenSequence, tuple[TokenSequence, ...]]:
        vocab = self.model.vocab
        prompt = vocab.tokenize(action_prompt(obs, received), add_bos=True)
        cand_seqs = tuple(candidate_sequences(vocab, candidates))
        key = (prompt.ids, tuple(c.ids for c in cand_seqs))
        logprobs = self.cache.scores.get(key)
        if logprobs is None:
            with torch.no_grad():
                logprobs = score_action_candidates(
                    self.model, self.action_slot, prompt, list(cand_seqs),
                    token_norm=self.config.token_norm,
                )
            self.cache.scores[key] = logprobs
        return ActionDistribution.from_logprobs(candidates, logprobs), prompt, cand_seqs

    def state_value(self, obs: TextObservation) -> tuple[float, TokenSequence]:
        # Eq.-5 critic input: the action prompt without any messages
        prompt = self.model.vocab.tokenize(action_prompt(obs, []), add_bos=True)
        key = prompt.ids
        value = self.cache.values.get(key)
        if value is None:
            with torch.no_grad():
                value = float(self.model.value(prompt).item())
            self.cache.values[key] = value
        return value, prompt


def rollout(
    agent: VercoAgent,
    map_id: str,
    task: DishSpec,
    messenger: PolicyMessenger | TeacherMessenger | None,
    min_steps: int,
    horizon: int = kitchen_env.DEFAULT_HORIZON,
    seed: int = 0,
    episode_offset: int = 0,
    env_step_offset: int = 0,
    greedy: bool = False,
    max_episodes: int | None = None,
    record_messages: bool = False,
) -> RolloutResult:
    """Collect whole episodes until at least `min_steps` environment steps.

    `messenger=None` is the no-communication reduction: action prompts carry
    no message section at all.
    """
    buffer = RlBuffer()
    metrics: list[EpisodeMetrics] = []
    env_steps = 0
    episode = 0
    while env_steps < min_steps and (max_episodes is None or episode < max_episodes):
        state = kitchen_env.create(map_id, task, seed + episode_offset + episode, horizon)
        per_step: list[list[Transition]] = []
        ep_return = 0.0
        entropies: list[float] = []
        sent_messages: list[list[str]] = []
        while not state.done:
            observations = [
                textualize(kitchen_env.local_view(state, i)) for i in range(state.n_agents)
            ]
            if messenger is not None:
                messages = messenger.messages_for(state, observations)
                received_for = [
                    [m.text for m in messages if m.sender != i] for i in range(state.n_agents)
                ]
                if record_messages:
                    sent_messages.append([m.text for m in messages])
            else:
                received_for = [[] for _ in range(state.n_agents)]

            joint = []
            step_transitions: list[Transition] = []
            for i, obs in enumerate(observations):
                candidates = kitchen_env.legal_actions(state, i)
                dist, prompt, cand_seqs = agent.action_distribution_for(
                    obs, received_for[i], candidates
                )
                if greedy or not agent.config.sample_actions:
                    idx = dist.argmax()
                else:
                    idx = dist.sample(agent.sample_gen)
                value, value_prompt = agent.state_value(obs)
                entropies.append(dist.entropy())
                joint.append(candidates[idx])
                step_transitions.append(
                    Transition(
                        agent=i,
                        prompt=prompt,
                        value_prompt=value_prompt,
                        candidates=cand_seqs,
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
                messages=sent_messages,
            )
        )
        episode += 1
    return RolloutResult(buffer=buffer, metrics=metrics, env_steps=env_steps)


def _recompute_scores(
    model: TinyCausalLM,
    batch: list[Transition],
    slot: str,
    token_norm: bool,
) -> tuple[torch.Tensor, torch.Tensor]:
    """New normalized log-probs of the chosen actions and entropies, batched
    over every candidate of every transition."""
    pairs: list[tuple[TokenSequence, TokenSequence]] = []
    spans: list[tuple[int, int]] = []
    for tr in batch:
        start = len(pairs)
        pairs.extend((tr.prompt, cand) for cand in tr.candidates)
        spans.append((start, len(pairs)))
    flat = model.score_pairs(pairs, slot)
    if token_norm:
        lengths = torch.tensor(
            [float(len(c)) for tr in batch for c in tr.candidates]
        )
        flat = flat / lengths
    new_logprobs = []
    entropies = []
    for (start, end), tr in zip(spans, batch):
        scores = flat[start:end]
        logp = torch.log_softmax(scores, dim=0)
        new_logprobs.append(logp[tr.action_index])
        entropies.append(-(logp.exp() * logp).sum())
    return torch.stack(new_logprobs), torch.stack(entropies)


def policy_loss(
    model: TinyCausalLM,
    batch: list[Transition],
    slot: str,
    clip_eps: float,
    token_norm: bool = False,
) -> torch.Tensor:
    """Clipped-surrogate actor loss (negated for minimization), summed over
    agents with a per-agent mean inside."""
    _require_advantages(batch)
    new_logprobs, _ = _recompute_scores(model, batch, slot, token_norm)
    old = torch.tensor([tr.behavior_logprob for tr in batch])
    adv = torch.tensor([tr.advantage for tr in batch])
    terms = clipped_surrogate_terms(new_logprobs, old, adv, clip_eps)
    return grouped_mean(terms, [tr.agent for tr in batch])


def critic_loss(
    model: TinyCausalLM,
    batch: list[Transition],
    clip_eps: float,
    mode: Literal["max", "min"] = "max",
) -> torch.Tensor:
    _require_advantages(batch)
    values = model.value_batch([tr.value_prompt for tr in batch])
    old = torch.tensor([tr.value for tr in batch])
    targets = torch.tensor([tr.value_target for tr in batch])
    terms = value_loss_terms(values, old, targets, clip_eps, mode)
    return grouped_mean(terms, [tr.agent for tr in batch])


def _require_advantages(batch: list[Transition]) -> None:
    if not batch:
        raise ValueError("empty batch")
    if any(tr.advantage is None or tr.value_target is None for tr in batch):
        raise ValueError("advantages not computed; call buffer.compute_advantages first")


@dataclass
class UpdateDiagnostics:
    policy_loss: float
    critic_loss: float
    entropy: float
    total_loss: float


def overall_update(agent: VercoAgent, buffer: RlBuffer) -> UpdateDiagnostics:
    """Minibatch PPO epochs over the buffer, minimizing
    policy + critic_coef * critic - entropy_coef * entropy; clears the buffer
    and the per-version score cache afterwards."""
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
            new_logprobs, entropies = _recompute_scores(
                agent.model, batch, agent.action_slot, cfg.token_norm
            )
            old = torch.tensor([tr.behavior_logprob for tr in batch])
            adv = torch.tensor([tr.advantage for tr in batch])
            policy_terms = clipped_surrogate_terms(new_logprobs, old, adv, cfg.clip_eps)
            actor = grouped_mean(policy_terms, groups)

            values = agent.model.value_batch([tr.value_prompt for tr in batch])
            v_old = torch.tensor([tr.value for tr in batch])
            targets = torch.tensor([tr.value_target for tr in batch])
            critic_terms = value_loss_terms(
                values, v_old, targets, cfg.clip_eps, cfg.critic_clip_mode
            )
            critic = grouped_mean(critic_terms, groups)

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
    agent.cache.clear()
    return last
