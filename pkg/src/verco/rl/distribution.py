"""Candidate-set action distribution from token-level scores."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import torch

from ..kitchen.types import AgentAction
from ..model.net import TinyCausalLM
from ..model.vocab import TokenSequence
from ..text.observation import TextObservation
from ..text.prompts import action_prompt


@dataclass(frozen=True)
class ActionDistribution:
    candidates: tuple[AgentAction, ...]
    logprobs: torch.Tensor  # raw candidate sequence log-probabilities
    probs: torch.Tensor     # softmax over the candidates

    def __post_init__(self) -> None:
        if len(self.candidates) != self.logprobs.shape[0]:
            raise ValueError("candidate/score length mismatch")

    @staticmethod
    def from_logprobs(
        candidates: Sequence[AgentAction], logprobs: torch.Tensor
    ) -> "ActionDistribution":
        if len(candidates) == 0:
            raise ValueError("empty candidate set")
        probs = torch.softmax(logprobs, dim=0)
        return ActionDistribution(tuple(candidates), logprobs, probs)

    def normalized_logprob(self, index: int) -> torch.Tensor:
        """log P(candidate | all candidates), the Eq.-3-normalized score."""
        return torch.log_softmax(self.logprobs, dim=0)[index]

    def entropy(self) -> float:
        logp = torch.log_softmax(self.logprobs, dim=0)
        return float(-(self.probs * logp).sum().item())

    def argmax(self) -> int:
        return int(torch.argmax(self.probs).item())

    def sample(self, generator: torch.Generator) -> int:
        return int(torch.multinomial(self.probs, 1, generator=generator).item())


def candidate_sequences(
    vocab, candidates: Sequence[AgentAction]
) -> list[TokenSequence]:
    return [vocab.tokenize(c.surface_text) for c in candidates]


def score_action_candidates(
    model: TinyCausalLM,
    slot: str | None,
    prompt: TokenSequence,
    candidate_seqs: list[TokenSequence],
    token_norm: bool = False,
) -> torch.Tensor:
    """Sequence log-probability per candidate; optional per-token averaging
    (off by default: raw token products, no length correction)."""
    logprobs = model.score_candidates(prompt, candidate_seqs, slot)
    if token_norm:
        lengths = torch.tensor([float(len(c)) for c in candidate_seqs])
        logprobs = logprobs / lengths
    return logprobs


def action_distribution(
    model: TinyCausalLM,
    slot: str | None,
    obs: TextObservation,
    received: Sequence[str],
    candidates: Sequence[AgentAction],
    token_norm: bool = False,
) -> ActionDistribution:
    """Score the legal candidates against the action prompt and normalize."""
    if len(candidates) == 0:
        raise ValueError("empty candidate set")
    vocab = model.vocab
    prompt = vocab.tokenize(action_prompt(obs, received), add_bos=True)
    seqs = candidate_sequences(vocab, candidates)
    logprobs = score_action_candidates(model, slot, prompt, seqs, token_norm)
    return ActionDistribution.from_logprobs(candidates, logprobs)
