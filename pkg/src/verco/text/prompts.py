"""The three prompt renderers: teacher labelling, message generation, action choice."""
from __future__ import annotations

from typing import Protocol, Sequence

from .observation import TextObservation
from .templates import load_template

MESSAGE_WORD_LIMIT = 10


class PromptTooLongError(ValueError):
    """Rendered prompt exceeds the model context; never silently truncated."""


class TokenBudget(Protocol):
    """Anything that can count tokens against a context limit."""

    def count(self, text: str) -> int: ...

    @property
    def limit(self) -> int: ...


def _check_budget(text: str, budget: TokenBudget | None) -> str:
    if budget is not None:
        n = budget.count(text)
        if n > budget.limit:
            raise PromptTooLongError(f"prompt needs {n} tokens, context is {budget.limit}")
    return text


def teacher_prompt(
    observations: Sequence[TextObservation],
    n: int,
    budget: TokenBudget | None = None,
) -> str:
    """Global-view labelling prompt: preamble, one observation block per
    agent, then the message-design instruction with its 10-word bound."""
    if n < 2 or len(observations) != n:
        raise ValueError(f"need n>=2 observations, got n={n}, |obs|={len(observations)}")
    line = load_template("teacher_agent_line")
    blocks = []
    for idx, obs in enumerate(observations, start=1):
        rendered = line.render(index=str(idx), observation=obs.text)
        blocks.append(rendered + ("," if idx < n else "."))
    text = load_template("teacher").render(
        n=str(n), agent_observations="\n".join(blocks)
    )
    return _check_budget(text, budget)


def message_prompt(obs: TextObservation, budget: TokenBudget | None = None) -> str:
    text = load_template("message").render(observation=obs.text)
    return _check_budget(text, budget)


def action_prompt(
    obs: TextObservation,
    received: Sequence[str],
    budget: TokenBudget | None = None,
) -> str:
    """Local observation, then each received message, then the choice suffix.

    An empty `received` omits the message section entirely (the
    no-communication reduction).
    """
    line = load_template("action_message_line")
    section = "".join(line.render(message=m) + "\n" for m in received)
    text = load_template("action").render(observation=obs.text, message_section=section)
    return _check_budget(text, budget)
