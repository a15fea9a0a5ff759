"""Pluggable external-LLM teacher over a minimal HTTP JSON contract.

Request:  POST {"prompt": <teacher prompt>, "n": <agent count>}
Response: {"messages": [<string> x n]}

Any failure (network, bad status, malformed payload, invalid message)
degrades to the scripted teacher so training never stalls on the network.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Sequence

import requests

from ..text.observation import TextObservation
from ..text.prompts import teacher_prompt
from .oracle import Message, ScriptedTeacher, TaskProgress

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HttpTeacherConfig:
    endpoint: str
    timeout_s: float = 10.0
    attempts: int = 3
    backoff_s: float = 0.5


class TeacherHttpError(RuntimeError):
    pass


def label_via_http(
    prompt: str,
    config: HttpTeacherConfig,
    n: int,
    known_words: frozenset[str] | None = None,
) -> list[Message]:
    """Fetch n coordinated messages for the rendered teacher prompt.

    Raises TeacherHttpError after exhausting retries; callers that need the
    degradation contract should use HttpTeacher instead.
    """
    payload = {"prompt": prompt, "n": n}
    last_error: Exception | None = None
    for attempt in range(config.attempts):
        if attempt:
            time.sleep(config.backoff_s * 2 ** (attempt - 1))
        try:
            response = requests.post(config.endpoint, json=payload, timeout=config.timeout_s)
            response.raise_for_status()
            body = response.json()
        except (requests.RequestException, ValueError) as exc:
            last_error = exc
            logger.warning("teacher endpoint attempt %d failed: %s", attempt + 1, exc)
            continue
        return _parse_messages(body, n, known_words)
    raise TeacherHttpError(f"teacher endpoint failed after {config.attempts} attempts: {last_error}")


def _parse_messages(
    body: object, n: int, known_words: frozenset[str] | None
) -> list[Message]:
    if not isinstance(body, dict) or not isinstance(body.get("messages"), list):
        raise TeacherHttpError(f"malformed teacher response: {body!r}")
    texts = body["messages"]
    if len(texts) != n or not all(isinstance(t, str) for t in texts):
        raise TeacherHttpError(f"expected {n} message strings, got {texts!r}")
    messages = []
    for i, text in enumerate(texts):
        if known_words is not None:
            text = _map_unknown_words(text, known_words)
        try:
            messages.append(Message(sender=i, text=text))
        except ValueError as exc:
            raise TeacherHttpError(str(exc)) from exc
    return messages


def _map_unknown_words(text: str, known_words: frozenset[str]) -> str:
    mapped = []
    for word in text.split():
        if word.strip(".,!?:;\"'") in known_words or word in known_words:
            mapped.append(word)
        else:
            logger.warning("teacher used out-of-vocabulary word %r; mapped to <unk>", word)
            mapped.append("<unk>")
    return " ".join(mapped)


class HttpTeacher:
    """External teacher with scripted fallback on any endpoint failure."""

    def __init__(
        self,
        config: HttpTeacherConfig,
        fallback: ScriptedTeacher | None = None,
        known_words: frozenset[str] | None = None,
    ):
        self.config = config
        self.fallback = fallback or ScriptedTeacher()
        self.known_words = known_words

    def label(
        self, observations: Sequence[TextObservation], progress: TaskProgress
    ) -> list[Message]:
        prompt = teacher_prompt(observations, n=len(observations))
        try:
            return label_via_http(prompt, self.config, len(observations), self.known_words)
        except TeacherHttpError as exc:
            logger.warning("falling back to scripted teacher: %s", exc)
            return self.fallback.label(observations, progress)
