"""Supervised fine-tuning examples and their buffer."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..model.vocab import TokenSequence, Vocabulary


class BufferFullError(RuntimeError):
    pass


@dataclass(frozen=True)
class SftExample:
    prompt_tokens: TokenSequence
    target_tokens: TokenSequence
    agent: int
    episode: int
    step: int

    def __post_init__(self) -> None:
        if len(self.target_tokens) == 0:
            raise ValueError("empty SFT target")


class SftBuffer:
    """Append-only store of (message prompt, label) pairs."""

    def __init__(self, capacity: int | None = None):
        self.capacity = capacity
        self.examples: list[SftExample] = []

    def __len__(self) -> int:
        return len(self.examples)

    @property
    def is_full(self) -> bool:
        return self.capacity is not None and len(self.examples) >= self.capacity

    def append(self, example: SftExample) -> None:
        if self.is_full:
            raise BufferFullError(f"buffer at capacity {self.capacity}")
        self.examples.append(example)

    def save_jsonl(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            for ex in self.examples:
                fh.write(
                    json.dumps(
                        {
                            "prompt": ex.prompt_tokens.text,
                            "target": ex.target_tokens.text,
                            "agent": ex.agent,
                            "episode": ex.episode,
                            "step": ex.step,
                        }
                    )
                    + "\n"
                )

    @staticmethod
    def load_jsonl(path: str | Path, vocab: Vocabulary, capacity: int | None = None) -> "SftBuffer":
        buffer = SftBuffer(capacity)
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                row = json.loads(line)
                buffer.append(
                    SftExample(
                        prompt_tokens=vocab.tokenize(row["prompt"], add_bos=True),
                        target_tokens=vocab.tokenize(row["target"], add_eos=True),
                        agent=row["agent"],
                        episode=row["episode"],
                        step=row["step"],
                    )
                )
        return buffer
