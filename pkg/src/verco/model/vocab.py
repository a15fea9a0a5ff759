"""Word-level vocabulary and tokenizer.

The token inventory is closed over everything the system can ever need to
read or write: prompt templates, observation sentences, action phrases,
teacher directives, digits, and punctuation. Unknown words map to <unk>.
"""
from __future__ import annotations

import json
import re
import string
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..kitchen.types import SURFACE_TEXTS
from ..text.observation import OBSERVATION_WORDS
from ..text.templates import template_words

PAD, BOS, EOS, UNK = "<pad>", "<bos>", "<eos>", "<unk>"
SPECIALS = (PAD, BOS, EOS, UNK)

# special markers, words and digit runs, or any single non-space symbol
_TOKEN_RE = re.compile(r"<pad>|<bos>|<eos>|<unk>|[A-Za-z0-9']+|[^\sA-Za-z0-9']")

_PUNCTUATION = tuple(".,:;?!\"'-<>")


class VocabularyError(ValueError):
    pass


@dataclass(frozen=True)
class TokenSequence:
    ids: tuple[int, ...]
    text: str = ""

    def __len__(self) -> int:
        return len(self.ids)

    def __add__(self, other: "TokenSequence") -> "TokenSequence":
        return TokenSequence(self.ids + other.ids, (self.text + " " + other.text).strip())


@dataclass(frozen=True)
class Vocabulary:
    tokens: tuple[str, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        if len(set(self.tokens)) != len(self.tokens):
            raise VocabularyError("duplicate tokens in vocabulary")
        for special in SPECIALS:
            if special not in self.tokens:
                raise VocabularyError(f"missing special token {special}")
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def pad_id(self) -> int:
        return self._index[PAD]

    @property
    def bos_id(self) -> int:
        return self._index[BOS]

    @property
    def eos_id(self) -> int:
        return self._index[EOS]

    @property
    def unk_id(self) -> int:
        return self._index[UNK]

    def id_of(self, token: str) -> int:
        return self._index.get(token, self.unk_id)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def split_words(self, text: str) -> list[str]:
        return _TOKEN_RE.findall(text)

    def tokenize(self, text: str, add_bos: bool = False, add_eos: bool = False) -> TokenSequence:
        ids = [self.id_of(tok) for tok in self.split_words(text)]
        if add_bos:
            ids.insert(0, self.bos_id)
        if add_eos:
            ids.append(self.eos_id)
        return TokenSequence(tuple(ids), text)

    def detokenize(self, ids: tuple[int, ...] | list[int]) -> str:
        """Inverse of tokenize up to whitespace: words are space-joined and
        punctuation reattaches to the preceding token."""
        parts: list[str] = []
        for i in ids:
            token = self.tokens[i]
            if token in (PAD, BOS, EOS):
                continue
            if parts and len(token) == 1 and not token.isalnum() and token != "'":
                parts[-1] += token
            else:
                parts.append(token)
        return " ".join(parts)

    def count(self, text: str) -> int:
        # +1 for the leading <bos> every prompt carries
        return len(self.split_words(text)) + 1

    def save(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.tokens) + "\n", encoding="utf-8")

    @staticmethod
    def load(path: str | Path) -> "Vocabulary":
        tokens = Path(path).read_text(encoding="utf-8").splitlines()
        return Vocabulary(tuple(tokens))


@dataclass(frozen=True)
class ContextBudget:
    """TokenBudget implementation counting word tokens against a context size."""

    vocab: Vocabulary
    limit: int

    def count(self, text: str) -> int:
        return self.vocab.count(text)


def _words_of(text: str) -> set[str]:
    return {tok for tok in _TOKEN_RE.findall(text) if tok[0].isalnum() or tok[0] == "'"}


def _teacher_fixture_words() -> set[str]:
    raw = json.loads(
        resources.files("verco.teacher").joinpath("rules.json").read_text(encoding="utf-8")
    )
    words: set[str] = set()
    for text in raw["directives"].values():
        words |= _words_of(text)
    words |= _words_of(raw["default_message"])
    return words


def build_default_vocabulary(extra_words: set[str] | None = None) -> Vocabulary:
    """Specials first, then every known word sorted, then punctuation."""
    words: set[str] = set()
    words |= template_words()
    words |= set(OBSERVATION_WORDS)
    for phrase in SURFACE_TEXTS.values():
        words |= _words_of(phrase)
    words |= _teacher_fixture_words()
    words |= set(string.digits) | {"10"}
    if extra_words:
        words |= extra_words
    ordered = SPECIALS + tuple(sorted(words)) + _PUNCTUATION
    return Vocabulary(ordered)
