"""Prompt templates loaded from versioned plain-text fixtures.

Slot grammar: a template is UTF-8 text containing ``{slot_name}`` markers
(Python identifier names, no format specs). Rendering substitutes every slot
exactly once and verifies each provided value appears verbatim in the
output; templates are otherwise literal text.
"""
from __future__ import annotations

import re
import string
from dataclasses import dataclass
from importlib import resources

_SLOT_RE = re.compile(r"{([A-Za-z_][A-Za-z0-9_]*)}")


class TemplateError(ValueError):
    pass


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    text: str

    @property
    def slots(self) -> tuple[str, ...]:
        return tuple(m.group(1) for m in _SLOT_RE.finditer(self.text))

    def render(self, **values: str) -> str:
        missing = set(self.slots) - set(values)
        extra = set(values) - set(self.slots)
        if missing or extra:
            raise TemplateError(
                f"template {self.name}: missing slots {sorted(missing)}, unknown {sorted(extra)}"
            )
        out = self.text
        for slot in self.slots:
            out = out.replace("{" + slot + "}", values[slot], 1)
        for slot, value in values.items():
            if value and out.count(value) < 1:
                raise TemplateError(f"template {self.name}: slot {slot} lost its value")
        return out


_CACHE: dict[str, PromptTemplate] = {}


def load_template(name: str) -> PromptTemplate:
    if name not in _CACHE:
        text = (
            resources.files("verco.text")
            .joinpath(f"templates/{name}.txt")
            .read_text(encoding="utf-8")
        )
        _CACHE[name] = PromptTemplate(name=name, text=text.rstrip("\n"))
    return _CACHE[name]


def template_words() -> set[str]:
    """All word tokens appearing in any bundled template (slot markers excluded)."""
    words: set[str] = set()
    for file in resources.files("verco.text").joinpath("templates").iterdir():
        if file.name.endswith(".txt"):
            text = _SLOT_RE.sub(" ", file.read_text(encoding="utf-8"))
            words.update(_extract_words(text))
    return words


def _extract_words(text: str) -> set[str]:
    out = set()
    for raw in text.split():
        word = raw.strip(string.punctuation)
        if word:
            out.add(word)
    return out
