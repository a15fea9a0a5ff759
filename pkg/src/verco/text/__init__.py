from .observation import (
    FALLBACK_SENTENCE,
    OBSERVATION_WORDS,
    TextObservation,
    offset_phrase,
    textualize,
)
from .prompts import (
    MESSAGE_WORD_LIMIT,
    PromptTooLongError,
    TokenBudget,
    action_prompt,
    message_prompt,
    teacher_prompt,
)
from .templates import PromptTemplate, TemplateError, load_template, template_words

__all__ = [
    "FALLBACK_SENTENCE",
    "MESSAGE_WORD_LIMIT",
    "OBSERVATION_WORDS",
    "PromptTemplate",
    "PromptTooLongError",
    "TemplateError",
    "TextObservation",
    "TokenBudget",
    "action_prompt",
    "load_template",
    "message_prompt",
    "offset_phrase",
    "teacher_prompt",
    "template_words",
    "textualize",
]
