from .data import BufferFullError, SftBuffer, SftExample
from .pipeline import (
    SftResult,
    SftSettings,
    collect,
    greedy_label_accuracy,
    sft_loss,
    train_sft,
)

__all__ = [
    "BufferFullError",
    "SftBuffer",
    "SftExample",
    "SftResult",
    "SftSettings",
    "collect",
    "greedy_label_accuracy",
    "sft_loss",
    "train_sft",
]
