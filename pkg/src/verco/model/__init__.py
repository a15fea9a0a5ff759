from .checkpoint import CheckpointError, load_model, load_tensors, save_model, save_tensors
from .net import (
    LORA_TARGETS,
    LoraLinear,
    ModelConfig,
    ModelUsageError,
    TinyCausalLM,
    ValueHead,
    gradients,
    parameter_fingerprint,
)
from .vocab import (
    BOS,
    EOS,
    PAD,
    SPECIALS,
    UNK,
    ContextBudget,
    TokenSequence,
    Vocabulary,
    VocabularyError,
    build_default_vocabulary,
)

__all__ = [
    "BOS",
    "CheckpointError",
    "ContextBudget",
    "EOS",
    "LORA_TARGETS",
    "LoraLinear",
    "ModelConfig",
    "ModelUsageError",
    "PAD",
    "SPECIALS",
    "TinyCausalLM",
    "TokenSequence",
    "UNK",
    "ValueHead",
    "Vocabulary",
    "VocabularyError",
    "build_default_vocabulary",
    "gradients",
    "load_model",
    "load_tensors",
    "parameter_fingerprint",
    "save_model",
    "save_tensors",
]
