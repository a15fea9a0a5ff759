"""Tiny causal transformer with named low-rank adapter slots and a value head.

One frozen randomly-initialized base hosts any number of adapter slots
(here: "message" and "action"). Each adapted projection computes
W0 x + (alpha/rank) * B(A x) with B zero-initialized, so a fresh slot is an
exact no-op. The value head reads the final block's output at the last
token and is detached from the trunk, so critic updates never leak into
adapters or base weights.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Iterable, Literal

import torch
import torch.nn.functional as F
from torch import nn

from .vocab import TokenSequence, Vocabulary

LORA_TARGETS = ("attn_q", "attn_k", "attn_v", "attn_o", "mlp_fc", "mlp_proj", "head")


class ModelUsageError(RuntimeError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    d_model: int = 64
    n_layers: int = 2
    n_heads: int = 4
    context_length: int = 256
    mlp_ratio: int = 4
    adapter_rank: int = 4
    adapter_alpha: float = 8.0
    # every dense matrix gets a slot by default; a randomly initialized base
    # leaves attention-only adapters too weak to fit even small label sets
    lora_targets: tuple[str, ...] = LORA_TARGETS
    value_hidden: int = 64

    def __post_init__(self) -> None:
        if self.d_model % self.n_heads:
            raise ValueError("d_model must divide evenly into heads")
        if self.adapter_rank >= min(self.d_model, self.vocab_size):
            raise ValueError("adapter rank must be below the dense dimensions")
        unknown = set(self.lora_targets) - set(LORA_TARGETS)
        if unknown:
            raise ValueError(f"unknown lora targets {sorted(unknown)}")

    def to_dict(self) -> dict:
        return {
            "vocab_size": self.vocab_size,
            "d_model": self.d_model,
            "n_layers": self.n_layers,
            "n_heads": self.n_heads,
            "context_length": self.context_length,
            "mlp_ratio": self.mlp_ratio,
            "adapter_rank": self.adapter_rank,
            "adapter_alpha": self.adapter_alpha,
            "lora_targets": list(self.lora_targets),
            "value_hidden": self.value_hidden,
        }

    @staticmethod
    def from_dict(data: dict) -> "ModelConfig":
        data = dict(data)
        data["lora_targets"] = tuple(data.get("lora_targets", LORA_TARGETS))
        return ModelConfig(**data)


def _uniform(shape: tuple[int, ...], bound: float, gen: torch.Generator) -> torch.Tensor:
    return (torch.rand(shape, generator=gen) * 2 - 1) * bound


class LoraLinear(nn.Module):
    """Frozen dense layer plus per-slot low-rank deltas."""

    def __init__(self, in_features: int, out_features: int, target: str, gen: torch.Generator):
        super().__init__()
        self.in_features = in_features
        self.out_features = out_features
        self.target = target
        bound = 1.0 / math.sqrt(in_features)
        self.weight = nn.Parameter(_uniform((out_features, in_features), bound, gen))
        self.adapters = nn.ParameterDict()
        self.scaling: dict[str, float] = {}

    def add_slot(self, slot: str, rank: int, alpha: float, gen: torch.Generator) -> None:
        if f"{slot}__A" in self.adapters:
            raise ModelUsageError(f"slot {slot!r} already exists on {self.target}")
        # A gets small uniform noise, B starts at zero: the delta is exactly 0
        self.adapters[f"{slot}__A"] = nn.Parameter(
            _uniform((rank, self.in_features), 0.1, gen)
        )
        self.adapters[f"{slot}__B"] = nn.Parameter(torch.zeros(self.out_features, rank))
        self.scaling[slot] = alpha / rank

    def forward(self, x: torch.Tensor, slot: str | None = None) -> torch.Tensor:
        out = F.linear(x, self.weight)
        if slot is not None and f"{slot}__A" in self.adapters:
            down = F.linear(x, self.adapters[f"{slot}__A"])
            out = out + self.scaling[slot] * F.linear(down, self.adapters[f"{slot}__B"])
        return out


class CausalSelfAttention(nn.Module):
    def __init__(self, config: ModelConfig, gen: torch.Generator):
        super().__init__()
        d = config.d_model
        self.n_heads = config.n_heads
        self.head_dim = d // config.n_heads
        self.q = LoraLinear(d, d, "attn_q", gen)
        self.k = LoraLinear(d, d, "attn_k", gen)
        self.v = LoraLinear(d, d, "attn_v", gen)
        self.o = LoraLinear(d, d, "attn_o", gen)

    def forward(self, x: torch.Tensor, slot: str | None) -> torch.Tensor:
        B, T, D = x.shape
        shape = (B, T, self.n_heads, self.head_dim)
        q = self.q(x, slot).view(shape).transpose(1, 2)
        k = self.k(x, slot).view(shape).transpose(1, 2)
        v = self.v(x, slot).view(shape).transpose(1, 2)
        scores = q @ k.transpose(-2, -1) / math.sqrt(self.head_dim)
        mask = torch.triu(torch.ones(T, T, dtype=torch.bool), diagonal=1)
        scores = scores.masked_fill(mask, float("-inf"))
        att = torch.softmax(scores, dim=-1)
        out = (att @ v).transpose(1, 2).reshape(B, T, D)
        return self.o(out, slot)


class Mlp(nn.Module):
    def __init__(self, config: ModelConfig, gen: torch.Generator):
        super().__init__()
        d, hidden = config.d_model, config.d_model * config.mlp_ratio
        self.fc = LoraLinear(d, hidden, "mlp_fc", gen)
        self.proj = LoraLinear(hidden, d, "mlp_proj", gen)

    def forward(self, x: torch.Tensor, slot: str | None) -> torch.Tensor:
        return self.proj(F.gelu(self.fc(x, slot)), slot)


class Block(nn.Module):
    def __init__(self, config: ModelConfig, gen: torch.Generator):
        super().__init__()
        self.ln1 = nn.LayerNorm(config.d_model)
        self.attn = CausalSelfAttention(config, gen)
        self.ln2 = nn.LayerNorm(config.d_model)
        self.mlp = Mlp(config, gen)

    def forward(self, x: torch.Tensor, slot: str | None) -> torch.Tensor:
        x = x + self.attn(self.ln1(x), slot)
        return x + self.mlp(self.ln2(x), slot)


class ValueHead(nn.Module):
    """Two-layer scalar head; the output layer starts at zero so untrained
    value estimates are exactly 0."""

    def __init__(self, config: ModelConfig, gen: torch.Generator):
        super().__init__()
        d, hidden = config.d_model, config.value_hidden
        self.w1 = nn.Parameter(_uniform((hidden, d), 1.0 / math.sqrt(d), gen))
        self.b1 = nn.Parameter(torch.zeros(hidden))
        self.w2 = nn.Parameter(torch.zeros(1, hidden))
        self.b2 = nn.Parameter(torch.zeros(1))

    def forward(self, h: torch.Tensor) -> torch.Tensor:
        out = torch.tanh(F.linear(h, self.w1, self.b1))
        return F.linear(out, self.w2, self.b2).squeeze(-1)


class TinyCausalLM(nn.Module):
    def __init__(self, config: ModelConfig, vocab: Vocabulary, seed: int = 0):
        super().__init__()
        if len(vocab) != config.vocab_size:
            raise ValueError(
                f"config.vocab_size={config.vocab_size} but vocabulary has {len(vocab)}"
            )
        self.config = config
        self.vocab = vocab
        gen = torch.Generator().manual_seed(seed)
        self.tok_emb = nn.Parameter(torch.randn(config.vocab_size, config.d_model, generator=gen) * 0.02)
        self.pos_emb = nn.Parameter(torch.randn(config.context_length, config.d_model, generator=gen) * 0.02)
        self.blocks = nn.ModuleList(Block(config, gen) for _ in range(config.n_layers))
        self.ln_f = nn.LayerNorm(config.d_model)
        self.head = LoraLinear(config.d_model, config.vocab_size, "head", gen)
        self.value_head = ValueHead(config, gen)
        self.slot_names: list[str] = []
        # freeze the base; only adapters (added later) and the value head train
        for name, param in self.named_parameters():
            if not name.startswith("value_head."):
                param.requires_grad_(False)

    # --- slots ---------------------------------------------------------

    def add_slot(self, slot: str, seed: int = 0) -> None:
        if slot in self.slot_names:
            raise ModelUsageError(f"slot {slot!r} already exists")
        gen = torch.Generator().manual_seed(seed)
        for module in self.modules():
            if isinstance(module, LoraLinear) and module.target in self.config.lora_targets:
                module.add_slot(slot, self.config.adapter_rank, self.config.adapter_alpha, gen)
        self.slot_names.append(slot)

    def slot_parameters(self, slot: str) -> list[nn.Parameter]:
        self._require_slot(slot)
        return [p for name, p in self.named_parameters() if f"adapters.{slot}__" in name]

    def named_slot_parameters(self, slot: str) -> list[tuple[str, nn.Parameter]]:
        self._require_slot(slot)
        return [(n, p) for n, p in self.named_parameters() if f"adapters.{slot}__" in n]

    def value_parameters(self) -> list[nn.Parameter]:
        return list(self.value_head.parameters())

    def base_parameters(self) -> list[tuple[str, nn.Parameter]]:
        return [
            (n, p)
            for n, p in self.named_parameters()
            if "adapters." not in n and not n.startswith("value_head.")
        ]

    def _require_slot(self, slot: str | None) -> None:
        if slot is not None and slot not in self.slot_names:
            raise ModelUsageError(f"unknown adapter slot {slot!r}")

    # --- forward paths ---------------------------------------------------

    def _check_length(self, n: int) -> None:
        if n > self.config.context_length:
            raise ModelUsageError(
                f"sequence of {n} tokens exceeds context {self.config.context_length}"
            )
        if n == 0:
            raise ModelUsageError("empty sequence")

    def hidden_batch(self, ids: torch.Tensor, slot: str | None = None) -> torch.Tensor:
        """[B, T] token ids (right-padded) -> [B, T, d] final-block output."""
        self._require_slot(slot)
        self._check_length(ids.shape[1])
        x = self.tok_emb[ids] + self.pos_emb[: ids.shape[1]]
        for block in self.blocks:
            x = block(x, slot)
        return self.ln_f(x)

    def logits_batch(self, ids: torch.Tensor, slot: str | None = None) -> torch.Tensor:
        return self.head(self.hidden_batch(ids, slot), slot)

    def forward(self, seq: TokenSequence, slot: str | None = None) -> torch.Tensor:
        """Per-position next-token logits, shape [len(seq), vocab]."""
        self._check_length(len(seq))
        ids = torch.tensor([seq.ids], dtype=torch.long)
        return self.logits_batch(ids, slot)[0]

    def sequence_logprob(
        self, prefix: TokenSequence, continuation: TokenSequence, slot: str | None = None
    ) -> torch.Tensor:
        """Sum of log P(token | prefix, previous tokens) over the continuation.

        Differentiable with respect to the slot's adapters.
        """
        if len(continuation) == 0:
            raise ModelUsageError("empty continuation")
        if len(prefix) == 0:
            raise ModelUsageError("empty prefix")
        return self.score_candidates(prefix, [continuation], slot)[0]

    def score_candidates(
        self,
        prefix: TokenSequence,
        candidates: list[TokenSequence],
        slot: str | None = None,
    ) -> torch.Tensor:
        """Sequence log-probabilities for many continuations of one prefix."""
        if not candidates or any(len(c) == 0 for c in candidates):
            raise ModelUsageError("candidates must be non-empty sequences")
        rows = [tuple(prefix.ids) + tuple(c.ids) for c in candidates]
        return self._score_rows(rows, [len(prefix)] * len(rows), slot)

    def score_pairs(
        self,
        pairs: list[tuple[TokenSequence, TokenSequence]],
        slot: str | None = None,
    ) -> torch.Tensor:
        """Sequence log-probabilities for a batch of (prefix, continuation)."""
        if not pairs:
            raise ModelUsageError("empty batch")
        rows = [tuple(p.ids) + tuple(c.ids) for p, c in pairs]
        return self._score_rows(rows, [len(p) for p, _ in pairs], slot)

    def _score_rows(
        self, rows: list[tuple[int, ...]], prefix_lens: list[int], slot: str | None
    ) -> torch.Tensor:
        for row in rows:
            self._check_length(len(row))
        B = len(rows)
        T = max(len(r) for r in rows) - 1
        pad = self.vocab.pad_id
        inputs = torch.full((B, T), pad, dtype=torch.long)
        targets = torch.full((B, T), pad, dtype=torch.long)
        mask = torch.zeros((B, T), dtype=torch.bool)
        for b, (row, plen) in enumerate(zip(rows, prefix_lens)):
            n = len(row)
            inputs[b, : n - 1] = torch.tensor(row[:-1], dtype=torch.long)
            targets[b, plen - 1 : n - 1] = torch.tensor(row[plen:], dtype=torch.long)
            mask[b, plen - 1 : n - 1] = True
        logprobs = F.log_softmax(self.logits_batch(inputs, slot), dim=-1)
        picked = logprobs.gather(2, targets.unsqueeze(-1)).squeeze(-1)
        return (picked * mask).sum(dim=1)

    # --- decoding ---------------------------------------------------------

    def generate(
        self,
        prompt: TokenSequence,
        slot: str | None = None,
        max_tokens: int = 16,
        mode: Literal["greedy", "sample"] = "greedy",
        seed: int = 0,
        temperature: float = 1.0,
    ) -> TokenSequence:
        """Autoregressive decoding; stops at <eos>, max_tokens, or context end.

        Greedy is deterministic; sampling is deterministic given the seed.
        Structural tokens (<pad>, <bos>, <unk>) are never emitted.
        """
        if max_tokens < 1:
            raise ModelUsageError("max_tokens must be >= 1")
        if len(prompt) == 0:
            raise ModelUsageError("empty prompt")
        banned = [self.vocab.pad_id, self.vocab.bos_id, self.vocab.unk_id]
        gen = torch.Generator().manual_seed(seed)
        ids = list(prompt.ids)
        out: list[int] = []
        with torch.no_grad():
            for _ in range(max_tokens):
                if len(ids) >= self.config.context_length:
                    break
                seq = torch.tensor([ids], dtype=torch.long)
                logits = self.logits_batch(seq, slot)[0, -1]
                logits[banned] = float("-inf")
                if mode == "greedy":
                    next_id = int(torch.argmax(logits).item())
                else:
                    scaled = (logits - logits.max()) / max(temperature, 1e-8)
                    probs = torch.softmax(scaled, dim=-1)
                    next_id = int(torch.multinomial(probs, 1, generator=gen).item())
                ids.append(next_id)
                out.append(next_id)
                if next_id == self.vocab.eos_id:
                    break
        return TokenSequence(tuple(out), self.vocab.detokenize(out))

    # --- value -------------------------------------------------------------

    def value(self, prompt: TokenSequence) -> torch.Tensor:
        """State-value estimate from the base model's last-token state."""
        return self.value_batch([prompt])[0]

    def value_batch(self, prompts: list[TokenSequence]) -> torch.Tensor:
        if not prompts:
            raise ModelUsageError("empty batch")
        for p in prompts:
            self._check_length(len(p))
        B = len(prompts)
        T = max(len(p) for p in prompts)
        ids = torch.full((B, T), self.vocab.pad_id, dtype=torch.long)
        for b, p in enumerate(prompts):
            ids[b, : len(p)] = torch.tensor(p.ids, dtype=torch.long)
        with torch.no_grad():
            hidden = self.hidden_batch(ids, slot=None)
        last = torch.tensor([len(p) - 1 for p in prompts], dtype=torch.long)
        states = hidden[torch.arange(B), last]
        return self.value_head(states)


def gradients(loss: torch.Tensor, model: TinyCausalLM) -> dict[str, torch.Tensor]:
    """Reverse-mode gradients of a scalar loss for every trainable parameter.

    Frozen base weights are excluded by construction. Parameters that do not
    participate in the loss get zero gradients.
    """
    if loss.dim() != 0:
        raise ModelUsageError("loss must be a scalar")
    if loss.grad_fn is None:
        raise ModelUsageError("loss is not connected to a computation graph")
    named = [(n, p) for n, p in model.named_parameters() if p.requires_grad]
    grads = torch.autograd.grad(
        loss, [p for _, p in named], allow_unused=True, retain_graph=False
    )
    return {
        name: (g if g is not None else torch.zeros_like(p))
        for (name, p), g in zip(named, grads)
    }


def parameter_fingerprint(params: Iterable[torch.Tensor] | Iterable[tuple[str, torch.Tensor]]) -> str:
    """SHA-256 over raw parameter bytes; used to assert bit-level freezes."""
    digest = hashlib.sha256()
    for item in params:
        tensor = item[1] if isinstance(item, tuple) else item
        digest.update(tensor.detach().numpy().tobytes())
    return digest.hexdigest()
