"""Versioned flat checkpoint container.

Layout: 4-byte magic, uint32 format version, uint64 header length, UTF-8
JSON header, then every tensor's raw row-major float32 data concatenated in
header order. The header records tensor names/shapes plus arbitrary
metadata; model checkpoints additionally carry hyperparameters, slot names,
and the vocabulary, so a file is self-describing.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
import torch

from .net import ModelConfig, TinyCausalLM
from .vocab import Vocabulary

MAGIC = b"VCKP"
FORMAT_VERSION = 1


class CheckpointError(RuntimeError):
    pass


def save_tensors(
    path: str | Path, tensors: dict[str, torch.Tensor], header_extra: dict | None = None
) -> None:
    items = list(tensors.items())
    header = dict(header_extra or {})
    header["tensors"] = [{"name": n, "shape": list(t.shape)} for n, t in items]
    blob = json.dumps(header).encode("utf-8")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for _, tensor in items:
            data = tensor.detach().to(torch.float32).numpy()
            fh.write(np.ascontiguousarray(data).tobytes())


def load_tensors(path: str | Path) -> tuple[dict[str, torch.Tensor], dict]:
    path = Path(path)
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise CheckpointError(f"{path} is not a checkpoint file")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != FORMAT_VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        (header_len,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(header_len).decode("utf-8"))
        tensors: dict[str, torch.Tensor] = {}
        for entry in header["tensors"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            data = np.frombuffer(fh.read(count * 4), dtype="<f4").reshape(shape)
            tensors[entry["name"]] = torch.from_numpy(data.copy())
    header.pop("tensors", None)
    return tensors, header


def save_model(
    model: TinyCausalLM,
    path: str | Path,
    meta: dict | None = None,
    extra: dict[str, torch.Tensor] | None = None,
) -> None:
    tensors: dict[str, torch.Tensor] = dict(model.state_dict())
    for name, tensor in (extra or {}).items():
        tensors[f"extra.{name}"] = tensor
    save_tensors(
        path,
        tensors,
        header_extra={
            "kind": "model",
            "config": model.config.to_dict(),
            "slots": list(model.slot_names),
            "vocab": list(model.vocab.tokens),
            "meta": meta or {},
        },
    )


def load_model(path: str | Path) -> tuple[TinyCausalLM, dict, dict[str, torch.Tensor]]:
    tensors, header = load_tensors(path)
    if header.get("kind") != "model":
        raise CheckpointError(f"{path} does not hold a model checkpoint")
    config = ModelConfig.from_dict(header["config"])
    vocab = Vocabulary(tuple(header["vocab"]))
    model = TinyCausalLM(config, vocab, seed=0)
    for slot in header["slots"]:
        model.add_slot(slot, seed=0)
    state = {n: t for n, t in tensors.items() if not n.startswith("extra.")}
    model.load_state_dict(state, strict=True)
    extra = {n[len("extra."):]: t for n, t in tensors.items() if n.startswith("extra.")}
    return model, header.get("meta", {}), extra
