"""Training and evaluation orchestration for a single seed."""
from __future__ import annotations

import json
import logging
import os
import re
from dataclasses import dataclass
from pathlib import Path

import torch

from ..model.checkpoint import load_model, load_tensors, save_model, save_tensors
from ..model.net import ModelConfig, TinyCausalLM
from ..model.vocab import Vocabulary, build_default_vocabulary
from ..rl.buffer import RlBuffer
from ..rl.symbolic import SymbolicAgent, rollout_symbolic, update_symbolic
from ..rl.trainer import (
    PolicyMessenger,
    TeacherMessenger,
    VercoAgent,
    overall_update,
    rollout,
)
from ..sft.data import SftBuffer
from ..sft.pipeline import collect, greedy_label_accuracy, train_sft
from ..teacher.http_client import HttpTeacher, HttpTeacherConfig
from ..teacher.oracle import ScriptedTeacher
from .config import RunConfig, to_ini

logger = logging.getLogger(__name__)

TEACHER_ENDPOINT_ENV = "VERCO_TEACHER_ENDPOINT"


@dataclass
class RunPaths:
    root: Path

    @property
    def config_file(self) -> Path:
        return self.root / "config.ini"

    @property
    def metrics_file(self) -> Path:
        return self.root / "metrics.jsonl"

    @property
    def sft_buffer_file(self) -> Path:
        return self.root / "sft_buffer.jsonl"

    @property
    def checkpoint_dir(self) -> Path:
        return self.root / "checkpoints"

    @property
    def vocab_file(self) -> Path:
        return self.root / "vocab.txt"

    def checkpoint(self, name: str) -> Path:
        return self.checkpoint_dir / f"{name}.ckpt"


def run_dir_for(config: RunConfig, seed: int) -> RunPaths:
    return RunPaths(Path(config.out_dir) / f"seed_{seed}")


def _append_metrics(paths: RunPaths, row: dict) -> None:
    with open(paths.metrics_file, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(row) + "\n")


def _make_teacher(config: RunConfig, known_words: frozenset[str] | None = None):
    if config.teacher == "http":
        endpoint = os.environ.get(TEACHER_ENDPOINT_ENV, config.teacher_endpoint)
        if not endpoint:
            raise ValueError(
                f"teacher=http needs an endpoint ({TEACHER_ENDPOINT_ENV} or run.teacher_endpoint)"
            )
        return HttpTeacher(HttpTeacherConfig(endpoint=endpoint), known_words=known_words)
    return ScriptedTeacher()


def build_model(config: RunConfig, vocab: Vocabulary, seed: int) -> TinyCausalLM:
    m = config.model
    model_config = ModelConfig(
        vocab_size=len(vocab),
        d_model=m.d_model,
        n_layers=m.n_layers,
        n_heads=m.n_heads,
        context_length=m.context_length,
        mlp_ratio=m.mlp_ratio,
        adapter_rank=m.adapter_rank,
        adapter_alpha=m.adapter_alpha,
        lora_targets=m.lora_targets,
        value_hidden=m.value_hidden,
    )
    model = TinyCausalLM(model_config, vocab, seed=seed)
    model.add_slot("message", seed=seed + 1)
    model.add_slot("action", seed=seed + 2)
    return model


def _messenger_for(config: RunConfig, model: TinyCausalLM | None):
    if config.method == "verco":
        return PolicyMessenger(model, "message")
    if config.method == "verco_scripted":
        return TeacherMessenger(ScriptedTeacher())
    if config.method == "no_comm":
        return None
    raise ValueError(f"no messenger for method {config.method!r}")


def _latest_rl_checkpoint(paths: RunPaths) -> Path | None:
    final = paths.checkpoint("rl-final")
    if final.exists():
        return final
    best: tuple[int, Path] | None = None
    if paths.checkpoint_dir.exists():
        for file in paths.checkpoint_dir.glob("rl-*.ckpt"):
            match = re.fullmatch(r"rl-(\d+)", file.stem)
            if match:
                steps = int(match.group(1))
                if best is None or steps > best[0]:
                    best = (steps, file)
    return best[1] if best else None


def _adam_extra(optimizer: torch.optim.Adam) -> dict[str, torch.Tensor]:
    extra: dict[str, torch.Tensor] = {}
    for idx, param in enumerate(optimizer.param_groups[0]["params"]):
        state = optimizer.state.get(param)
        if not state:
            continue
        step = state["step"]
        extra[f"adam.{idx}.step"] = (
            step.detach().clone().float() if torch.is_tensor(step) else torch.tensor(float(step))
        )
        extra[f"adam.{idx}.exp_avg"] = state["exp_avg"].detach().clone()
        extra[f"adam.{idx}.exp_avg_sq"] = state["exp_avg_sq"].detach().clone()
    return extra


def _restore_adam(optimizer: torch.optim.Adam, extra: dict[str, torch.Tensor]) -> None:
    for idx, param in enumerate(optimizer.param_groups[0]["params"]):
        key = f"adam.{idx}.step"
        if key not in extra:
            continue
        optimizer.state[param] = {
            "step": extra[key].reshape(()),
            "exp_avg": extra[f"adam.{idx}.exp_avg"].reshape(param.shape),
            "exp_avg_sq": extra[f"adam.{idx}.exp_avg_sq"].reshape(param.shape),
        }


def _run_sft_phase(
    config: RunConfig, paths: RunPaths, model: TinyCausalLM, seed: int
) -> TinyCausalLM:
    sft_ckpt = paths.checkpoint("sft-final")
    if sft_ckpt.exists():
        logger.info("sft checkpoint exists; skipping the SFT phase")
        model, _, _ = load_model(sft_ckpt)
        return model

    vocab = model.vocab
    if paths.sft_buffer_file.exists():
        buffer = SftBuffer.load_jsonl(paths.sft_buffer_file, vocab, config.sft.capacity)
    else:
        teacher = _make_teacher(config, frozenset(t for t in vocab.tokens))
        buffer = collect(
            config.map_id,
            config.dish,
            teacher,
            model,
            action_slot="action",
            episodes=config.sft.episodes,
            horizon=config.horizon,
            seed=seed * 1_000_000,
            capacity=config.sft.capacity,
        )
        buffer.save_jsonl(paths.sft_buffer_file)
        _append_metrics(paths, {"kind": "sft_collect", "examples": len(buffer)})

    result = train_sft(
        model,
        buffer,
        slot="message",
        epochs=config.sft.epochs,
        batch_size=config.sft.batch_size,
        lr=config.sft.lr,
        seed=config.sft.seed + seed,
    )
    for i, loss in enumerate(result.losses):
        _append_metrics(paths, {"kind": "sft", "step": i, "loss": loss})
    accuracy = greedy_label_accuracy(model, buffer, slot="message")
    _append_metrics(
        paths,
        {"kind": "sft_summary", "final_loss": result.final_loss, "label_accuracy": accuracy},
    )
    save_model(model, sft_ckpt, meta=_ckpt_meta(config, seed, phase="sft", env_steps=0))
    return model


def _ckpt_meta(config: RunConfig, seed: int, phase: str, env_steps: int, **extra) -> dict:
    meta = {
        "phase": phase,
        "seed": seed,
        "env_steps": env_steps,
        "method": config.method,
        "map_id": config.map_id,
        "task": config.task,
        "horizon": config.horizon,
    }
    meta.update(extra)
    return meta


def run_training(config: RunConfig, seed: int) -> Path:
    """Execute the phases for one seed: (collect-SFT, train-SFT for verco),
    then RL; resumable from the latest checkpoint in the run directory."""
    paths = run_dir_for(config, seed)
    paths.checkpoint_dir.mkdir(parents=True, exist_ok=True)
    paths.config_file.write_text(to_ini(config.for_seed(seed)), encoding="utf-8")

    if config.method == "symbolic_ppo":
        return _run_symbolic_training(config, paths, seed)

    vocab = build_default_vocabulary()
    vocab.save(paths.vocab_file)
    model = build_model(config, vocab, seed)

    if config.method == "verco":
        model = _run_sft_phase(config, paths, model, seed)

    agent = VercoAgent(model, config.rl)
    env_steps = 0
    episodes = 0
    resume = _latest_rl_checkpoint(paths)
    if resume is not None:
        model, meta, extra = load_model(resume)
        agent = VercoAgent(model, config.rl)
        _restore_adam(agent.optimizer, extra)
        env_steps = int(meta["env_steps"])
        episodes = int(meta.get("episodes", 0))
        logger.info("resuming RL from %s at %d env steps", resume.name, env_steps)

    messenger = _messenger_for(config, model)
    updates = 0
    while env_steps < config.rl.total_env_steps:
        budget = min(config.rl.rollout_steps, config.rl.total_env_steps - env_steps)
        result = rollout(
            agent,
            config.map_id,
            config.dish,
            messenger,
            min_steps=budget,
            horizon=config.horizon,
            seed=seed * 1_000_000,
            episode_offset=episodes,
            env_step_offset=env_steps,
        )
        env_steps += result.env_steps
        episodes += len(result.metrics)
        for m in result.metrics:
            _append_metrics(
                paths,
                {
                    "kind": "episode",
                    "episode": m.episode,
                    "env_steps": m.env_steps,
                    "return": m.ret,
                    "length": m.length,
                    "entropy": m.entropy,
                },
            )
        diag = overall_update(agent, result.buffer)
        updates += 1
        _append_metrics(
            paths,
            {
                "kind": "update",
                "env_steps": env_steps,
                "policy_loss": diag.policy_loss,
                "critic_loss": diag.critic_loss,
                "entropy": diag.entropy,
                "total_loss": diag.total_loss,
            },
        )
        if updates % config.checkpoint_interval == 0:
            save_model(
                model,
                paths.checkpoint(f"rl-{env_steps}"),
                meta=_ckpt_meta(config, seed, "rl", env_steps, episodes=episodes),
                extra=_adam_extra(agent.optimizer),
            )
    save_model(
        model,
        paths.checkpoint("rl-final"),
        meta=_ckpt_meta(config, seed, "rl", env_steps, episodes=episodes),
        extra=_adam_extra(agent.optimizer),
    )
    return paths.root


def _run_symbolic_training(config: RunConfig, paths: RunPaths, seed: int) -> Path:
    agent = SymbolicAgent(config.rl, hidden=config.symbolic_hidden, seed=seed)
    env_steps = 0
    episodes = 0
    resume = _latest_rl_checkpoint(paths)
    if resume is not None:
        tensors, header = load_tensors(resume)
        agent.net.load_state_dict(
            {n[len("net."):]: t for n, t in tensors.items() if n.startswith("net.")}
        )
        _restore_adam(
            agent.optimizer, {n[len("extra."):]: t for n, t in tensors.items() if n.startswith("extra.")}
        )
        env_steps = int(header["meta"]["env_steps"])
        episodes = int(header["meta"].get("episodes", 0))

    updates = 0
    while env_steps < config.rl.total_env_steps:
        budget = min(config.rl.rollout_steps, config.rl.total_env_steps - env_steps)
        result = rollout_symbolic(
            agent,
            config.map_id,
            config.dish,
            min_steps=budget,
            horizon=config.horizon,
            seed=seed * 1_000_000,
            episode_offset=episodes,
            env_step_offset=env_steps,
        )
        env_steps += result.env_steps
        episodes += len(result.metrics)
        for m in result.metrics:
            _append_metrics(
                paths,
                {
                    "kind": "episode",
                    "episode": m.episode,
                    "env_steps": m.env_steps,
                    "return": m.ret,
                    "length": m.length,
                    "entropy": m.entropy,
                },
            )
        diag = update_symbolic(agent, result.buffer)
        updates += 1
        _append_metrics(
            paths,
            {
                "kind": "update",
                "env_steps": env_steps,
                "policy_loss": diag.policy_loss,
                "critic_loss": diag.critic_loss,
                "entropy": diag.entropy,
                "total_loss": diag.total_loss,
            },
        )
        if updates % config.checkpoint_interval == 0:
            _save_symbolic(agent, paths.checkpoint(f"rl-{env_steps}"), config, seed, env_steps, episodes)
    _save_symbolic(agent, paths.checkpoint("rl-final"), config, seed, env_steps, episodes)
    return paths.root


def _save_symbolic(
    agent: SymbolicAgent, path: Path, config: RunConfig, seed: int, env_steps: int, episodes: int
) -> None:
    tensors = {f"net.{n}": t for n, t in agent.net.state_dict().items()}
    for name, tensor in _adam_extra(agent.optimizer).items():
        tensors[f"extra.{name}"] = tensor
    save_tensors(
        path,
        tensors,
        header_extra={
            "kind": "symbolic",
            "hidden": config.symbolic_hidden,
            "meta": _ckpt_meta(config, seed, "rl", env_steps, episodes=episodes),
        },
    )


@dataclass
class EvalSummary:
    episodes: int
    mean_return: float
    q25_return: float
    median_return: float
    q75_return: float
    mean_length: float
    mean_entropy: float

    def to_dict(self) -> dict:
        return {
            "episodes": self.episodes,
            "mean_return": self.mean_return,
            "q25_return": self.q25_return,
            "median_return": self.median_return,
            "q75_return": self.q75_return,
            "mean_length": self.mean_length,
            "mean_entropy": self.mean_entropy,
        }


def _quantile(sorted_values: list[float], q: float) -> float:
    if not sorted_values:
        return float("nan")
    pos = q * (len(sorted_values) - 1)
    lo = int(pos)
    hi = min(lo + 1, len(sorted_values) - 1)
    frac = pos - lo
    return sorted_values[lo] * (1 - frac) + sorted_values[hi] * frac


def _eval_rl_config() -> "RlConfig":
    from ..rl.trainer import RlConfig

    return RlConfig(sample_actions=False)


def evaluate_checkpoint(
    checkpoint: str | Path, episodes: int, seed: int, method: str | None = None
) -> EvalSummary:
    """Greedy evaluation of a trained checkpoint: mean/quartile return, mean
    episode length, mean policy entropy."""
    checkpoint = Path(checkpoint)
    if not checkpoint.exists():
        raise FileNotFoundError(f"checkpoint {checkpoint} does not exist")
    _, header = load_tensors(checkpoint)
    if header.get("kind") == "symbolic":
        return _evaluate_symbolic(checkpoint, header, episodes, seed)

    model, meta, _ = load_model(checkpoint)
    method = method or meta.get("method", "verco")
    config = RunConfig(
        map_id=meta["map_id"], task=meta["task"], method=method, horizon=meta["horizon"]
    )
    agent = VercoAgent(model, _eval_rl_config())
    messenger = _messenger_for(config, model)
    result = rollout(
        agent,
        config.map_id,
        config.dish,
        messenger,
        min_steps=episodes * meta["horizon"],
        horizon=meta["horizon"],
        seed=seed * 7_000_000,
        greedy=True,
        max_episodes=episodes,
    )
    return _summarize(result.metrics)


def _evaluate_symbolic(checkpoint: Path, header: dict, episodes: int, seed: int) -> EvalSummary:
    tensors, _ = load_tensors(checkpoint)
    meta = header["meta"]
    agent = SymbolicAgent(_eval_rl_config(), hidden=header.get("hidden", 128), seed=0)
    agent.net.load_state_dict(
        {n[len("net."):]: t for n, t in tensors.items() if n.startswith("net.")}
    )
    from ..kitchen.types import DishSpec

    result = rollout_symbolic(
        agent,
        meta["map_id"],
        DishSpec(meta["task"]),
        min_steps=episodes * meta["horizon"],
        horizon=meta["horizon"],
        seed=seed * 7_000_000,
        greedy=True,
        max_episodes=episodes,
    )
    return _summarize(result.metrics)


def _summarize(metrics) -> EvalSummary:
    if not metrics:
        raise ValueError("no evaluation episodes produced")
    returns = sorted(m.ret for m in metrics)
    return EvalSummary(
        episodes=len(metrics),
        mean_return=sum(returns) / len(returns),
        q25_return=_quantile(returns, 0.25),
        median_return=_quantile(returns, 0.5),
        q75_return=_quantile(returns, 0.75),
        mean_length=sum(m.length for m in metrics) / len(metrics),
        mean_entropy=sum(m.entropy for m in metrics) / len(metrics),
    )
