"""Run configuration: a plain-text INI file with sections, overridable by
CLI flags. Every run directory embeds the fully resolved config so any
artifact can be reproduced from the directory alone."""
from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..kitchen.layouts import MAP_IDS
from ..kitchen.types import DishSpec
from ..model.net import LORA_TARGETS
from ..rl.trainer import RlConfig
from ..sft.pipeline import SftSettings

METHODS = ("verco", "verco_scripted", "no_comm", "symbolic_ppo")
TEACHERS = ("scripted", "http")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ModelSettings:
    d_model: int = 64
    n_layers: int = 2
    n_heads: int = 4
    context_length: int = 256
    mlp_ratio: int = 4
    adapter_rank: int = 4
    adapter_alpha: float = 8.0
    lora_targets: tuple[str, ...] = LORA_TARGETS
    value_hidden: int = 64


@dataclass
class RunConfig:
    map_id: str = "single_room"
    task: str = "tomato_salad"
    seeds: tuple[int, ...] = (0,)
    method: str = "verco"
    teacher: str = "scripted"
    teacher_endpoint: str = ""
    horizon: int = 100
    out_dir: str = "runs/default"
    eval_episodes: int = 20
    symbolic_hidden: int = 128
    checkpoint_interval: int = 20
    model: ModelSettings = field(default_factory=ModelSettings)
    sft: SftSettings = field(default_factory=SftSettings)
    rl: RlConfig = field(default_factory=RlConfig)

    def __post_init__(self) -> None:
        if self.map_id not in MAP_IDS:
            raise ConfigError(f"run.map_id must be one of {MAP_IDS}, got {self.map_id!r}")
        if self.method not in METHODS:
            raise ConfigError(f"run.method must be one of {METHODS}, got {self.method!r}")
        if self.teacher not in TEACHERS:
            raise ConfigError(f"run.teacher must be one of {TEACHERS}, got {self.teacher!r}")
        try:
            DishSpec(self.task)
        except ValueError:
            raise ConfigError(f"run.task {self.task!r} is not a known dish") from None
        if not self.seeds:
            raise ConfigError("run.seeds must list at least one seed")

    @property
    def dish(self) -> DishSpec:
        return DishSpec(self.task)

    def for_seed(self, seed: int) -> "RunConfig":
        return replace(self, seeds=(seed,))


def _write_section(cp: configparser.ConfigParser, name: str, values: dict) -> None:
    cp[name] = {}
    for key, value in values.items():
        if isinstance(value, (tuple, list)):
            cp[name][key] = ",".join(str(v) for v in value)
        else:
            cp[name][key] = str(value)


def to_ini(config: RunConfig) -> str:
    cp = configparser.ConfigParser()
    _write_section(
        cp,
        "run",
        {
            "map_id": config.map_id,
            "task": config.task,
            "seeds": config.seeds,
            "method": config.method,
            "teacher": config.teacher,
            "teacher_endpoint": config.teacher_endpoint,
            "horizon": config.horizon,
            "out_dir": config.out_dir,
            "eval_episodes": config.eval_episodes,
            "symbolic_hidden": config.symbolic_hidden,
            "checkpoint_interval": config.checkpoint_interval,
        },
    )
    m = config.model
    _write_section(
        cp,
        "model",
        {
            "d_model": m.d_model,
            "n_layers": m.n_layers,
            "n_heads": m.n_heads,
            "context_length": m.context_length,
            "mlp_ratio": m.mlp_ratio,
            "adapter_rank": m.adapter_rank,
            "adapter_alpha": m.adapter_alpha,
            "lora_targets": m.lora_targets,
            "value_hidden": m.value_hidden,
        },
    )
    s = config.sft
    _write_section(
        cp,
        "sft",
        {
            "episodes": s.episodes,
            "epochs": s.epochs,
            "batch_size": s.batch_size,
            "lr": s.lr,
            "capacity": s.capacity if s.capacity is not None else "none",
            "seed": s.seed,
        },
    )
    r = config.rl
    _write_section(
        cp,
        "rl",
        {
            "gamma": r.gamma,
            "gae_lambda": r.gae_lambda,
            "clip_eps": r.clip_eps,
            "critic_coef": r.critic_coef,
            "entropy_coef": r.entropy_coef,
            "epochs": r.epochs,
            "minibatch_size": r.minibatch_size,
            "lr": r.lr,
            "rollout_steps": r.rollout_steps,
            "total_env_steps": r.total_env_steps,
            "sample_actions": r.sample_actions,
            "token_norm": r.token_norm,
            "critic_clip_mode": r.critic_clip_mode,
            "seed": r.seed,
        },
    )
    out = io.StringIO()
    cp.write(out)
    return out.getvalue()


def _get(cp: configparser.ConfigParser, section: str, key: str, cast, default):
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key)
    try:
        if cast is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {section}.{key}: {raw!r} ({exc})") from None


def _int_tuple(raw: str) -> tuple[int, ...]:
    return tuple(int(part) for part in raw.split(",") if part.strip())


def _str_tuple(raw: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in raw.split(",") if part.strip())


def from_ini(text: str) -> RunConfig:
    cp = configparser.ConfigParser()
    cp.read_string(text)
    defaults = RunConfig()
    capacity_raw = _get(cp, "sft", "capacity", str, "none")
    return RunConfig(
        map_id=_get(cp, "run", "map_id", str, defaults.map_id),
        task=_get(cp, "run", "task", str, defaults.task),
        seeds=_get(cp, "run", "seeds", _int_tuple, defaults.seeds),
        method=_get(cp, "run", "method", str, defaults.method),
        teacher=_get(cp, "run", "teacher", str, defaults.teacher),
        teacher_endpoint=_get(cp, "run", "teacher_endpoint", str, ""),
        horizon=_get(cp, "run", "horizon", int, defaults.horizon),
        out_dir=_get(cp, "run", "out_dir", str, defaults.out_dir),
        eval_episodes=_get(cp, "run", "eval_episodes", int, defaults.eval_episodes),
        symbolic_hidden=_get(cp, "run", "symbolic_hidden", int, defaults.symbolic_hidden),
        checkpoint_interval=_get(cp, "run", "checkpoint_interval", int, defaults.checkpoint_interval),
        model=ModelSettings(
            d_model=_get(cp, "model", "d_model", int, 64),
            n_layers=_get(cp, "model", "n_layers", int, 2),
            n_heads=_get(cp, "model", "n_heads", int, 4),
            context_length=_get(cp, "model", "context_length", int, 256),
            mlp_ratio=_get(cp, "model", "mlp_ratio", int, 4),
            adapter_rank=_get(cp, "model", "adapter_rank", int, 4),
            adapter_alpha=_get(cp, "model", "adapter_alpha", float, 8.0),
            lora_targets=_get(cp, "model", "lora_targets", _str_tuple, LORA_TARGETS),
            value_hidden=_get(cp, "model", "value_hidden", int, 64),
        ),
        sft=SftSettings(
            episodes=_get(cp, "sft", "episodes", int, 20),
            epochs=_get(cp, "sft", "epochs", int, 40),
            batch_size=_get(cp, "sft", "batch_size", int, 16),
            lr=_get(cp, "sft", "lr", float, 1e-3),
            capacity=None if capacity_raw.lower() == "none" else int(capacity_raw),
            seed=_get(cp, "sft", "seed", int, 0),
        ),
        rl=RlConfig(
            gamma=_get(cp, "rl", "gamma", float, 0.99),
            gae_lambda=_get(cp, "rl", "gae_lambda", float, 0.95),
            clip_eps=_get(cp, "rl", "clip_eps", float, 0.2),
            critic_coef=_get(cp, "rl", "critic_coef", float, 0.5),
            entropy_coef=_get(cp, "rl", "entropy_coef", float, 0.01),
            epochs=_get(cp, "rl", "epochs", int, 4),
            minibatch_size=_get(cp, "rl", "minibatch_size", int, 32),
            lr=_get(cp, "rl", "lr", float, 1e-3),
            rollout_steps=_get(cp, "rl", "rollout_steps", int, 512),
            total_env_steps=_get(cp, "rl", "total_env_steps", int, 50_000),
            sample_actions=_get(cp, "rl", "sample_actions", bool, True),
            token_norm=_get(cp, "rl", "token_norm", bool, False),
            critic_clip_mode=_get(cp, "rl", "critic_clip_mode", str, "max"),
            seed=_get(cp, "rl", "seed", int, 0),
        ),
    )


def load_config(path: str | Path) -> RunConfig:
    return from_ini(Path(path).read_text(encoding="utf-8"))


def apply_overrides(config: RunConfig, overrides: list[str]) -> RunConfig:
    """Apply `section.key=value` strings on top of a config by round-tripping
    through the INI form."""
    cp = configparser.ConfigParser()
    cp.read_string(to_ini(config))
    for item in overrides:
        try:
            key, value = item.split("=", 1)
            section, option = key.strip().split(".", 1)
        except ValueError:
            raise ConfigError(
                f"override {item!r} is not of the form section.key=value"
            ) from None
        if not cp.has_section(section):
            raise ConfigError(f"unknown config section {section!r}")
        cp.set(section, option.strip(), value.strip())
    out = io.StringIO()
    cp.write(out)
    return from_ini(out.getvalue())
