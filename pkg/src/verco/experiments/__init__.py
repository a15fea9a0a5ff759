from .config import (
    ConfigError,
    METHODS,
    ModelSettings,
    RunConfig,
    apply_overrides,
    from_ini,
    load_config,
    to_ini,
)
from .plots import MetricSchemaError, load_run_series, plot_runs
from .replay import ReplayTranscript, StepRecord, record_episode
from .runner import (
    EvalSummary,
    RunPaths,
    build_model,
    evaluate_checkpoint,
    run_dir_for,
    run_training,
)

__all__ = [
    "ConfigError",
    "EvalSummary",
    "METHODS",
    "MetricSchemaError",
    "ModelSettings",
    "ReplayTranscript",
    "RunConfig",
    "RunPaths",
    "StepRecord",
    "apply_overrides",
    "build_model",
    "evaluate_checkpoint",
    "from_ini",
    "load_config",
    "load_run_series",
    "plot_runs",
    "record_episode",
    "run_dir_for",
    "run_training",
    "to_ini",
]
