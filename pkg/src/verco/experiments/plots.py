"""Training-curve plots: return, episode length, and policy entropy versus
environment steps, with an inter-quartile band across seeds."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .config import load_config

EPISODE_KEYS = {"kind", "episode", "env_steps", "return", "length", "entropy"}
METRICS = (("return", "return"), ("length", "episode length"), ("entropy", "policy entropy"))


class MetricSchemaError(ValueError):
    pass


@dataclass
class RunSeries:
    run_dir: Path
    method: str
    seed: int
    env_steps: np.ndarray
    values: dict[str, np.ndarray]


def load_run_series(run_dir: str | Path) -> RunSeries:
    run_dir = Path(run_dir)
    config = load_config(run_dir / "config.ini")
    rows = []
    with open(run_dir / "metrics.jsonl", encoding="utf-8") as fh:
        for line in fh:
            row = json.loads(line)
            if row.get("kind") == "episode":
                rows.append(row)
    if not rows:
        raise MetricSchemaError(f"{run_dir} has no episode metric rows")
    for row in rows:
        if set(row) != EPISODE_KEYS:
            raise MetricSchemaError(
                f"{run_dir} episode row keys {sorted(row)} != expected {sorted(EPISODE_KEYS)}"
            )
    return RunSeries(
        run_dir=run_dir,
        method=config.method,
        seed=config.seeds[0],
        env_steps=np.array([r["env_steps"] for r in rows], dtype=np.float64),
        values={
            "return": np.array([r["return"] for r in rows], dtype=np.float64),
            "length": np.array([r["length"] for r in rows], dtype=np.float64),
            "entropy": np.array([r["entropy"] for r in rows], dtype=np.float64),
        },
    )


def _bin_series(series: RunSeries, grid: np.ndarray, metric: str) -> np.ndarray:
    """Mean metric per grid bin, carrying the last value through empty bins."""
    out = np.full(len(grid) - 1, np.nan)
    idx = np.digitize(series.env_steps, grid) - 1
    for b in range(len(grid) - 1):
        mask = idx == b
        if mask.any():
            out[b] = series.values[metric][mask].mean()
    valid = np.flatnonzero(~np.isnan(out))
    if valid.size == 0:
        raise MetricSchemaError(f"{series.run_dir} metrics never intersect the plot grid")
    out[: valid[0]] = out[valid[0]]
    last = out[valid[0]]
    for b in range(len(out)):
        if np.isnan(out[b]):
            out[b] = last
        else:
            last = out[b]
    return out


def plot_runs(run_dirs: list[str | Path], out_dir: str | Path, bins: int = 40) -> list[Path]:
    """Emit return/length/entropy curves (median + 25-75% band per method)."""
    series = [load_run_series(d) for d in run_dirs]
    if not series:
        raise ValueError("no run directories given")
    max_steps = max(float(s.env_steps.max()) for s in series)
    grid = np.linspace(0.0, max_steps, bins + 1)
    centers = (grid[:-1] + grid[1:]) / 2
    by_method: dict[str, list[RunSeries]] = {}
    for s in series:
        by_method.setdefault(s.method, []).append(s)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for metric, label in METRICS:
        fig, ax = plt.subplots(figsize=(6, 4))
        for method, runs in sorted(by_method.items()):
            stacked = np.stack([_bin_series(r, grid, metric) for r in runs])
            median = np.nanmedian(stacked, axis=0)
            q25 = np.nanpercentile(stacked, 25, axis=0)
            q75 = np.nanpercentile(stacked, 75, axis=0)
            ax.plot(centers, median, label=f"{method} (n={len(runs)})")
            ax.fill_between(centers, q25, q75, alpha=0.2)
        ax.set_xlabel("environment steps")
        ax.set_ylabel(label)
        ax.legend()
        fig.tight_layout()
        path = out_dir / f"{metric}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
