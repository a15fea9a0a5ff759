"""Command-line entry point: train, eval, replay, plot."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .experiments.config import ConfigError, RunConfig, apply_overrides, load_config
from .experiments.plots import plot_runs
from .experiments.replay import ReplayTranscript, record_episode
from .experiments.runner import evaluate_checkpoint, run_training


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="run config INI file (defaults apply if omitted)")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override a config value; repeatable",
    )


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    if args.overrides:
        config = apply_overrides(config, args.overrides)
    return config


def cmd_train(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    seeds = [args.seed] if args.seed is not None else list(config.seeds)
    for seed in seeds:
        run_dir = run_training(config, seed)
        print(f"seed {seed}: finished -> {run_dir}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    summary = evaluate_checkpoint(args.checkpoint, episodes=args.episodes, seed=args.seed)
    print(json.dumps(summary.to_dict(), indent=2))
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    transcript = record_episode(args.checkpoint, seed=args.seed, episodes=args.episodes)
    transcript.write(args.out)
    if args.validate:
        ReplayTranscript.read(args.out).validate()
        print(f"wrote and validated {args.out}")
    else:
        print(f"wrote {args.out}")
    return 0


def cmd_plot(args: argparse.Namespace) -> int:
    written = plot_runs(args.runs, args.out, bins=args.bins)
    for path in written:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="verco",
        description="Verbal-communication multi-agent RL in a textual kitchen.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run SFT and RL phases for the configured seeds")
    _add_config_args(p_train)
    p_train.add_argument("--seed", type=int, help="train only this seed")
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="greedy evaluation of a checkpoint")
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("--episodes", type=int, default=20)
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.set_defaults(func=cmd_eval)

    p_replay = sub.add_parser("replay", help="export a replay transcript")
    p_replay.add_argument("--checkpoint", required=True)
    p_replay.add_argument("--seed", type=int, default=0)
    p_replay.add_argument("--episodes", type=int, default=1)
    p_replay.add_argument("--out", required=True)
    p_replay.add_argument("--validate", action="store_true", help="re-simulate and verify")
    p_replay.set_defaults(func=cmd_replay)

    p_plot = sub.add_parser("plot", help="emit return/length/entropy curve images")
    p_plot.add_argument("--runs", nargs="+", required=True, help="run directories")
    p_plot.add_argument("--out", required=True, help="output directory")
    p_plot.add_argument("--bins", type=int, default=40)
    p_plot.set_defaults(func=cmd_plot)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
