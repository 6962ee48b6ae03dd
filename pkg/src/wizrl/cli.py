"""Command-line entry point.

Settings resolve in three layers: built-in defaults, then values from a
``--config`` file (``[subcommand]`` or ``[global]`` sections), then
explicit flags.  ``--seed`` is mandatory for every training and
evaluation command so runs are reproducible by construction.  All input
and output paths are explicit — nothing is discovered implicitly.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from types import SimpleNamespace

from . import checkpoint, evaluation, training
from .config import ConfigError, lookup, parse_config
from .dqn import DqnPolicy
from .history import HistoryEncoder, final_loss


def _positive_int(text):
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def parse_rounds(text):
    """Parse a round selection: ``3`` or ``1..5`` (inclusive)."""
    parts = str(text).split("..")
    try:
        if len(parts) == 1:
            lo = hi = int(parts[0])
        elif len(parts) == 2:
            lo, hi = int(parts[0]), int(parts[1])
        else:
            raise ValueError
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected N or A..B for rounds, got {text!r}"
        ) from None
    if not 1 <= lo <= hi <= 15:
        raise argparse.ArgumentTypeError(f"rounds must lie within 1..15, got {text!r}")
    return list(range(lo, hi + 1))


def parse_specs(text):
    specs = [part.strip() for part in str(text).split(",") if part.strip()]
    if not specs:
        raise argparse.ArgumentTypeError("expected a comma-separated agent list")
    return specs


def parse_bool(text):
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


# Options shared by every subcommand (the `--config` path itself is
# consumed before resolution).
GLOBAL_OPTIONS = [
    ("seed", int, None),
    ("out", str, "."),
    ("rounds", parse_rounds, None),
    ("quiet", parse_bool, False),
    ("workers", _positive_int, 1),
]

COMMAND_OPTIONS = {
    "train-dqn": [
        ("total_rounds", _positive_int, 200_000),
        ("log_every", _positive_int, training.LOG_EVERY),
        ("checkpoint_every", _positive_int, None),
        ("epsilon_start", float, 1.0),
        ("history_encoder", str, None),
    ],
    "retrain": [
        ("checkpoint", str, None),
        ("opponents", parse_specs, ["random", "random", "random"]),
        ("total_rounds", _positive_int, 200_000),
        ("log_every", _positive_int, training.LOG_EVERY),
        ("epsilon_start", float, training.RETRAIN_EPSILON_START),
    ],
    "train-history": [
        ("hidden", _positive_int, 150),
        ("data_rounds", _positive_int, 10_000),
        ("epochs", _positive_int, 500),
        ("batch_size", _positive_int, None),
        ("learning_rate", float, None),
        ("policy", str, None),
    ],
    "train-estimator": [
        ("data_rounds", _positive_int, 10_000),
        ("steps", _positive_int, 5_000),
        ("batch_size", _positive_int, 1024),
        ("learning_rate", float, 0.001),
        ("policy", str, None),
    ],
    "eval-accuracy": [
        ("agents", parse_specs, None),
        ("rounds_per_position", _positive_int, 10_000),
    ],
    "eval-winshare": [
        ("agents", parse_specs, None),
        ("games", _positive_int, 1000),
        ("max_round", _positive_int, 15),
    ],
    "inspect-checkpoint": [
        ("path", str, None),
    ],
    "gen-plot-data": [
        ("kind", str, None),
        ("source", str, None),
    ],
}

_SEEDLESS = {"inspect-checkpoint", "gen-plot-data"}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="wizrl", description="Wizard self-play training and evaluation"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command, options in COMMAND_OPTIONS.items():
        p = sub.add_parser(command)
        p.add_argument("--config", default=None, help="settings file")
        for name, conv, _default in GLOBAL_OPTIONS:
            if name == "quiet":
                p.add_argument("--quiet", action="store_true", default=None)
            else:
                p.add_argument(f"--{name.replace('_', '-')}", type=conv, default=None)
        for name, conv, _default in options:
            if command == "inspect-checkpoint" and name == "path":
                p.add_argument("path", nargs="?", default=None)
            else:
                p.add_argument(f"--{name.replace('_', '-')}", type=conv, default=None)
    return parser


def _known_keys():
    keys = {name for name, _, _ in GLOBAL_OPTIONS}
    for options in COMMAND_OPTIONS.values():
        keys.update(name for name, _, _ in options)
    return keys


def validate_config(cfg):
    known_sections = set(COMMAND_OPTIONS) | {"global"}
    known_keys = _known_keys()
    for section, entries in cfg.items():
        if section not in known_sections:
            raise ConfigError(f"unknown config section '{section}'")
        for key in entries:
            if key not in known_keys:
                raise ConfigError(f"unknown config key '{key}' in section '{section}'")


def resolve_settings(command, args, cfg):
    """Merge defaults, config file values and explicit flags."""
    merged = {}
    for name, conv, default in GLOBAL_OPTIONS + COMMAND_OPTIONS[command]:
        value = getattr(args, name, None)
        if value is None:
            raw = lookup(cfg, command, name)
            if raw is not None:
                try:
                    value = conv(raw)
                except (ValueError, argparse.ArgumentTypeError) as exc:
                    raise ConfigError(f"config key '{name}': {exc}") from None
        if value is None:
            value = default
        merged[name] = value
    return SimpleNamespace(**merged)


def _require(settings, name, command):
    value = getattr(settings, name)
    if value is None:
        raise ConfigError(f"--{name.replace('_', '-')} is required for {command}")
    return value


def _merge_policies(results, path):
    combined = DqnPolicy()
    for result in results:
        for r in result.policy.rounds():
            combined.set_nets(r, result.policy.bid_net(r), result.policy.play_net(r))
    combined.save(path)
    return path


def cmd_train_dqn(s):
    rounds = _require(s, "rounds", "train-dqn")
    seed = _require(s, "seed", "train-dqn")
    out = Path(s.out)
    encoder = (
        HistoryEncoder.from_checkpoint(s.history_encoder) if s.history_encoder else None
    )
    results = []
    for r in rounds:
        cfg = training.TrainConfig(
            round_number=r,
            total_rounds=s.total_rounds,
            log_every=s.log_every,
            checkpoint_every=s.checkpoint_every,
            epsilon_start=s.epsilon_start,
        )
        result = training.self_play_train(cfg, seed, out, encoder=encoder, quiet=s.quiet)
        results.append(result)
        print(f"round {r}: checkpoint {result.checkpoint_path}, log {result.csv_path}")
    if len(results) > 1:
        merged = _merge_policies(results, out / "dqn_all.ckpt")
        print(f"merged checkpoint {merged}")
    return 0


def cmd_retrain(s):
    rounds = _require(s, "rounds", "retrain")
    seed = _require(s, "seed", "retrain")
    ckpt = _require(s, "checkpoint", "retrain")
    out = Path(s.out)
    for r in rounds:
        cfg = training.TrainConfig(
            round_number=r,
            total_rounds=s.total_rounds,
            log_every=s.log_every,
            epsilon_start=s.epsilon_start,
        )
        result = training.retrain_vs(cfg, ckpt, s.opponents, seed, out, quiet=s.quiet)
        print(f"round {r}: checkpoint {result.checkpoint_path}, log {result.csv_path}")
    return 0


def cmd_train_history(s):
    rounds = _require(s, "rounds", "train-history")
    seed = _require(s, "seed", "train-history")
    policy = DqnPolicy.from_checkpoint(s.policy) if s.policy else None
    for r in rounds:
        result = training.train_history_stage(
            round_number=r,
            hidden_size=s.hidden,
            n_rounds=s.data_rounds,
            epochs=s.epochs,
            seed=seed,
            out_dir=Path(s.out),
            policy=policy,
            batch_size=s.batch_size,
            learning_rate=s.learning_rate,
        )
        final = final_loss(result.losses)
        print(f"round {r}: checkpoint {result.checkpoint_path}, final loss {final:.6f}")
    return 0


def cmd_train_estimator(s):
    rounds = _require(s, "rounds", "train-estimator")
    seed = _require(s, "seed", "train-estimator")
    policy = DqnPolicy.from_checkpoint(s.policy) if s.policy else None
    for r in rounds:
        result = training.train_estimator_stage(
            round_number=r,
            n_rounds=s.data_rounds,
            steps=s.steps,
            seed=seed,
            out_dir=Path(s.out),
            policy=policy,
            batch_size=s.batch_size,
            learning_rate=s.learning_rate,
        )
        print(
            f"round {r}: checkpoint {result.checkpoint_path}, "
            f"last loss {result.losses[-1]:.6f}"
        )
    return 0


def cmd_eval_accuracy(s):
    rounds = _require(s, "rounds", "eval-accuracy")
    seed = _require(s, "seed", "eval-accuracy")
    agents = _require(s, "agents", "eval-accuracy")
    if len(agents) != 4:
        raise ConfigError(f"--agents needs exactly four specs, got {len(agents)}")
    out = Path(s.out)
    out.mkdir(parents=True, exist_ok=True)
    reports = {}
    for r in rounds:
        report = evaluation.eval_accuracy(agents, r, s.rounds_per_position, seed)
        reports[r] = report
        path = out / f"accuracy_r{r:02d}.csv"
        evaluation.write_accuracy_csv(report, path)
        print(f"round {r}: accuracy {report.overall.accuracy:.4f} -> {path}")
    if len(reports) > 1:
        curve = out / "round_curve.csv"
        evaluation.write_round_curve_csv(reports, curve)
        print(f"round curve -> {curve}")
    return 0


def cmd_eval_winshare(s):
    seed = _require(s, "seed", "eval-winshare")
    agents = _require(s, "agents", "eval-winshare")
    if len(agents) != 4:
        raise ConfigError(f"--agents needs exactly four specs, got {len(agents)}")
    out = Path(s.out)
    out.mkdir(parents=True, exist_ok=True)
    report = evaluation.eval_winning_share(agents, s.games, s.max_round, seed)
    path = out / "winshare.csv"
    evaluation.write_winshare_csv(report, path)
    shares = ", ".join(f"{a}={v:.3f}" for a, v in zip(report.agents, report.shares))
    print(f"winning shares over {s.games} games: {shares} -> {path}")
    return 0


def cmd_inspect_checkpoint(s):
    path = _require(s, "path", "inspect-checkpoint")
    entries = checkpoint.inspect_checkpoint(path)
    # inspect_checkpoint re-verifies the trailing checksum; reaching this
    # point means the file matched its stored digest.
    print(f"format {checkpoint.MAGIC.strip().decode()}, checksum ok")
    total = 0
    for entry in entries:
        shape = "x".join(str(d) for d in entry.shape) or "scalar"
        print(f"{entry.name}  {shape}  ({entry.size} values)")
        total += entry.size
    print(f"{len(entries)} tensors, {total} values")
    return 0


def cmd_gen_plot_data(s):
    kind = _require(s, "kind", "gen-plot-data")
    source = _require(s, "source", "gen-plot-data")
    out = Path(s.out)
    out.mkdir(parents=True, exist_ok=True)
    path = evaluation.emit_plot_data(kind, source, out)
    print(f"{kind} -> {path}")
    return 0


HANDLERS = {
    "train-dqn": cmd_train_dqn,
    "retrain": cmd_retrain,
    "train-history": cmd_train_history,
    "train-estimator": cmd_train_estimator,
    "eval-accuracy": cmd_eval_accuracy,
    "eval-winshare": cmd_eval_winshare,
    "inspect-checkpoint": cmd_inspect_checkpoint,
    "gen-plot-data": cmd_gen_plot_data,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args.config) if args.config else {}
        validate_config(cfg)
        settings = resolve_settings(args.command, args, cfg)
        return HANDLERS[args.command](settings)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
