"""Training orchestration: self-play DQN, retraining, auxiliary stages.

Each stage is a pure function of ``(config, seed)``: given the same
arguments it produces byte-identical checkpoints and CSV logs.  Training
curves are logged as windowed averages — one row per ``log_every``
rounds with the round index, current exploration rate, mean TD loss
observed in the window and the window's bid-accuracy.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dqn, env
from .agents import DqnAgent, RandomAgent, parse_agent_spec
from .dqn import DqnLearner, DqnPolicy, ReplayBuffer
from .history import (
    HISTORY_BUFFER_CAPACITY,
    DqnHistAgent,
    HistoryEncoder,
    generate_history_dataset,
    train_history,
)
from .state_model import (
    ESTIMATOR_BATCH_SIZE,
    ESTIMATOR_BUFFER_CAPACITY,
    ESTIMATOR_LEARNING_RATE,
    EstimatorBuffer,
    EstimatorLearner,
    StateEstimator,
    generate_estimator_samples,
)

RETRAIN_EPSILON_START = 0.3
LOG_EVERY = 4_000


@dataclass
class TrainConfig:
    """Hyperparameters of one DQN training run for a single round number."""

    round_number: int
    total_rounds: int = 200_000
    hidden: tuple = dqn.HIDDEN_LAYERS
    bid_buffer: int = dqn.BID_BUFFER_CAPACITY
    play_buffer: int = dqn.PLAY_BUFFER_CAPACITY
    batch_size: int = dqn.BATCH_SIZE
    learning_rate: float = dqn.LEARNING_RATE
    gamma: float = dqn.GAMMA
    tau: float = dqn.TAU
    train_every: int = dqn.TRAIN_EVERY
    blend_every: int = dqn.BLEND_EVERY
    epsilon_start: float = 1.0
    epsilon_end: float = 0.01
    epsilon_fraction: float = 0.9
    log_every: int = LOG_EVERY
    checkpoint_every: int | None = None


@dataclass
class TrainResult:
    policy: DqnPolicy
    checkpoint_path: Path
    csv_path: Path
    rows: list = field(default_factory=list)


@dataclass
class StageResult:
    model: object
    checkpoint_path: Path
    csv_path: Path
    losses: list


def _write_csv(path, header, rows):
    """Atomically write rows with deterministic formatting."""
    tmp = str(path) + ".tmp"
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    os.replace(tmp, path)


def _fmt(value):
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return f"{value:.6f}"


def _train_loop(config, policy, mix, learn_seats, rng, out_dir, stem, quiet):
    """Shared self-play loop: run rounds, feed buffers, log windows."""
    r = config.round_number
    history_size = policy.history_size
    bid_buffer = ReplayBuffer(config.bid_buffer, env.BIDDING_OBS_DIM, r + 1)
    play_buffer = ReplayBuffer(
        config.play_buffer, env.PLAYING_OBS_DIM + history_size, env.PLAY_ACTIONS
    )
    learner_args = dict(
        learning_rate=config.learning_rate,
        gamma=config.gamma,
        batch_size=config.batch_size,
        tau=config.tau,
        train_every=config.train_every,
        blend_every=config.blend_every,
    )
    bid_learner = DqnLearner(policy.bid_net(r), bid_buffer, rng, **learner_args)
    play_learner = DqnLearner(policy.play_net(r), play_buffer, rng, **learner_args)

    checkpoint_path = out_dir / f"{stem}.ckpt"
    csv_path = out_dir / f"{stem}.csv"
    rows = []
    window_hits = window_rounds = 0
    window_losses = []

    for t in range(config.total_rounds):
        eps = dqn.epsilon(
            t,
            config.total_rounds,
            config.epsilon_start,
            config.epsilon_end,
            config.epsilon_fraction,
        )
        for seat in learn_seats:
            mix[seat].epsilon = eps
        first = int(rng.integers(4))
        result = env.run_round(mix, r, first, rng, collect=learn_seats)
        for seat in learn_seats:
            bid_buffer.add(result.bid_transitions[seat])
            for transition in result.play_transitions[seat]:
                play_buffer.add(transition)
            window_hits += int(result.bids[seat] == result.tricks_taken[seat])
            window_rounds += 1

        for learner in (bid_learner, play_learner):
            loss = learner.maybe_update(t + 1)
            if loss is not None:
                window_losses.append(loss)

        if (t + 1) % config.log_every == 0:
            loss = float(np.mean(window_losses)) if window_losses else None
            accuracy = window_hits / window_rounds
            rows.append((t + 1, _fmt(eps), _fmt(loss), _fmt(accuracy)))
            if not quiet:
                print(
                    f"round {t + 1}/{config.total_rounds} eps={eps:.3f} "
                    f"loss={_fmt(loss) or 'n/a'} accuracy={accuracy:.3f}"
                )
            window_hits = window_rounds = 0
            window_losses = []

        if config.checkpoint_every and (t + 1) % config.checkpoint_every == 0:
            policy.save(checkpoint_path)

    policy.save(checkpoint_path)
    _write_csv(csv_path, ("round_index", "epsilon", "loss", "window_accuracy"), rows)
    return TrainResult(policy, checkpoint_path, csv_path, rows)


def self_play_train(config, seed, out_dir, encoder=None, quiet=True):
    """Train one round's bid/play nets by four-seat shared self-play.

    With ``encoder`` the playing observation is augmented by the LSTM
    cell state and all four seats track the public history.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    r = config.round_number

    history_size = encoder.hidden_size if encoder is not None else 0
    policy = DqnPolicy(hidden=tuple(config.hidden), history_size=history_size)
    policy.ensure_round(r, rng)
    if encoder is not None:
        mix = [DqnHistAgent(policy, encoder) for _ in range(4)]
    else:
        mix = [DqnAgent(policy) for _ in range(4)]
    return _train_loop(
        config, policy, mix, (0, 1, 2, 3), rng, out_dir, f"dqn_r{r:02d}", quiet
    )


def retrain_vs(config, checkpoint, opponent_specs, seed, out_dir, quiet=True):
    """Continue training a saved policy against fixed opponents.

    The policy occupies the first ``4 - len(opponent_specs)`` seats; the
    remaining seats are filled from the given agent specs.  Start from a
    reduced exploration rate (``RETRAIN_EPSILON_START``) since the
    warm-started policy is already competent.
    """
    if not 1 <= len(opponent_specs) <= 3:
        raise ValueError("retraining needs between one and three opponents")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    r = config.round_number

    policy = DqnPolicy.from_checkpoint(checkpoint)
    if r not in policy.rounds():
        raise ValueError(f"checkpoint has no nets for round {r}")
    if policy.history_size:
        raise ValueError("retraining a history-augmented policy is not supported")

    k = 4 - len(opponent_specs)
    mix = [DqnAgent(policy) for _ in range(k)]
    mix += [parse_agent_spec(spec) for spec in opponent_specs]
    return _train_loop(
        config, policy, mix, tuple(range(k)), rng, out_dir, f"retrain_r{r:02d}", quiet
    )


def _data_agents(policy):
    """Dataset-generation seats: the trained policy if given, else random."""
    if policy is None:
        return [RandomAgent() for _ in range(4)]
    return [DqnAgent(policy) for _ in range(4)]


def train_history_stage(
    round_number,
    hidden_size,
    n_rounds,
    epochs,
    seed,
    out_dir,
    policy=None,
    batch_size=None,
    learning_rate=None,
):
    """Generate a play-history dataset and fit an encoder on it."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    data = generate_history_dataset(_data_agents(policy), round_number, n_rounds, rng)
    data = data[-HISTORY_BUFFER_CAPACITY:]
    encoder = HistoryEncoder(hidden_size, rng)
    kwargs = {}
    if batch_size is not None:
        kwargs["batch_size"] = batch_size
    if learning_rate is not None:
        kwargs["learning_rate"] = learning_rate
    losses = train_history(encoder, data, epochs, rng, **kwargs)

    stem = f"hist_r{round_number:02d}_h{hidden_size}"
    checkpoint_path = out_dir / f"{stem}.ckpt"
    csv_path = out_dir / f"{stem}.csv"
    encoder.save(checkpoint_path)
    _write_csv(
        csv_path,
        ("epoch", "loss"),
        [(i + 1, f"{loss:.8f}") for i, loss in enumerate(losses)],
    )
    return StageResult(encoder, checkpoint_path, csv_path, losses)


def train_estimator_stage(
    round_number,
    n_rounds,
    steps,
    seed,
    out_dir,
    policy=None,
    batch_size=ESTIMATOR_BATCH_SIZE,
    learning_rate=ESTIMATOR_LEARNING_RATE,
    buffer_capacity=ESTIMATOR_BUFFER_CAPACITY,
):
    """Generate labelled decision points and fit the state estimator."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    obs, locations = generate_estimator_samples(
        _data_agents(policy), round_number, n_rounds, rng
    )
    buffer = EstimatorBuffer(buffer_capacity, obs.shape[1])
    for o, l in zip(obs, locations):
        buffer.add(o, l)

    estimator = StateEstimator(input_dim=obs.shape[1], rng=rng)
    learner = EstimatorLearner(
        estimator,
        buffer,
        rng,
        learning_rate=learning_rate,
        batch_size=min(batch_size, len(buffer)),
    )
    losses = []
    for _ in range(steps):
        losses.append(learner.train_step())

    stem = f"estimator_r{round_number:02d}"
    checkpoint_path = out_dir / f"{stem}.ckpt"
    csv_path = out_dir / f"{stem}.csv"
    estimator.save(checkpoint_path)
    _write_csv(
        csv_path,
        ("step", "loss"),
        [(i + 1, f"{loss:.8f}") for i, loss in enumerate(losses)],
    )
    return StageResult(estimator, checkpoint_path, csv_path, losses)
