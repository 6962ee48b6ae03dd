"""Evaluation harness: bid accuracy, winning shares and plot-data CSVs.

Every evaluation is a pure function of its agent specs, parameters and
seed.  Per-round generator pairs are derived from
``SeedSequence(seed, spawn_key=...)`` so results do not depend on how
work is partitioned, and the deal stream is separate from the agents'
stream so different agent mixes face identical deals.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from . import env
from .agents import parse_agent_spec

# two-sided 99% normal quantile used for all reported intervals
Z99 = 2.5758293035489004


def binomial_ci(hits, n):
    """Normal-approximation 99% interval for a binomial proportion."""
    p = hits / n
    half = Z99 * math.sqrt(p * (1.0 - p) / n)
    return (max(0.0, p - half), min(1.0, p + half))


def _rng_pair(seed, *key):
    """Deal and agent generators for one unit of evaluation work."""
    deal = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(*key, 0)))
    agent = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(*key, 1)))
    return deal, agent


def _resolve(spec):
    return parse_agent_spec(spec) if isinstance(spec, str) else spec


def _label(spec):
    return spec if isinstance(spec, str) else type(spec).__name__


@dataclass(frozen=True)
class PositionAccuracy:
    """Hit statistics for one bidding position (1 = bids first)."""

    position: int
    rounds: int
    hits: int
    accuracy: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class AccuracyReport:
    round_number: int
    rounds_per_position: int
    seed: int
    positions: tuple
    overall: PositionAccuracy


def _position_stats(position, hits, rounds):
    low, high = binomial_ci(hits, rounds)
    return PositionAccuracy(position, rounds, hits, hits / rounds, low, high)


def eval_accuracy(specs, round_number, rounds_per_position, seed):
    """Exact-bid rate of the first spec'd agent, by bidding position.

    The evaluated agent always occupies seat 0; the first bidder is
    chosen so that its bidding position sweeps 1..4, playing
    ``rounds_per_position`` rounds at each.
    """
    mix = [_resolve(s) for s in specs]
    position_stats = []
    total_hits = 0
    for j in range(4):
        first_bidder = (4 - j) % 4  # seat 0 bids at position j
        hits = 0
        for i in range(rounds_per_position):
            deal_rng, agent_rng = _rng_pair(seed, j, i)
            result = env.run_round(
                mix, round_number, first_bidder, deal_rng, agent_rng=agent_rng
            )
            hits += int(result.bids[0] == result.tricks_taken[0])
        total_hits += hits
        position_stats.append(_position_stats(j + 1, hits, rounds_per_position))

    overall = _position_stats(0, total_hits, 4 * rounds_per_position)
    return AccuracyReport(
        round_number, rounds_per_position, seed, tuple(position_stats), overall
    )


def winner_shares(totals):
    """Fractional game wins: tied leaders split the single win equally."""
    best = max(totals)
    winners = [i for i, t in enumerate(totals) if t == best]
    return [1.0 / len(winners) if i in winners else 0.0 for i in range(len(totals))]


@dataclass(frozen=True)
class WinShareReport:
    agents: tuple
    n_games: int
    max_round: int
    seed: int
    wins: tuple
    shares: tuple
    cis: tuple


def eval_winning_share(specs, n_games, max_round, seed):
    """Play full games (rounds 1..max_round) and split wins per game."""
    mix = [_resolve(s) for s in specs]
    wins = np.zeros(4)
    for g in range(n_games):
        deal_rng, agent_rng = _rng_pair(seed, g)
        first = int(deal_rng.integers(4))
        totals = np.zeros(4, dtype=np.int64)
        for r in range(1, max_round + 1):
            result = env.run_round(
                mix, r, (first + r - 1) % 4, deal_rng, agent_rng=agent_rng
            )
            totals += result.points
        wins += winner_shares(totals.tolist())

    shares = wins / n_games
    cis = tuple(binomial_ci(w, n_games) for w in wins)
    return WinShareReport(
        agents=tuple(_label(s) for s in specs),
        n_games=n_games,
        max_round=max_round,
        seed=seed,
        wins=tuple(float(w) for w in wins),
        shares=tuple(float(s) for s in shares),
        cis=cis,
    )


# ---------------------------------------------------------------------------
# Plot-data CSVs
# ---------------------------------------------------------------------------


def _write_rows(path, header, rows):
    tmp = str(path) + ".tmp"
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    os.replace(tmp, path)


def read_csv_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _accuracy_row(label, stats):
    return (
        label,
        stats.rounds,
        stats.hits,
        f"{stats.accuracy:.6f}",
        f"{stats.ci_low:.6f}",
        f"{stats.ci_high:.6f}",
    )


def write_accuracy_csv(report, path):
    """Accuracy by bidding position plus an overall row."""
    rows = [_accuracy_row(str(p.position), p) for p in report.positions]
    rows.append(_accuracy_row("all", report.overall))
    _write_rows(
        path, ("position", "rounds", "hits", "accuracy", "ci_low", "ci_high"), rows
    )


def write_round_curve_csv(reports, path):
    """Overall accuracy per round number, sorted by round."""
    rows = [
        (
            r,
            report.overall.rounds,
            report.overall.hits,
            f"{report.overall.accuracy:.6f}",
            f"{report.overall.ci_low:.6f}",
            f"{report.overall.ci_high:.6f}",
        )
        for r, report in sorted(reports.items())
    ]
    _write_rows(
        path,
        ("round_number", "rounds", "hits", "accuracy", "ci_low", "ci_high"),
        rows,
    )


def write_winshare_csv(report, path):
    rows = [
        (
            agent,
            report.n_games,
            f"{win:.6f}",
            f"{share:.6f}",
            f"{low:.6f}",
            f"{high:.6f}",
        )
        for agent, win, share, (low, high) in zip(
            report.agents, report.wins, report.shares, report.cis
        )
    ]
    _write_rows(path, ("agent", "games", "wins", "share", "ci_low", "ci_high"), rows)


# figure tag -> (output file name, required source columns)
PLOT_SCHEMAS = {
    "fig2": (
        "fig2_training_curve.csv",
        ("round_index", "epsilon", "loss", "window_accuracy"),
    ),
    "fig3": (
        "fig3_round_accuracy.csv",
        ("round_number", "rounds", "hits", "accuracy", "ci_low", "ci_high"),
    ),
    "fig4": (
        "fig4_position_accuracy.csv",
        ("position", "rounds", "hits", "accuracy", "ci_low", "ci_high"),
    ),
    "fig12": (
        "fig12_winning_share.csv",
        ("agent", "games", "wins", "share", "ci_low", "ci_high"),
    ),
}


def emit_plot_data(kind, source, out_dir):
    """Validate an evaluation CSV and republish it under its figure name."""
    if kind not in PLOT_SCHEMAS:
        raise ValueError(
            f"unknown plot kind {kind!r}; expected one of {sorted(PLOT_SCHEMAS)}"
        )
    name, header = PLOT_SCHEMAS[kind]
    with open(source, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != header:
        found = tuple(rows[0]) if rows else ()
        raise ValueError(
            f"source columns {found} do not match the {kind} schema {header}"
        )
    out_path = out_dir / name
    _write_rows(out_path, header, rows[1:])
    return out_path
