"""The policy zoo: random, rule-based heuristic, and DQN agent fronts.

Every agent implements the round-runner protocol from :mod:`wizrl.env`:
``bid(state, player, obs, mask, rng)`` and ``play(...)`` returning only
mask-admissible actions, plus the ``needs_observation`` flag that lets
the runner skip encoding observations no one will read.
"""

from __future__ import annotations

import numpy as np

from . import cards, game
from .dqn import DqnPolicy, select_action

__all__ = [
    "random_bid",
    "random_play",
    "heuristic_win_prob",
    "rule_bid",
    "rule_play",
    "RandomAgent",
    "RuleBasedAgent",
    "DqnAgent",
    "parse_agent_spec",
]


# ---------------------------------------------------------------------------
# Random policy
# ---------------------------------------------------------------------------


def random_bid(round_number: int, rng: np.random.Generator) -> int:
    """Uniform bid from 0..round_number inclusive."""
    return int(rng.integers(0, round_number + 1))


def random_play(mask: np.ndarray, rng: np.random.Generator) -> int:
    """Uniform choice over mask-admissible card indices."""
    legal = np.flatnonzero(mask)
    if legal.size == 0:
        raise ValueError("mask admits no plays")
    return int(legal[rng.integers(legal.size)])


class RandomAgent:
    """Chooses uniformly among admissible actions; reads no observations."""

    needs_observation = False

    def bid(self, state, player, obs, mask, rng):
        return random_bid(state.round_number, rng)

    def play(self, state, player, obs, mask, rng):
        legal = game.admissible(state.hands[player], state.current_trick)
        return int(legal[rng.integers(len(legal))])


# ---------------------------------------------------------------------------
# Rule-based heuristic
# ---------------------------------------------------------------------------


def heuristic_win_prob(card: int, trump_suit: int | None) -> float:
    """Crude per-card winning probability.

    Wizards always win (1.0) and jesters never do (0.0); standard cards
    interpolate linearly in rank, with trump cards occupying a strictly
    higher band (0.55..0.90) than non-trump cards (0.0..0.30).
    """
    if cards.is_wizard(card):
        return 1.0
    if cards.is_jester(card):
        return 0.0
    fraction = (cards.rank_of(card) - 2) / 12
    if trump_suit is not None and cards.suit_of(card) == trump_suit:
        return 0.55 + 0.35 * fraction
    return 0.30 * fraction


def rule_bid(hand, trump_suit: int | None) -> int:
    """Round-to-nearest of summed win probabilities; exact halves round down."""
    total = sum(heuristic_win_prob(c, trump_suit) for c in hand)
    bid = int(np.ceil(total - 0.5))  # nearest with half-down
    return max(0, min(len(hand), bid))


def _currently_wins(card: int, trick, trump_suit) -> bool:
    """Would ``card``, played now, become the trick's current best card?"""
    if not trick:
        return True
    best = trick[0][1]
    for _, played in trick[1:]:
        if game.beats(best, played, trump_suit):
            best = played
    return game.beats(best, card, trump_suit)


def rule_play(hand, trick, trump_suit, bid: int, tricks_taken: int) -> int:
    """Chase tricks while short of the bid, dodge them once it is met.

    Needing tricks: play the weakest admissible card that currently wins
    the trick, or the overall weakest if none can. Satisfied: play the
    strongest admissible card that does not win, or the weakest if all
    would. Strength is heuristic_win_prob with card-index tie-break.
    """
    legal = game.admissible(hand, trick)
    strength = lambda c: (heuristic_win_prob(c, trump_suit), c)
    winners = [c for c in legal if _currently_wins(c, trick, trump_suit)]
    if bid - tricks_taken > 0:
        pool = winners if winners else legal
        return min(pool, key=strength)
    losers = [c for c in legal if not _currently_wins(c, trick, trump_suit)]
    if losers:
        return max(losers, key=strength)
    return min(legal, key=strength)


class RuleBasedAgent:
    """Deterministic heuristic bidder and trick-chaser."""

    needs_observation = False

    def bid(self, state, player, obs, mask, rng):
        return rule_bid(state.hands[player], state.trump_suit)

    def play(self, state, player, obs, mask, rng):
        return rule_play(
            state.hands[player],
            state.current_trick,
            state.trump_suit,
            state.bids[player],
            state.tricks_taken[player],
        )


# ---------------------------------------------------------------------------
# DQN front
# ---------------------------------------------------------------------------


class DqnAgent:
    """Epsilon-greedy front over a :class:`~wizrl.dqn.DqnPolicy`.

    Evaluation uses ``epsilon=0`` (pure greedy); training drives the
    shared online nets through this same front with a decaying epsilon.
    """

    needs_observation = True

    def __init__(self, policy: DqnPolicy, epsilon: float = 0.0):
        if policy.history_size:
            raise ValueError(
                "policy expects history augmentation; use the history-aware agent"
            )
        self.policy = policy
        self.epsilon = epsilon

    def bid(self, state, player, obs, mask, rng):
        net = self.policy.bid_net(state.round_number)
        return select_action(net, obs, mask, self.epsilon, rng)

    def play(self, state, player, obs, mask, rng):
        net = self.policy.play_net(state.round_number)
        return select_action(net, obs, mask, self.epsilon, rng)


# ---------------------------------------------------------------------------
# Agent specification strings
# ---------------------------------------------------------------------------


def parse_agent_spec(spec: str):
    """Build an agent from a CLI spec string.

    Forms: ``random``, ``rule``, ``dqn:<ckpt>``, ``dqn+hist:<ckpt>:<lstm>``,
    ``tree:<ckpt>:<truth|uniform|nn:<estimator>>``.
    """
    parts = spec.split(":")
    kind = parts[0]
    if kind == "random" and len(parts) == 1:
        return RandomAgent()
    if kind == "rule" and len(parts) == 1:
        return RuleBasedAgent()
    if kind == "dqn" and len(parts) == 2 and parts[1]:
        return DqnAgent(DqnPolicy.from_checkpoint(parts[1]))
    if kind == "dqn+hist" and len(parts) == 3:
        from .history import DqnHistAgent, HistoryEncoder

        policy = DqnPolicy.from_checkpoint(parts[1])
        encoder = HistoryEncoder.from_checkpoint(parts[2])
        return DqnHistAgent(policy, encoder)
    if kind == "tree" and len(parts) >= 3:
        from .search import TreeSearchAgent, make_sampler

        policy = DqnPolicy.from_checkpoint(parts[1])
        sampler = make_sampler(":".join(parts[2:]))
        return TreeSearchAgent(policy, sampler)
    raise ValueError(f"unrecognized agent spec {spec!r}")
