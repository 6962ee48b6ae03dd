"""Bidding and playing POMDPs on top of the rules engine.

Both phases observe one-hot encoded vectors with a fixed layout and act
through action masks; the only reward is the [0, 1]-normalized round
score, delivered on the terminal transition of each phase (all
intermediate playing rewards are zero, so with a discount of 1 the
Q-values estimate the expected final reward).

Bidding observation (75 values):

====  ==========================================================
0:60  own cards, multi-hot
60:64 bidding position, one-hot
64:69 trump suit, one-hot over the 4 suits plus "no trump"
69:75 previous bids: 3 slots of (present flag, bid / round)
====  ==========================================================

The three bid slots hold the other players in bidding order; during
bidding only the predecessors are present, in the playing phase all are.

Playing observation (147 values): the bidding block, then

=======  =======================================================
75       own bid / round
76       tricks taken so far / round
77:81    position within the current trick, one-hot
81:86    suit to follow, one-hot over 4 suits plus "none"
86:147   currently winning card, one-hot over 60 cards plus "none"
=======  =======================================================
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cards, game
from .game import NUM_PLAYERS, RoundState

BIDDING_OBS_DIM = 75
PLAYING_OBS_DIM = 147
PLAY_ACTIONS = cards.NUM_CARDS

_TRUMP_OFF = 64
_PREV_BIDS_OFF = 69
_OWN_BID = 75
_TRICKS_TAKEN = 76
_TRICK_POS_OFF = 77
_SUIT_TO_FOLLOW_OFF = 81
_HIGHEST_OFF = 86


@dataclass
class Transition:
    """One agent step; ``reward`` is zero unless ``terminal``."""

    observation: np.ndarray
    action: int
    reward: float = 0.0
    next_observation: np.ndarray | None = None
    next_mask: np.ndarray | None = None
    terminal: bool = False


def _encode_bidding_block(obs: np.ndarray, state: RoundState, player: int) -> None:
    r = state.round_number
    hand = state.hands[player]
    obs[hand] = 1.0
    position = state.bidding_position(player)
    obs[60 + position] = 1.0
    if state.trump_suit is None:
        obs[_TRUMP_OFF + 4] = 1.0
    else:
        obs[_TRUMP_OFF + state.trump_suit] = 1.0
    others = sorted(
        (p for p in range(NUM_PLAYERS) if p != player),
        key=state.bidding_position,
    )
    for slot, p in enumerate(others):
        bid = state.bids[p]
        if bid is not None:
            obs[_PREV_BIDS_OFF + 2 * slot] = 1.0
            obs[_PREV_BIDS_OFF + 2 * slot + 1] = bid / r


def encode_bidding(state: RoundState, player: int) -> tuple[np.ndarray, np.ndarray]:
    """Observation and all-ones mask for ``player``'s bid.

    Must be called on the player's bidding turn; every bid 0..round is
    legal, so the mask has ``round + 1`` ones.
    """
    if state.phase != game.BIDDING or player != state.next_player:
        raise ValueError(f"it is not player {player}'s turn to bid")
    obs = np.zeros(BIDDING_OBS_DIM, dtype=np.float32)
    _encode_bidding_block(obs, state, player)
    mask = np.ones(state.round_number + 1, dtype=bool)
    return obs, mask


def encode_playing(state: RoundState, player: int) -> tuple[np.ndarray, np.ndarray]:
    """Observation and admissibility mask for ``player``'s card play."""
    if state.phase != game.PLAYING or player != state.next_player:
        raise ValueError(f"it is not player {player}'s turn to play")
    r = state.round_number
    obs = np.zeros(PLAYING_OBS_DIM, dtype=np.float32)
    _encode_bidding_block(obs, state, player)
    obs[_OWN_BID] = state.bids[player] / r
    obs[_TRICKS_TAKEN] = state.tricks_taken[player] / r
    obs[_TRICK_POS_OFF + len(state.current_trick)] = 1.0
    if state.trick_suit is None:
        obs[_SUIT_TO_FOLLOW_OFF + 4] = 1.0
    else:
        obs[_SUIT_TO_FOLLOW_OFF + state.trick_suit] = 1.0
    if state.trick_best_card is None:
        obs[_HIGHEST_OFF + cards.NUM_CARDS] = 1.0
    else:
        obs[_HIGHEST_OFF + state.trick_best_card] = 1.0
    mask = np.zeros(PLAY_ACTIONS, dtype=bool)
    mask[game.admissible(state.hands[player], state.current_trick)] = True
    return obs, mask


@dataclass
class RoundResult:
    """Outcome of one simulated round."""

    state: RoundState
    points: list[int]
    rewards: list[float]
    bid_transitions: list[Transition | None]
    play_transitions: list[list[Transition]]

    @property
    def bids(self) -> list[int | None]:
        return self.state.bids

    @property
    def tricks_taken(self) -> list[int]:
        return self.state.tricks_taken

    @property
    def hits(self) -> list[bool]:
        """Per player, whether the bid exactly matched the trick count."""
        return [
            self.state.bids[p] == self.state.tricks_taken[p]
            for p in range(NUM_PLAYERS)
        ]


def run_round(
    agents,
    round_number: int,
    first_bidder: int,
    rng: np.random.Generator,
    agent_rng: np.random.Generator | None = None,
    collect: tuple[int, ...] = (),
) -> RoundResult:
    """Deal and complete one round with the given four agents.

    ``rng`` drives the deal; ``agent_rng`` (defaulting to ``rng``) drives
    agent stochasticity, so evaluations can keep deals identical across
    agent mixes. Observations are encoded only for seats in ``collect``
    or whose agent sets ``needs_observation``; ``collect`` seats receive
    their transition lists in the result (one terminal bidding transition
    and one playing transition per card, the last one terminal, all
    carrying the normalized round reward).
    """
    if agent_rng is None:
        agent_rng = rng
    state = game.deal(rng, round_number, first_bidder)
    collect = tuple(collect)
    observers = [a for a in agents if getattr(a, "observes_plays", False)]
    for agent in agents:
        begin = getattr(agent, "begin_round", None)
        if begin is not None:
            begin(state)

    bid_transitions: list[Transition | None] = [None] * NUM_PLAYERS
    play_transitions: list[list[Transition]] = [[] for _ in range(NUM_PLAYERS)]
    pending: list[Transition | None] = [None] * NUM_PLAYERS

    for k in range(NUM_PLAYERS):
        p = (first_bidder + k) % NUM_PLAYERS
        wants_obs = p in collect or getattr(agents[p], "needs_observation", False)
        obs, mask = encode_bidding(state, p) if wants_obs else (None, None)
        bid = agents[p].bid(state, p, obs, mask, agent_rng)
        if p in collect:
            bid_transitions[p] = Transition(obs, bid, terminal=True)
        game.submit_bid(state, p, bid)

    while state.phase == game.PLAYING:
        p = state.next_player
        wants_obs = p in collect or getattr(agents[p], "needs_observation", False)
        if wants_obs:
            obs, mask = encode_playing(state, p)
            augment = getattr(agents[p], "augment_playing", None)
            if augment is not None:
                obs = augment(obs)
        else:
            obs, mask = None, None
        if p in collect and pending[p] is not None:
            pending[p].next_observation = obs
            pending[p].next_mask = mask
            play_transitions[p].append(pending[p])
            pending[p] = None
        card = agents[p].play(state, p, obs, mask, agent_rng)
        if p in collect:
            pending[p] = Transition(obs, card)
        game.step_play(state, p, card)
        for agent in observers:
            agent.observe_play(p, card)

    points = game.round_scores(state)
    rewards = [game.normalize_reward(pt, round_number) for pt in points]
    for p in collect:
        if bid_transitions[p] is not None:
            bid_transitions[p].reward = rewards[p]
        last = pending[p]
        if last is not None:
            last.reward = rewards[p]
            last.terminal = True
            play_transitions[p].append(last)
            pending[p] = None
    return RoundResult(state, points, rewards, bid_transitions, play_transitions)
