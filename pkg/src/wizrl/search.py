"""One-ply tree search over determinized states.

At a playing decision the agent samples a complete card-location table
consistent with its knowledge, materializes it into a full-information
round state, and rolls out every admissible action once with all four
seats playing greedily under the trained playing network.  The action
with the highest (average, over ``k`` sampled tables) normalized own
reward is chosen; ties break to the lowest card index.
"""

from __future__ import annotations

import numpy as np

from . import env, game, state_model
from .dqn import select_action


def state_from_table(state, table):
    """Materialize a sampled location table into a playable round state.

    The table must be exactly consistent with the public record: one-hot
    rows, every played card in its player's played column, the trump
    card in the deck column and hand sizes matching the real state.
    """
    if table.shape != (60, state_model.NUM_LOCATIONS):
        raise ValueError(f"expected a (60, 9) table, got {table.shape}")
    if not (table.sum(axis=1) == 1.0).all():
        raise ValueError("table rows must be one-hot")
    for trick in state.completed_tricks + [state.current_trick]:
        for player, card in trick:
            if table[card, state_model.played_column(player)] != 1.0:
                raise ValueError(f"card {card} is publicly played but mislocated")
    if state.trump_card is not None and table[state.trump_card, 0] != 1.0:
        raise ValueError("trump card must sit in the deck column")

    hands = [
        np.flatnonzero(table[:, state_model.hand_column(p)]).tolist() for p in range(4)
    ]
    for p in range(4):
        if len(hands[p]) != len(state.hands[p]):
            raise ValueError(
                f"player {p} hand size {len(hands[p])} != {len(state.hands[p])}"
            )

    det = state.clone()
    det.hands = hands
    det.undealt = [
        int(c) for c in np.flatnonzero(table[:, 0]) if c != state.trump_card
    ]
    return det


def _greedy_finish(sim, net):
    """Play the round to completion with every seat greedy under ``net``."""
    while sim.phase == game.PLAYING:
        p = sim.next_player
        obs, mask = env.encode_playing(sim, p)
        game.step_play(sim, p, select_action(net, obs, mask, 0.0, None))


def tree_search(state, player, policy, sampler, rng, k=1):
    """Pick the admissible card with the best greedy-rollout value."""
    legal = sorted(game.admissible(state.hands[player], state.current_trick))
    if len(legal) == 1:
        return legal[0]
    net = policy.play_net(state.round_number)
    values = np.zeros(len(legal))
    for _ in range(k):
        det = state_from_table(state, sampler(state, player, rng))
        for i, card in enumerate(legal):
            sim = det.clone()
            game.step_play(sim, player, card)
            _greedy_finish(sim, net)
            points = game.round_scores(sim)[player]
            values[i] += game.normalize_reward(points, state.round_number)
    return legal[int(np.argmax(values))]


def make_sampler(spec):
    """Build a ``sampler(state, player, rng) -> table`` from a spec string.

    ``"truth"`` returns the actual table (an upper-bound reference),
    ``"uniform"`` determinizes uniformly from the player's knowledge,
    ``"nn:<checkpoint>"`` weights placements by a trained estimator.
    """
    if spec == "truth":
        return lambda state, player, rng: state_model.truth_table(state)
    if spec == "uniform":

        def uniform(state, player, rng):
            know = state_model.knowledge_of(state, player)
            return state_model.uniform_sample(know, rng)

        return uniform
    if spec.startswith("nn:") and spec[len("nn:") :]:
        estimator = state_model.StateEstimator.from_checkpoint(spec[len("nn:") :])

        def guided(state, player, rng):
            obs, _ = env.encode_playing(state, player)
            know = state_model.knowledge_of(state, player)
            return state_model.nn_sample(know, estimator.predict(obs), rng)

        return guided
    raise ValueError(f"unknown sampler spec {spec!r}")


class TreeSearchAgent:
    """DQN bidding plus determinized one-ply search for card play."""

    needs_observation = False

    def __init__(self, policy, sampler, k=1):
        if policy.history_size:
            raise ValueError("tree search requires a plain-observation policy")
        self._policy = policy
        self._sampler = sampler
        self._k = k

    def bid(self, state, player, observation, mask, rng):
        if observation is None:
            observation, mask = env.encode_bidding(state, player)
        net = self._policy.bid_net(state.round_number)
        return int(select_action(net, observation, mask, 0.0, rng))

    def play(self, state, player, observation, mask, rng):
        return int(
            tree_search(state, player, self._policy, self._sampler, rng, self._k)
        )
