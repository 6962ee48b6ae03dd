"""Card-location tables, determinization samplers and the state estimator.

A card-location table is a ``(60, 9)`` matrix: one row per card, one
column per possible location — column 0 is the face-down deck (the
face-up trump card counts as part of it), columns 1-4 the hands of
players 0-3, columns 5-8 cards already played by players 0-3.  The true
table has one-hot rows; the estimator predicts a distribution per row.

Samplers turn a player's partial knowledge into a complete, consistent
table ("determinization"): ``uniform_sample`` fills unknown cards
uniformly subject to exact location counts, ``nn_sample`` additionally
weights each card's placement by estimator probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import env, game
from .nn import AdamState, DenseNet

NUM_LOCATIONS = 9
LOC_DECK = 0

ESTIMATOR_HIDDEN = (200, 200, 300)
ESTIMATOR_BUFFER_CAPACITY = 600_000
ESTIMATOR_BATCH_SIZE = 1024
ESTIMATOR_LEARNING_RATE = 0.001


def hand_column(player):
    return 1 + player


def played_column(player):
    return 5 + player


def _all_plays(state):
    for trick in state.completed_tricks:
        yield from trick
    yield from state.current_trick


def truth_table(state):
    """The actual one-hot location table of a round state."""
    table = np.zeros((60, NUM_LOCATIONS), dtype=np.float32)
    for p, hand in enumerate(state.hands):
        table[hand, hand_column(p)] = 1.0
    for player, card in _all_plays(state):
        table[card, played_column(player)] = 1.0
    if state.trump_card is not None:
        table[state.trump_card, LOC_DECK] = 1.0
    table[state.undealt, LOC_DECK] = 1.0
    return table


@dataclass
class Knowledge:
    """What one player can deduce: known one-hot rows plus column totals.

    ``table`` rows are one-hot where the location is certain and all-zero
    where it is hidden; ``capacity`` gives the exact number of cards in
    each location, which is public information.
    """

    table: np.ndarray
    capacity: np.ndarray


def knowledge_of(state, player):
    """Build ``player``'s knowledge from public information and their hand."""
    r = state.round_number
    table = np.zeros((60, NUM_LOCATIONS), dtype=np.float32)
    capacity = np.zeros(NUM_LOCATIONS, dtype=np.int64)

    played_by = [0, 0, 0, 0]
    for q, card in _all_plays(state):
        table[card, played_column(q)] = 1.0
        played_by[q] += 1

    capacity[LOC_DECK] = 60 - 4 * r
    for p in range(4):
        capacity[hand_column(p)] = r - played_by[p]
        capacity[played_column(p)] = played_by[p]

    table[state.hands[player], hand_column(player)] = 1.0
    if state.trump_card is not None:
        table[state.trump_card, LOC_DECK] = 1.0
    return Knowledge(table, capacity)


def _free_slots(knowledge):
    table = knowledge.table
    free = knowledge.capacity - table.sum(axis=0).astype(np.int64)
    unknown = np.flatnonzero(table.sum(axis=1) == 0)
    if free.min() < 0 or int(free.sum()) != len(unknown):
        raise ValueError("knowledge table is inconsistent with its capacities")
    return free, unknown


def uniform_sample(knowledge, rng):
    """Complete the table uniformly over all consistent assignments."""
    free, unknown = _free_slots(knowledge)
    table = knowledge.table.copy()
    slots = np.repeat(np.arange(NUM_LOCATIONS), free)
    rng.shuffle(slots)
    table[unknown, slots] = 1.0
    return table


def nn_sample(knowledge, probs, rng):
    """Complete the table guided by per-row location probabilities.

    Cards are visited in random order; each is placed by sampling its
    predicted row restricted to locations with remaining capacity
    (renormalized), falling back to uniform over those locations when
    the restricted mass is zero.
    """
    free, unknown = _free_slots(knowledge)
    table = knowledge.table.copy()
    for card in rng.permutation(unknown):
        weights = np.where(free > 0, probs[card], 0.0)
        total = weights.sum()
        if total <= 0.0:
            weights = (free > 0).astype(np.float64)
            total = weights.sum()
        location = int(rng.choice(NUM_LOCATIONS, p=weights / total))
        table[card, location] = 1.0
        free[location] -= 1
    return table


def _row_softmax(logits):
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


class StateEstimator:
    """Dense net mapping a playing observation to 60 location distributions."""

    def __init__(
        self,
        input_dim=env.PLAYING_OBS_DIM,
        hidden=ESTIMATOR_HIDDEN,
        rng=None,
        dtype=np.float32,
    ):
        self.input_dim = input_dim
        self.net = DenseNet(
            [input_dim, *hidden, 60 * NUM_LOCATIONS], rng=rng, dtype=dtype
        )

    def predict(self, observation):
        logits = self.net.forward(observation)
        return _row_softmax(logits.reshape(*logits.shape[:-1], 60, NUM_LOCATIONS))

    def loss_and_gradients(self, observations, locations):
        """Mean per-row cross-entropy and its parameter gradients.

        ``locations`` holds the true column index of every card,
        shape ``(batch, 60)``.
        """
        observations = np.atleast_2d(observations)
        locations = np.atleast_2d(locations)
        batch = observations.shape[0]

        logits, cache = self.net.forward_cached(observations)
        probs = _row_softmax(logits.reshape(batch, 60, NUM_LOCATIONS))

        rows = np.arange(60)
        picked = probs[np.arange(batch)[:, None], rows[None, :], locations]
        loss = float(-np.log(np.maximum(picked, 1e-30)).mean())

        dlogits = probs.copy()
        dlogits[np.arange(batch)[:, None], rows[None, :], locations] -= 1.0
        dlogits /= batch * 60
        grads, _ = self.net.backward(cache, dlogits.reshape(batch, -1))
        return loss, grads

    def state_dict(self):
        return self.net.state_dict()

    def save(self, path):
        from .checkpoint import save_checkpoint

        save_checkpoint(path, self.state_dict())

    @classmethod
    def from_checkpoint(cls, path):
        from .checkpoint import load_checkpoint

        tensors = load_checkpoint(path)
        weights = [
            tensors[f"layer{i}.weight"]
            for i in range(sum(1 for k in tensors if k.endswith(".weight")))
        ]
        est = cls(
            input_dim=weights[0].shape[1],
            hidden=tuple(w.shape[0] for w in weights[:-1]),
        )
        est.net.load_state_dict(tensors)
        return est


def generate_estimator_samples(mix, round_number, n_rounds, rng, agent_rng=None):
    """Label every play decision with the true location table.

    Returns ``(observations, locations)``: the acting player's base
    playing observation and the 60 true column indices at that moment.
    """
    if agent_rng is None:
        agent_rng = rng
    obs_rows, loc_rows = [], []
    observers = [a for a in mix if getattr(a, "observes_plays", False)]

    for _ in range(n_rounds):
        first = int(rng.integers(4))
        state = game.deal(rng, round_number, first)
        for agent in mix:
            begin = getattr(agent, "begin_round", None)
            if begin is not None:
                begin(state)
        for i in range(4):
            p = (first + i) % 4
            if getattr(mix[p], "needs_observation", False):
                obs, mask = env.encode_bidding(state, p)
            else:
                obs, mask = None, None
            game.submit_bid(state, p, int(mix[p].bid(state, p, obs, mask, agent_rng)))

        while state.phase == game.PLAYING:
            p = state.next_player
            obs, mask = env.encode_playing(state, p)
            obs_rows.append(obs)
            loc_rows.append(truth_table(state).argmax(axis=1).astype(np.int8))
            acting_obs = obs
            augment = getattr(mix[p], "augment_playing", None)
            if augment is not None:
                acting_obs = augment(obs)
            card = int(mix[p].play(state, p, acting_obs, mask, agent_rng))
            game.step_play(state, p, card)
            for agent in observers:
                agent.observe_play(p, card)

    return np.stack(obs_rows), np.stack(loc_rows)


class EstimatorBuffer:
    """Ring buffer of (observation, true location indices) samples."""

    def __init__(self, capacity, obs_dim):
        self.capacity = capacity
        self._obs = np.zeros((capacity, obs_dim), dtype=np.float32)
        self._loc = np.zeros((capacity, 60), dtype=np.int8)
        self._size = 0
        self._cursor = 0

    def __len__(self):
        return self._size

    def add(self, observation, locations):
        i = self._cursor
        self._obs[i] = observation
        self._loc[i] = locations
        self._cursor = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size, rng):
        if self._size == 0:
            raise ValueError("cannot sample from an empty buffer")
        idx = rng.integers(0, self._size, size=batch_size)
        return self._obs[idx], self._loc[idx]


class EstimatorLearner:
    """Adam training loop over an estimator buffer."""

    def __init__(
        self,
        estimator,
        buffer,
        rng,
        learning_rate=ESTIMATOR_LEARNING_RATE,
        batch_size=ESTIMATOR_BATCH_SIZE,
    ):
        self.estimator = estimator
        self.buffer = buffer
        self.rng = rng
        self.batch_size = batch_size
        self.adam = AdamState(estimator.net.parameters(), learning_rate)

    def train_step(self):
        if len(self.buffer) < self.batch_size:
            return None
        obs, loc = self.buffer.sample(self.batch_size, self.rng)
        loss, grads = self.estimator.loss_and_gradients(obs, loc.astype(np.int64))
        self.adam.apply(self.estimator.net.parameters(), grads)
        return loss
