"""Recurrent encoding of the public play history.

Every card played is a 69-dim step input: card one-hot (60), acting player
one-hot (4), trump suit one-hot (5, index 68 = no trump).  An LSTM cell
consumes the steps; a linear head with sigmoid outputs predicts 260
supervised targets per step:

* T1 (240): card-ownership grid, entry ``card*4 + player`` is 1 iff that
  player has played that card so far (cumulative, including this step).
* T2 (16): latched cannot-follow flags, entry ``240 + player*4 + suit`` is
  1 once the player has discarded a standard card while that suit led.
* T3 (4): entry ``256 + player`` marks who currently holds the trick.

The cell state after the latest observed play augments the playing-phase
observation of history-aware agents.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import cards, env, game
from .nn import AdamState, DenseNet, LstmCell, mse_loss, sigmoid

INPUT_DIM = 69
TARGET_DIM = 260

HISTORY_BUFFER_CAPACITY = 10_000
BATCH_SIZE = 64
LEARNING_RATE = 0.005


def encode_play(card, player, trump_suit):
    """Encode one observed play as a 69-dim float32 input vector."""
    vec = np.zeros(INPUT_DIM, dtype=np.float32)
    vec[card] = 1.0
    vec[60 + player] = 1.0
    vec[64 + (4 if trump_suit is None else trump_suit)] = 1.0
    return vec


@dataclass
class HistorySequence:
    """One round's play-by-play inputs and targets, both ``(4r, dim)``."""

    inputs: np.ndarray
    targets: np.ndarray
    round_number: int


def build_history_sequence(plays, trump_suit, round_number):
    """Derive step inputs and T1/T2/T3 targets from an ordered play list."""
    steps = len(plays)
    inputs = np.zeros((steps, INPUT_DIM), dtype=np.float32)
    targets = np.zeros((steps, TARGET_DIM), dtype=np.float32)

    ownership = np.zeros(240, dtype=np.float32)
    cannot_follow = np.zeros(16, dtype=np.float32)
    trick = []
    best_player = best_card = None

    for t, (player, card) in enumerate(plays):
        inputs[t] = encode_play(card, player, trump_suit)
        ownership[card * 4 + player] = 1.0
        lead = game.lead_suit(trick)
        if lead is not None and cards.is_standard(card) and cards.suit_of(card) != lead:
            cannot_follow[player * 4 + lead] = 1.0
        if best_card is None or game.beats(best_card, card, trump_suit):
            best_player, best_card = player, card
        trick.append((player, card))

        targets[t, :240] = ownership
        targets[t, 240:256] = cannot_follow
        targets[t, 256 + best_player] = 1.0

        if len(trick) == 4:
            trick = []
            best_player = best_card = None

    return HistorySequence(inputs, targets, round_number)


def generate_history_dataset(mix, round_number, n_rounds, rng, agent_rng=None):
    """Play ``n_rounds`` with the given agents and label every play."""
    sequences = []
    for _ in range(n_rounds):
        first = int(rng.integers(4))
        result = env.run_round(mix, round_number, first, rng, agent_rng=agent_rng)
        plays = [p for trick in result.state.completed_tricks for p in trick]
        sequences.append(
            build_history_sequence(plays, result.state.trump_suit, round_number)
        )
    return sequences


def save_history_dataset(path, sequences):
    """Write sequences as flat records: step count, then 329-value rows."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<II", len(sequences), 0))
        for seq in sequences:
            steps = seq.inputs.shape[0]
            fh.write(struct.pack("<II", steps, seq.round_number))
            rows = np.concatenate([seq.inputs, seq.targets], axis=1)
            fh.write(rows.astype("<f4").tobytes(order="C"))


def load_history_dataset(path):
    sequences = []
    with open(path, "rb") as fh:
        count, _ = struct.unpack("<II", fh.read(8))
        width = INPUT_DIM + TARGET_DIM
        for _ in range(count):
            steps, round_number = struct.unpack("<II", fh.read(8))
            rows = np.frombuffer(fh.read(steps * width * 4), dtype="<f4")
            rows = rows.reshape(steps, width)
            sequences.append(
                HistorySequence(
                    rows[:, :INPUT_DIM].copy(),
                    rows[:, INPUT_DIM:].copy(),
                    round_number,
                )
            )
    return sequences


class HistoryTracker:
    """Mutable per-round LSTM state fed by observed plays."""

    def __init__(self, encoder, trump_suit):
        self._encoder = encoder
        self._trump = trump_suit
        self._h, self._c = encoder.cell.initial_state()

    def observe(self, player, card):
        x = encode_play(card, player, self._trump)
        self._h, self._c, _ = self._encoder.cell.step(x, self._h, self._c)

    def cell_state(self):
        return self._c.astype(np.float32, copy=True)


class HistoryEncoder:
    """LSTM cell plus linear head and sigmoid over the 260 targets."""

    def __init__(self, hidden_size, rng=None, dtype=np.float32):
        self.hidden_size = hidden_size
        self.cell = LstmCell(INPUT_DIM, hidden_size, rng=rng, dtype=dtype)
        self.head = DenseNet([hidden_size, TARGET_DIM], rng=rng, dtype=dtype)

    def parameters(self):
        return self.cell.parameters() + self.head.parameters()

    def forward_sequence(self, xs):
        """Predict targets for a full ``(T, 69)`` input sequence."""
        hs, _, _ = self.cell.sequence_forward(xs)
        return sigmoid(self.head.forward(hs))

    def new_tracker(self, trump_suit):
        return HistoryTracker(self, trump_suit)

    def state_dict(self):
        tensors = {}
        for name, value in self.cell.state_dict().items():
            tensors["cell." + name] = value
        for name, value in self.head.state_dict().items():
            tensors["head." + name] = value
        return tensors

    def save(self, path):
        from .checkpoint import save_checkpoint

        save_checkpoint(path, self.state_dict())

    @classmethod
    def from_checkpoint(cls, path):
        from .checkpoint import load_checkpoint

        tensors = load_checkpoint(path)
        hidden = tensors["cell.lstm.U"].shape[1]
        enc = cls(hidden_size=hidden)
        enc.cell.load_state_dict(
            {k[len("cell.") :]: v for k, v in tensors.items() if k.startswith("cell.")}
        )
        enc.head.load_state_dict(
            {k[len("head.") :]: v for k, v in tensors.items() if k.startswith("head.")}
        )
        return enc


def train_history(
    encoder,
    sequences,
    epochs,
    rng,
    batch_size=BATCH_SIZE,
    learning_rate=LEARNING_RATE,
):
    """Minimize MSE over sigmoid outputs; one epoch = one pass over the data.

    Returns the per-epoch mean loss trace.
    """
    adam = AdamState(encoder.parameters(), learning_rate)
    hidden = encoder.hidden_size

    # batches mix only equal-length sequences so steps stack into one tensor
    by_length = {}
    for idx, seq in enumerate(sequences):
        by_length.setdefault(seq.inputs.shape[0], []).append(idx)

    losses = []
    for _ in range(epochs):
        batch_losses = []
        for length, indices in by_length.items():
            order = rng.permutation(len(indices))
            for start in range(0, len(indices), batch_size):
                chosen = [indices[i] for i in order[start : start + batch_size]]
                # (T, B, dim) step-major stacking for the recurrent pass
                xs = np.stack(
                    [sequences[i].inputs for i in chosen], axis=1
                )
                ys = np.stack(
                    [sequences[i].targets for i in chosen], axis=1
                )
                batch = len(chosen)

                hs, _, caches = encoder.cell.sequence_forward(xs)
                flat_h = hs.reshape(length * batch, hidden)
                logits, cache = encoder.head.forward_cached(flat_h)
                pred = sigmoid(logits)
                loss, dpred = mse_loss(pred, ys.reshape(length * batch, TARGET_DIM))
                dlogits = dpred * pred * (1.0 - pred)
                head_grads, dflat_h = encoder.head.backward(cache, dlogits)
                dhs = dflat_h.reshape(length, batch, hidden)
                cell_grads, _ = encoder.cell.sequence_backward(caches, dhs)
                adam.apply(encoder.parameters(), cell_grads + head_grads)
                batch_losses.append(loss)
        losses.append(float(np.mean(batch_losses)))
    return losses


def final_loss(losses):
    """Summary statistic of a training run: mean of the last 100 epochs."""
    return float(np.mean(losses[-100:]))


def augment_observation(observation, cell_state):
    """Append the encoder cell state to a playing-phase observation."""
    return np.concatenate([observation, cell_state]).astype(np.float32, copy=False)


class DqnHistAgent:
    """Greedy/epsilon-greedy DQN agent whose playing input carries history."""

    needs_observation = True
    observes_plays = True

    def __init__(self, policy, encoder, epsilon=0.0):
        if policy.history_size != encoder.hidden_size:
            raise ValueError(
                f"policy expects history size {policy.history_size}, "
                f"encoder provides {encoder.hidden_size}"
            )
        self._policy = policy
        self._encoder = encoder
        self.epsilon = epsilon
        self._tracker = None

    def begin_round(self, state):
        self._tracker = self._encoder.new_tracker(state.trump_suit)

    def observe_play(self, player, card):
        self._tracker.observe(player, card)

    def augment_playing(self, observation):
        return augment_observation(observation, self._tracker.cell_state())

    def bid(self, state, player, observation, mask, rng):
        from .dqn import select_action

        net = self._policy.bid_net(state.round_number)
        return int(select_action(net, observation, mask, self.epsilon, rng))

    def play(self, state, player, observation, mask, rng):
        from .dqn import select_action

        net = self._policy.play_net(state.round_number)
        return int(select_action(net, observation, mask, self.epsilon, rng))
