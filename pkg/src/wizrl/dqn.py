"""DQN learner: replay buffer, epsilon schedule, masked Q-targets, cadence.

Training protocol constants: one shared learner per (round, phase) serves
all four seats; the learner trains on every 10th round and blends 10% of
the online parameters into the target net on every 20th round. Masked-out
actions never influence action selection or bootstrap targets.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from . import checkpoint as ckpt
from .env import BIDDING_OBS_DIM, PLAY_ACTIONS, PLAYING_OBS_DIM
from .nn import AdamState, DenseNet, blend_parameters

__all__ = [
    "BID_BUFFER_CAPACITY",
    "PLAY_BUFFER_CAPACITY",
    "BATCH_SIZE",
    "LEARNING_RATE",
    "GAMMA",
    "TAU",
    "TRAIN_EVERY",
    "BLEND_EVERY",
    "epsilon",
    "select_action",
    "ReplayBuffer",
    "Batch",
    "compute_targets",
    "DqnLearner",
    "DqnPolicy",
    "HIDDEN_LAYERS",
]

BID_BUFFER_CAPACITY = 300_000
PLAY_BUFFER_CAPACITY = 600_000
BATCH_SIZE = 1024
LEARNING_RATE = 0.0005
GAMMA = 1.0
TAU = 0.1
TRAIN_EVERY = 10
BLEND_EVERY = 20


def epsilon(
    t: float,
    total_rounds: float,
    start: float = 1.0,
    end: float = 0.01,
    fraction: float = 0.9,
) -> float:
    """Exponential decay from ``start`` to ``end`` over ``fraction`` of training.

    epsilon(t) = max(end, start * (end/start) ** (t / (fraction * total))).
    """
    if total_rounds <= 0:
        raise ValueError("total_rounds must be positive")
    horizon = fraction * total_rounds
    return max(end, start * (end / start) ** (t / horizon))


def select_action(net, observation, mask, eps: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy over mask-admissible actions.

    Greedy ties break to the lowest action index; during exploration the
    network is never evaluated.
    """
    legal = np.flatnonzero(mask)
    if legal.size == 0:
        raise ValueError("action mask admits no actions")
    if eps > 0.0 and rng.random() < eps:
        return int(legal[rng.integers(legal.size)])
    q = net.forward(observation)
    return int(legal[np.argmax(q[legal])])


@dataclass
class Batch:
    """A sampled minibatch in struct-of-arrays form."""

    obs: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_obs: np.ndarray
    next_mask: np.ndarray
    terminal: np.ndarray


class ReplayBuffer:
    """Fixed-capacity ring buffer over preallocated arrays.

    Terminal transitions leave their next-state rows zeroed; those rows
    are never read because targets gate on the terminal flag.
    """

    def __init__(self, capacity: int, obs_dim: int, num_actions: int):
        self.capacity = int(capacity)
        self.obs_dim = int(obs_dim)
        self.num_actions = int(num_actions)
        self._obs = np.zeros((capacity, obs_dim), dtype=np.float32)
        self._actions = np.zeros(capacity, dtype=np.int32)
        self._rewards = np.zeros(capacity, dtype=np.float32)
        self._next_obs = np.zeros((capacity, obs_dim), dtype=np.float32)
        self._next_mask = np.zeros((capacity, num_actions), dtype=bool)
        self._terminal = np.zeros(capacity, dtype=bool)
        self._cursor = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def add(self, transition) -> None:
        i = self._cursor
        self._obs[i] = transition.observation
        self._actions[i] = transition.action
        self._rewards[i] = transition.reward
        if transition.terminal:
            self._terminal[i] = True
            self._next_obs[i] = 0.0
            self._next_mask[i] = False
        else:
            self._terminal[i] = False
            self._next_obs[i] = transition.next_observation
            self._next_mask[i] = transition.next_mask
        self._cursor = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> Batch:
        """Uniform sample with replacement over current contents."""
        if self._size == 0:
            raise ValueError("cannot sample from an empty buffer")
        idx = rng.integers(self._size, size=batch_size)
        return Batch(
            obs=self._obs[idx],
            actions=self._actions[idx],
            rewards=self._rewards[idx],
            next_obs=self._next_obs[idx],
            next_mask=self._next_mask[idx],
            terminal=self._terminal[idx],
        )


def compute_targets(target_net: DenseNet, batch: Batch, gamma: float) -> np.ndarray:
    """y = reward, plus gamma * max admissible Q_target(s') when non-terminal."""
    y = batch.rewards.astype(np.float64).copy()
    alive = ~batch.terminal
    if alive.any():
        q_next = target_net.forward(batch.next_obs[alive])
        masked = np.where(batch.next_mask[alive], q_next, -np.inf)
        y[alive] += gamma * masked.max(axis=1)
    return y


class DqnLearner:
    """Online/target net pair with Adam and the paper's update cadence."""

    def __init__(
        self,
        online: DenseNet,
        buffer: ReplayBuffer,
        rng: np.random.Generator,
        learning_rate: float = LEARNING_RATE,
        gamma: float = GAMMA,
        batch_size: int = BATCH_SIZE,
        tau: float = TAU,
        train_every: int = TRAIN_EVERY,
        blend_every: int = BLEND_EVERY,
    ):
        self.online = online
        self.target = online.clone()
        self.buffer = buffer
        self.rng = rng
        self.gamma = gamma
        self.batch_size = batch_size
        self.tau = tau
        self.train_every = train_every
        self.blend_every = blend_every
        self.adam = AdamState(online.parameters(), learning_rate)
        self.train_count = 0
        self.blend_count = 0

    def train_step(self) -> float | None:
        """One Adam step on a sampled batch; None while the buffer is short."""
        if len(self.buffer) < self.batch_size:
            return None
        batch = self.buffer.sample(self.batch_size, self.rng)
        y = compute_targets(self.target, batch, self.gamma)
        q, cache = self.online.forward_cached(batch.obs)
        rows = np.arange(len(batch.actions))
        predicted = q[rows, batch.actions]
        diff = predicted - y.astype(q.dtype)
        loss = float(np.mean(diff * diff))
        dq = np.zeros_like(q)
        dq[rows, batch.actions] = (2.0 / diff.size) * diff
        grads, _ = self.online.backward(cache, dq)
        self.adam.apply(self.online.parameters(), grads)
        self.train_count += 1
        return loss

    def blend(self) -> None:
        """Move target parameters 10% (tau) toward the online parameters."""
        blend_parameters(self.target.parameters(), self.online.parameters(), self.tau)
        self.blend_count += 1

    def maybe_update(self, rounds_elapsed: int) -> float | None:
        """Apply the training cadence after ``rounds_elapsed`` total rounds."""
        loss = None
        if rounds_elapsed % self.train_every == 0:
            loss = self.train_step()
        if rounds_elapsed % self.blend_every == 0:
            self.blend()
        return loss


HIDDEN_LAYERS = (256, 256, 256)

_TENSOR_NAME = re.compile(r"^r(\d+)\.(bid|play)\.layer(\d+)\.(weight|bias)$")


class DqnPolicy:
    """Per-round bidding and playing Q-networks bundled as one checkpoint.

    Tensor naming: ``r{round:02d}.{bid|play}.layer{i}.{weight|bias}``. The
    bidding net for round r maps 75 inputs to r+1 Q-values; the playing
    net maps 147 (+ history cell size, if any) inputs to 60 Q-values.
    """

    def __init__(self, hidden=HIDDEN_LAYERS, history_size: int = 0):
        self.hidden = tuple(int(h) for h in hidden)
        self.history_size = int(history_size)
        self._bid: dict[int, DenseNet] = {}
        self._play: dict[int, DenseNet] = {}

    @property
    def playing_input_dim(self) -> int:
        return PLAYING_OBS_DIM + self.history_size

    def rounds(self) -> list[int]:
        return sorted(self._bid.keys() | self._play.keys())

    def ensure_round(self, round_number: int, rng: np.random.Generator) -> None:
        """Create freshly initialized nets for ``round_number`` if absent."""
        if round_number not in self._bid:
            dims = [BIDDING_OBS_DIM, *self.hidden, round_number + 1]
            self._bid[round_number] = DenseNet(dims, rng=rng)
        if round_number not in self._play:
            dims = [self.playing_input_dim, *self.hidden, PLAY_ACTIONS]
            self._play[round_number] = DenseNet(dims, rng=rng)

    def bid_net(self, round_number: int) -> DenseNet:
        try:
            return self._bid[round_number]
        except KeyError:
            raise ValueError(f"no bidding net for round {round_number}") from None

    def play_net(self, round_number: int) -> DenseNet:
        try:
            return self._play[round_number]
        except KeyError:
            raise ValueError(f"no playing net for round {round_number}") from None

    def set_nets(self, round_number: int, bid: DenseNet, play: DenseNet) -> None:
        self._bid[round_number] = bid
        self._play[round_number] = play

    def state_dict(self) -> dict[str, np.ndarray]:
        tensors: dict[str, np.ndarray] = {}
        for r in self.rounds():
            for phase, net in (("bid", self._bid[r]), ("play", self._play[r])):
                for name, value in net.state_dict().items():
                    tensors[f"r{r:02d}.{phase}.{name}"] = value
        return tensors

    def save(self, path) -> None:
        ckpt.save_checkpoint(path, self.state_dict())

    @classmethod
    def from_checkpoint(cls, path) -> "DqnPolicy":
        tensors = ckpt.load_checkpoint(path)
        grouped: dict[tuple[int, str], dict[int, dict[str, np.ndarray]]] = {}
        for name, value in tensors.items():
            m = _TENSOR_NAME.match(name)
            if m is None:
                raise ValueError(f"{path}: unexpected tensor name {name!r}")
            r, phase, layer, kind = (
                int(m.group(1)),
                m.group(2),
                int(m.group(3)),
                m.group(4),
            )
            grouped.setdefault((r, phase), {}).setdefault(layer, {})[kind] = value
        policy: DqnPolicy | None = None
        nets: dict[tuple[int, str], DenseNet] = {}
        for (r, phase), layers in grouped.items():
            dims = [layers[0]["weight"].shape[1]]
            for i in range(len(layers)):
                dims.append(layers[i]["weight"].shape[0])
            net = DenseNet(dims, rng=None)
            for i in range(len(layers)):
                net.weights[i][...] = layers[i]["weight"]
                net.biases[i][...] = layers[i]["bias"]
            nets[(r, phase)] = net
            if phase == "play":
                hidden = tuple(dims[1:-1])
                history = dims[0] - PLAYING_OBS_DIM
                if policy is None:
                    policy = cls(hidden=hidden, history_size=history)
        if policy is None:
            policy = cls()
        for (r, phase), net in nets.items():
            target = policy._bid if phase == "bid" else policy._play
            target[r] = net
        return policy
