"""Minimal numeric core: dense nets, an LSTM cell, Adam, and losses.

Everything is plain numpy. Parameters live in 32-bit floats by default;
construct with ``dtype=np.float64`` for gradient checking. Conventions:

* Dense weights have shape ``(fan_out, fan_in)``; inputs may be a single
  vector ``(in,)`` or a batch ``(batch, in)``.
* The LSTM concatenates its four gates along the first parameter axis in
  the order input, forget, output, candidate (i, f, o, g):
  ``z = W x + U h + b``, ``c' = f*c + i*g``, ``h' = o*tanh(c')``.
* Initialization: hidden ReLU layers use He-style uniform fan-in scaling
  (limit ``sqrt(6/fan_in)``), zero biases; LSTM gates use uniform
  ``1/sqrt(hidden)`` scaling with a +1 forget-gate bias.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "DenseNet",
    "LstmCell",
    "AdamState",
    "mse_loss",
    "blend_parameters",
    "sigmoid",
]


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def mse_loss(prediction: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared error over all elements and its gradient w.r.t. prediction."""
    prediction = np.asarray(prediction)
    target = np.asarray(target)
    if prediction.shape != target.shape:
        raise ValueError(
            f"shape mismatch: prediction {prediction.shape} vs target {target.shape}"
        )
    diff = prediction - target
    loss = float(np.mean(diff * diff))
    grad = (2.0 / prediction.size) * diff
    return loss, grad


def blend_parameters(target, online, tau: float = 0.1) -> None:
    """In place: target <- (1 - tau) * target + tau * online, elementwise."""
    if len(target) != len(online):
        raise ValueError("parameter lists differ in length")
    for t, o in zip(target, online):
        if t.shape != o.shape:
            raise ValueError(f"shape mismatch: {t.shape} vs {o.shape}")
        t *= 1.0 - tau
        t += tau * o


class DenseNet:
    """Fully-connected net: ReLU hidden layers, linear output layer."""

    def __init__(self, dims, rng: np.random.Generator | None = None, dtype=np.float32):
        if len(dims) < 2:
            raise ValueError("need at least input and output dims")
        self.dims = list(int(d) for d in dims)
        self.dtype = np.dtype(dtype)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(self.dims, self.dims[1:]):
            if rng is None:
                w = np.zeros((fan_out, fan_in), dtype=self.dtype)
            else:
                limit = np.sqrt(6.0 / fan_in)
                w = rng.uniform(-limit, limit, size=(fan_out, fan_in)).astype(
                    self.dtype
                )
            self.weights.append(w)
            self.biases.append(np.zeros(fan_out, dtype=self.dtype))

    @property
    def input_dim(self) -> int:
        return self.dims[0]

    @property
    def output_dim(self) -> int:
        return self.dims[-1]

    def parameters(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def _promote(self, x) -> tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=self.dtype)
        if x.ndim == 1:
            x = x[None, :]
            squeezed = True
        elif x.ndim == 2:
            squeezed = False
        else:
            raise ValueError(f"input must be 1-D or 2-D, got shape {x.shape}")
        if x.shape[1] != self.dims[0]:
            raise ValueError(f"input dim {x.shape[1]} != expected {self.dims[0]}")
        return x, squeezed

    def forward(self, x: np.ndarray) -> np.ndarray:
        x, squeezed = self._promote(x)
        a = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            a = a @ w.T + b
            if i != last:
                np.maximum(a, 0.0, out=a)
        return a[0] if squeezed else a

    def forward_cached(self, x: np.ndarray):
        """Forward pass keeping per-layer inputs for :meth:`backward`."""
        x, squeezed = self._promote(x)
        inputs = [x]  # input to each layer (post-activation of previous)
        a = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            a = a @ w.T + b
            if i != last:
                np.maximum(a, 0.0, out=a)
                inputs.append(a)
        cache = (inputs, squeezed)
        return (a[0] if squeezed else a), cache

    def backward(self, cache, output_gradient: np.ndarray):
        """Reverse-mode gradients.

        Returns ``(grads, input_gradient)`` where ``grads`` matches
        :meth:`parameters` order (w0, b0, w1, b1, ...).
        """
        if cache is None:
            raise ValueError("backward requires the cache from forward_cached")
        inputs, squeezed = cache
        dy = np.asarray(output_gradient, dtype=self.dtype)
        if squeezed and dy.ndim == 1:
            dy = dy[None, :]
        n_layers = len(self.weights)
        grad_w: list[np.ndarray | None] = [None] * n_layers
        grad_b: list[np.ndarray | None] = [None] * n_layers
        dz = dy
        for i in range(n_layers - 1, -1, -1):
            a_in = inputs[i]
            grad_w[i] = dz.T @ a_in
            grad_b[i] = dz.sum(axis=0)
            da = dz @ self.weights[i]
            if i > 0:
                # ReLU mask: inputs[i] is the post-activation of layer i-1
                dz = da * (inputs[i] > 0)
            else:
                dx = da
        grads = []
        for w, b in zip(grad_w, grad_b):
            grads.append(w)
            grads.append(b)
        return grads, (dx[0] if squeezed else dx)

    def state_dict(self) -> dict[str, np.ndarray]:
        out = {}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            out[f"layer{i}.weight"] = w
            out[f"layer{i}.bias"] = b
        return out

    def load_state_dict(self, tensors: dict[str, np.ndarray]) -> None:
        for i in range(len(self.weights)):
            w = tensors[f"layer{i}.weight"]
            b = tensors[f"layer{i}.bias"]
            if w.shape != self.weights[i].shape or b.shape != self.biases[i].shape:
                raise ValueError(f"layer {i} shape mismatch")
            self.weights[i][...] = w
            self.biases[i][...] = b

    def clone(self) -> "DenseNet":
        twin = DenseNet(self.dims, rng=None, dtype=self.dtype)
        twin.load_state_dict(self.state_dict())
        return twin


class LstmCell:
    """Single LSTM cell with gate order i, f, o, g along the stacked axis."""

    def __init__(
        self,
        input_size: int,
        hidden_size: int,
        rng: np.random.Generator | None = None,
        dtype=np.float32,
    ):
        self.input_size = int(input_size)
        self.hidden_size = int(hidden_size)
        self.dtype = np.dtype(dtype)
        h = self.hidden_size
        if rng is None:
            self.W = np.zeros((4 * h, self.input_size), dtype=self.dtype)
            self.U = np.zeros((4 * h, h), dtype=self.dtype)
        else:
            limit = 1.0 / np.sqrt(h)
            self.W = rng.uniform(-limit, limit, size=(4 * h, self.input_size)).astype(
                self.dtype
            )
            self.U = rng.uniform(-limit, limit, size=(4 * h, h)).astype(self.dtype)
        self.b = np.zeros(4 * h, dtype=self.dtype)
        self.b[h : 2 * h] = 1.0  # forget-gate bias

    def parameters(self) -> list[np.ndarray]:
        return [self.W, self.U, self.b]

    def initial_state(self, batch: int | None = None):
        shape = (self.hidden_size,) if batch is None else (batch, self.hidden_size)
        return np.zeros(shape, dtype=self.dtype), np.zeros(shape, dtype=self.dtype)

    def step(self, x: np.ndarray, h_prev: np.ndarray, c_prev: np.ndarray):
        """One step; ``x`` is ``(in,)`` or ``(batch, in)``; returns (h, c, cache)."""
        x = np.asarray(x, dtype=self.dtype)
        if x.shape[-1] != self.input_size:
            raise ValueError(f"input dim {x.shape[-1]} != expected {self.input_size}")
        h = self.hidden_size
        z = x @ self.W.T + h_prev @ self.U.T + self.b
        i = sigmoid(z[..., 0 * h : 1 * h])
        f = sigmoid(z[..., 1 * h : 2 * h])
        o = sigmoid(z[..., 2 * h : 3 * h])
        g = np.tanh(z[..., 3 * h : 4 * h])
        c = f * c_prev + i * g
        tanh_c = np.tanh(c)
        h_new = o * tanh_c
        cache = (x, h_prev, c_prev, i, f, o, g, tanh_c)
        return h_new, c, cache

    def sequence_forward(self, xs: np.ndarray, h0=None, c0=None):
        """Run ``xs`` of shape ``(T, in)`` or ``(T, batch, in)`` through the cell.

        Returns ``(hs, cs, caches)`` with hs/cs stacked along the time axis.
        """
        xs = np.asarray(xs, dtype=self.dtype)
        if h0 is None or c0 is None:
            batch = None if xs.ndim == 2 else xs.shape[1]
            h0, c0 = self.initial_state(batch)
        h, c = h0, c0
        hs, cs, caches = [], [], []
        for t in range(xs.shape[0]):
            h, c, cache = self.step(xs[t], h, c)
            hs.append(h)
            cs.append(c)
            caches.append(cache)
        return np.stack(hs), np.stack(cs), caches

    def sequence_backward(self, caches, dhs: np.ndarray, dc_last=None):
        """Backprop through time.

        ``dhs`` holds the loss gradient w.r.t. each emitted hidden state
        (same shape as ``hs`` from :meth:`sequence_forward`). Returns
        ``(grads, dxs)`` with grads ordered (dW, dU, db).
        """
        if not caches:
            raise ValueError("empty cache list")
        dW = np.zeros_like(self.W)
        dU = np.zeros_like(self.U)
        db = np.zeros_like(self.b)
        dhs = np.asarray(dhs, dtype=self.dtype)
        if len(caches) != dhs.shape[0]:
            raise ValueError("dhs length does not match cached steps")
        dh_next = np.zeros_like(dhs[-1])
        dc_next = np.zeros_like(dhs[-1]) if dc_last is None else dc_last
        dxs = [None] * len(caches)
        for t in range(len(caches) - 1, -1, -1):
            x, h_prev, c_prev, i, f, o, g, tanh_c = caches[t]
            dh = dhs[t] + dh_next
            dc = dc_next + dh * o * (1.0 - tanh_c * tanh_c)
            do = dh * tanh_c
            di = dc * g
            df = dc * c_prev
            dg = dc * i
            dz = np.concatenate(
                [
                    di * i * (1.0 - i),
                    df * f * (1.0 - f),
                    do * o * (1.0 - o),
                    dg * (1.0 - g * g),
                ],
                axis=-1,
            )
            if dz.ndim == 1:
                dW += np.outer(dz, x)
                dU += np.outer(dz, h_prev)
                db += dz
            else:
                dW += dz.T @ x
                dU += dz.T @ h_prev
                db += dz.sum(axis=0)
            dxs[t] = dz @ self.W
            dh_next = dz @ self.U
            dc_next = dc * f
        return [dW, dU, db], np.stack(dxs)

    def state_dict(self) -> dict[str, np.ndarray]:
        return {"lstm.W": self.W, "lstm.U": self.U, "lstm.b": self.b}

    def load_state_dict(self, tensors: dict[str, np.ndarray]) -> None:
        for name, param in (("lstm.W", self.W), ("lstm.U", self.U), ("lstm.b", self.b)):
            if tensors[name].shape != param.shape:
                raise ValueError(f"{name} shape mismatch")
            param[...] = tensors[name]

    def clone(self) -> "LstmCell":
        twin = LstmCell(self.input_size, self.hidden_size, rng=None, dtype=self.dtype)
        twin.load_state_dict(self.state_dict())
        twin.b[...] = self.b
        return twin


class AdamState:
    """Adam optimizer state for a fixed list of parameter arrays."""

    def __init__(
        self,
        params,
        learning_rate: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.learning_rate = float(learning_rate)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def apply(self, params, grads) -> None:
        """One bias-corrected Adam update, in place on ``params``."""
        if len(params) != len(self.m) or len(grads) != len(self.m):
            raise ValueError("parameter/gradient list length mismatch")
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bias1 = 1.0 - b1**self.t
        bias2 = 1.0 - b2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            if p.shape != g.shape:
                raise ValueError(f"shape mismatch: param {p.shape} vs grad {g.shape}")
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * (g * g)
            step = (self.learning_rate / bias1) * m / (np.sqrt(v / bias2) + self.eps)
            p -= step
