"""Tests for the numeric core: dense nets, LSTM cell, Adam, losses.

Gradient correctness is established against an independent central
finite-difference oracle in 64-bit mode; forward passes are checked
against hand-computed values frozen before the implementation existed.
"""

from __future__ import annotations

import numpy as np
import pytest

from wizrl import nn

# ---------------------------------------------------------------------------
# Finite-difference oracle
# ---------------------------------------------------------------------------


def finite_difference(loss_fn, arrays, eps=1e-6):
    """Central finite-difference gradients of ``loss_fn()`` w.r.t. ``arrays``.

    ``loss_fn`` must be a zero-argument callable reading the (mutated)
    arrays; every element is perturbed in place and restored.
    """
    grads = []
    for a in arrays:
        g = np.zeros_like(a)
        it = np.nditer(a, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = a[idx]
            a[idx] = orig + eps
            up = loss_fn()
            a[idx] = orig - eps
            down = loss_fn()
            a[idx] = orig
            g[idx] = (up - down) / (2 * eps)
        grads.append(g)
    return grads


def rel_error(a, b):
    na = np.linalg.norm(np.asarray(a).ravel())
    nb = np.linalg.norm(np.asarray(b).ravel())
    return np.linalg.norm((np.asarray(a) - np.asarray(b)).ravel()) / (na + nb + 1e-12)


def reference_lstm_step(W, U, b, x, h_prev, c_prev):
    """Naive, loop-free reference of one LSTM step (gates i, f, o, g)."""

    def sig(z):
        return 1.0 / (1.0 + np.exp(-z))

    hsize = h_prev.shape[-1]
    z = W @ x + U @ h_prev + b
    i = sig(z[0 * hsize : 1 * hsize])
    f = sig(z[1 * hsize : 2 * hsize])
    o = sig(z[2 * hsize : 3 * hsize])
    g = np.tanh(z[3 * hsize : 4 * hsize])
    c = f * c_prev + i * g
    h = o * np.tanh(c)
    return h, c


# ---------------------------------------------------------------------------
# DenseNet forward
# ---------------------------------------------------------------------------


def test_forward_zero_parameters_gives_zero():
    net = nn.DenseNet([3, 4, 2], rng=np.random.default_rng(0))
    for p in net.parameters():
        p[...] = 0.0
    out = net.forward(np.ones(3, dtype=np.float32))
    assert out.shape == (2,)
    assert not out.any()


def test_forward_identity_single_layer():
    net = nn.DenseNet([3, 3], rng=np.random.default_rng(0))
    w, b = net.parameters()
    w[...] = np.eye(3)
    b[...] = 0.0
    x = np.array([0.5, -2.0, 3.25], dtype=np.float32)
    assert np.allclose(net.forward(x), x)


def test_forward_hand_computed_2_2_1():
    # W1 = [[1,2],[3,4]], b1 = [0.5,-0.5], ReLU, W2 = [[1,-1]], b2 = [0.25]
    # input [1,1]: pre = [3.5, 6.5] -> ReLU unchanged -> 3.5 - 6.5 + 0.25
    net = nn.DenseNet([2, 2, 1], rng=np.random.default_rng(0))
    w1, b1, w2, b2 = net.parameters()
    w1[...] = [[1.0, 2.0], [3.0, 4.0]]
    b1[...] = [0.5, -0.5]
    w2[...] = [[1.0, -1.0]]
    b2[...] = 0.25
    out = net.forward(np.array([1.0, 1.0], dtype=np.float32))
    assert out[0] == pytest.approx(-2.75)
    # hidden ReLU actually clips: input [1,-1] -> pre = [-0.5,-1.5] -> zeros
    out = net.forward(np.array([1.0, -1.0], dtype=np.float32))
    assert out[0] == pytest.approx(0.25)


def test_forward_batched_matches_single():
    net = nn.DenseNet([5, 8, 3], rng=np.random.default_rng(3))
    xs = np.random.default_rng(4).normal(size=(6, 5)).astype(np.float32)
    batched = net.forward(xs)
    assert batched.shape == (6, 3)
    for i in range(6):
        assert np.allclose(batched[i], net.forward(xs[i]), atol=1e-6)


def test_forward_shape_mismatch_rejected():
    net = nn.DenseNet([3, 2], rng=np.random.default_rng(0))
    with pytest.raises(ValueError):
        net.forward(np.zeros(4, dtype=np.float32))


def test_forward_is_pure():
    net = nn.DenseNet([4, 6, 2], rng=np.random.default_rng(5))
    x = np.random.default_rng(6).normal(size=4).astype(np.float32)
    a = net.forward(x)
    b = net.forward(x)
    assert np.array_equal(a, b)


def test_initialization_finite_on_masked_inputs():
    rng = np.random.default_rng(7)
    net = nn.DenseNet([147, 256, 256, 256, 60], rng=rng)
    for _ in range(10):
        x = (rng.random(147) < 0.3).astype(np.float32)
        out = net.forward(x)
        assert np.isfinite(out).all()


# ---------------------------------------------------------------------------
# DenseNet backward vs finite differences
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(100))
def test_dense_gradients_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    dims = [int(rng.integers(2, 7)) for _ in range(int(rng.integers(2, 5)))]
    batch = int(rng.integers(1, 5))
    net = nn.DenseNet(dims, rng=rng, dtype=np.float64)
    for p in net.parameters():
        # keep pre-activations away from the ReLU kink, where the loss is
        # not differentiable and finite differences are meaningless
        p += rng.normal(scale=0.1, size=p.shape)
    x = rng.normal(size=(batch, dims[0]))
    target = rng.normal(size=(batch, dims[-1]))

    def loss_fn():
        return nn.mse_loss(net.forward(x), target)[0]

    out, cache = net.forward_cached(x)
    _, dy = nn.mse_loss(out, target)
    grads, dx = net.backward(cache, dy)

    numeric = finite_difference(loss_fn, net.parameters())
    for analytic, fd in zip(grads, numeric):
        assert rel_error(analytic, fd) < 1e-5
    numeric_dx = finite_difference(loss_fn, [x])[0]
    assert rel_error(dx, numeric_dx) < 1e-5


def test_dense_gradient_zero_at_perfect_prediction():
    rng = np.random.default_rng(1)
    net = nn.DenseNet([3, 4, 2], rng=rng, dtype=np.float64)
    x = rng.normal(size=(2, 3))
    out, cache = net.forward_cached(x)
    loss, dy = nn.mse_loss(out, out.copy())
    assert loss == 0.0
    grads, dx = net.backward(cache, dy)
    for g in grads:
        assert not g.any()
    assert not dx.any()


def test_dense_dead_relu_unit_gets_zero_gradient():
    net = nn.DenseNet([2, 2, 1], rng=np.random.default_rng(0), dtype=np.float64)
    w1, b1, w2, b2 = net.parameters()
    w1[...] = [[1.0, 0.0], [-1.0, 0.0]]  # unit 1 pre-activation = -x0
    b1[...] = 0.0
    w2[...] = [[1.0, 1.0]]
    b2[...] = 0.0
    x = np.array([[2.0, 3.0]])
    out, cache = net.forward_cached(x)
    grads, _ = net.backward(cache, np.ones_like(out))
    dw1 = grads[0]
    assert not dw1[1].any()  # dead unit's row
    assert dw1[0].any()


def test_backward_requires_cache_from_forward():
    net = nn.DenseNet([2, 2], rng=np.random.default_rng(0))
    with pytest.raises((TypeError, ValueError)):
        net.backward(None, np.ones((1, 2), dtype=np.float32))


# ---------------------------------------------------------------------------
# LSTM cell
# ---------------------------------------------------------------------------


def test_lstm_zero_parameters_zero_state_gives_zero_h():
    cell = nn.LstmCell(4, 5, rng=np.random.default_rng(0))
    for p in cell.parameters():
        p[...] = 0.0
    h, c = cell.initial_state()
    h2, c2, _ = cell.step(np.ones(4, dtype=np.float32), h, c)
    assert not h2.any()
    assert not c2.any()


def test_lstm_saturated_forget_gate_preserves_cell():
    cell = nn.LstmCell(3, 4, rng=np.random.default_rng(0), dtype=np.float64)
    for p in cell.parameters():
        p[...] = 0.0
    cell.b[4:8] = 25.0  # forget gate saturated at 1
    c_prev = np.array([0.3, -1.2, 0.8, 2.0])
    h_prev = np.zeros(4)
    # zero candidate weights => input term i*g = sigma(0)*tanh(0) = 0
    _, c_next, _ = cell.step(np.zeros(3), h_prev, c_prev)
    assert np.allclose(c_next, c_prev, atol=1e-9)


@pytest.mark.parametrize("seed", range(20))
def test_lstm_step_matches_reference(seed):
    rng = np.random.default_rng(seed)
    insize, hsize = int(rng.integers(2, 5)), int(rng.integers(2, 6))
    cell = nn.LstmCell(insize, hsize, rng=rng, dtype=np.float64)
    x = rng.normal(size=insize)
    h_prev = rng.normal(size=hsize)
    c_prev = rng.normal(size=hsize)
    h, c, _ = cell.step(x, h_prev, c_prev)
    h_ref, c_ref = reference_lstm_step(cell.W, cell.U, cell.b, x, h_prev, c_prev)
    assert np.allclose(h, h_ref, atol=1e-12)
    assert np.allclose(c, c_ref, atol=1e-12)


def test_lstm_shape_mismatch_rejected():
    cell = nn.LstmCell(3, 4, rng=np.random.default_rng(0))
    h, c = cell.initial_state()
    with pytest.raises(ValueError):
        cell.step(np.zeros(5, dtype=np.float32), h, c)


@pytest.mark.parametrize("seed", range(100))
def test_lstm_sequence_gradients_match_finite_differences(seed):
    rng = np.random.default_rng(1000 + seed)
    insize = int(rng.integers(2, 5))
    hsize = int(rng.integers(2, 6))
    steps = int(rng.integers(2, 5))
    cell = nn.LstmCell(insize, hsize, rng=rng, dtype=np.float64)
    xs = rng.normal(size=(steps, insize))
    target = rng.normal(size=(steps, hsize))

    def loss_fn():
        hs, _, _ = cell.sequence_forward(xs)
        return nn.mse_loss(hs, target)[0]

    hs, _, caches = cell.sequence_forward(xs)
    _, dhs = nn.mse_loss(hs, target)
    grads, dxs = cell.sequence_backward(caches, dhs)

    numeric = finite_difference(loss_fn, cell.parameters())
    for analytic, fd in zip(grads, numeric):
        assert rel_error(analytic, fd) < 1e-5
    numeric_dx = finite_difference(loss_fn, [xs])[0]
    assert rel_error(dxs, numeric_dx) < 1e-5


def test_lstm_sequence_forward_states_chain():
    rng = np.random.default_rng(9)
    cell = nn.LstmCell(3, 4, rng=rng, dtype=np.float64)
    xs = rng.normal(size=(5, 3))
    hs, cs, _ = cell.sequence_forward(xs)
    h, c = cell.initial_state()
    for t in range(5):
        h, c, _ = cell.step(xs[t], h, c)
        assert np.allclose(hs[t], h)
        assert np.allclose(cs[t], c)


# ---------------------------------------------------------------------------
# Losses
# ---------------------------------------------------------------------------


def test_mse_equal_tensors_zero():
    x = np.array([1.0, 2.0, 3.0])
    loss, grad = nn.mse_loss(x, x.copy())
    assert loss == 0.0
    assert not grad.any()


def test_mse_hand_computed():
    loss, grad = nn.mse_loss(np.array([1.0, 0.0]), np.array([0.0, 0.0]))
    assert loss == pytest.approx(0.5)
    assert np.allclose(grad, [1.0, 0.0])  # 2*(pred-target)/N with N=2


def test_mse_gradient_formula():
    rng = np.random.default_rng(2)
    pred = rng.normal(size=(3, 4))
    target = rng.normal(size=(3, 4))
    _, grad = nn.mse_loss(pred, target)
    assert np.allclose(grad, 2.0 * (pred - target) / pred.size)


def test_mse_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        nn.mse_loss(np.zeros(3), np.zeros(4))


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------


def test_adam_first_step_moves_by_learning_rate():
    lr = 0.0005
    params = [np.array([0.0])]
    opt = nn.AdamState(params, learning_rate=lr)
    opt.apply(params, [np.array([3.0])])
    # bias-corrected first step: delta = -lr * g / (|g| + eps) ~= -lr
    assert params[0][0] == pytest.approx(-lr, rel=1e-5)
    opt2 = nn.AdamState([np.array([0.0])], learning_rate=lr)
    params2 = [np.array([0.0])]
    opt2 = nn.AdamState(params2, learning_rate=lr)
    opt2.apply(params2, [np.array([-3.0])])
    assert params2[0][0] == pytest.approx(lr, rel=1e-5)


def test_adam_zero_gradient_keeps_parameters_increments_t():
    params = [np.array([1.5, -2.0])]
    opt = nn.AdamState(params, learning_rate=0.1)
    opt.apply(params, [np.zeros(2)])
    assert np.allclose(params[0], [1.5, -2.0])
    assert opt.t == 1


def test_adam_constant_gradient_monotone():
    params = [np.array([0.0])]
    opt = nn.AdamState(params, learning_rate=0.01)
    history = [0.0]
    for _ in range(5):
        opt.apply(params, [np.array([2.0])])
        history.append(float(params[0][0]))
    assert all(b < a for a, b in zip(history, history[1:]))


def test_adam_shape_mismatch_rejected():
    params = [np.zeros(3)]
    opt = nn.AdamState(params, learning_rate=0.1)
    with pytest.raises(ValueError):
        opt.apply(params, [np.zeros(4)])


def test_adam_defaults():
    opt = nn.AdamState([np.zeros(1)], learning_rate=0.1)
    assert opt.beta1 == 0.9
    assert opt.beta2 == 0.999
    assert opt.eps == 1e-8


# ---------------------------------------------------------------------------
# blend_parameters
# ---------------------------------------------------------------------------


def test_blend_identical_unchanged():
    target = [np.array([1.0, 2.0])]
    online = [np.array([1.0, 2.0])]
    nn.blend_parameters(target, online, tau=0.1)
    assert np.allclose(target[0], [1.0, 2.0])


def test_blend_ten_percent():
    target = [np.zeros(4)]
    online = [np.ones(4)]
    nn.blend_parameters(target, online, tau=0.1)
    assert np.allclose(target[0], 0.1)


def test_blend_geometric_approach():
    target = [np.zeros(1)]
    online = [np.ones(1)]
    for _ in range(10):
        nn.blend_parameters(target, online, tau=0.1)
    assert target[0][0] == pytest.approx(1.0 - 0.9**10)
    assert target[0][0] == pytest.approx(0.6513215599, abs=1e-9)


def test_blend_contraction():
    rng = np.random.default_rng(3)
    target = [rng.normal(size=(3, 3))]
    online = [rng.normal(size=(3, 3))]
    before = np.abs(target[0] - online[0]).max()
    nn.blend_parameters(target, online, tau=0.1)
    after = np.abs(target[0] - online[0]).max()
    assert after < before


def test_blend_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        nn.blend_parameters([np.zeros(2)], [np.zeros(3)], tau=0.1)


# ---------------------------------------------------------------------------
# state_dict round trips
# ---------------------------------------------------------------------------


def test_dense_state_dict_roundtrip():
    net = nn.DenseNet([4, 8, 2], rng=np.random.default_rng(10))
    other = nn.DenseNet([4, 8, 2], rng=np.random.default_rng(11))
    x = np.random.default_rng(12).normal(size=4).astype(np.float32)
    assert not np.allclose(net.forward(x), other.forward(x))
    other.load_state_dict(net.state_dict())
    assert np.array_equal(net.forward(x), other.forward(x))


def test_lstm_state_dict_roundtrip():
    cell = nn.LstmCell(3, 5, rng=np.random.default_rng(13))
    other = nn.LstmCell(3, 5, rng=np.random.default_rng(14))
    other.load_state_dict(cell.state_dict())
    for a, b in zip(cell.parameters(), other.parameters()):
        assert np.array_equal(a, b)


def test_dense_clone_is_independent():
    net = nn.DenseNet([3, 4, 2], rng=np.random.default_rng(15))
    twin = net.clone()
    x = np.random.default_rng(16).normal(size=3).astype(np.float32)
    assert np.array_equal(net.forward(x), twin.forward(x))
    twin.parameters()[0][...] += 1.0
    assert not np.array_equal(net.forward(x), twin.forward(x))
