import math

import numpy as np
import pytest

from intentgan import nn
from intentgan.errors import NumericError
from intentgan.rng import Rng

from oracles import central_difference, mp_softmax_xent, rel_err


def float64_mlp(dims, seed, dropout=0.0):
    spec = nn.MLPSpec(tuple(dims), dropout_rate=dropout)
    return nn.init_mlp(spec, Rng(seed).split("init"), dtype=np.float64)


class TestInit:
    def test_biases_zero_and_weights_in_range(self):
        mlp = float64_mlp([4, 8, 3], seed=0)
        for layer in mlp.layers:
            assert np.all(layer.b == 0.0)
            a = math.sqrt(6.0 / (layer.w.shape[1] + layer.w.shape[0]))
            assert np.all(np.abs(layer.w) < a)

    def test_same_seed_same_parameters(self):
        a = float64_mlp([5, 7, 2], seed=3)
        b = float64_mlp([5, 7, 2], seed=3)
        for pa, pb in zip(a.parameters(), b.parameters()):
            assert np.array_equal(pa, pb)

    def test_default_storage_is_float32(self):
        mlp = nn.init_mlp(nn.MLPSpec((3, 4, 2)), Rng(0))
        assert all(p.dtype == np.float32 for p in mlp.parameters())


class TestForward:
    def test_leaky_relu_hidden_value(self):
        mlp = float64_mlp([2, 2, 2], seed=0)
        mlp.layers[0].w = np.eye(2)
        mlp.layers[0].b = np.zeros(2)
        cache = nn.forward(mlp, np.array([[-1.0, 3.0]]))
        assert cache.penultimate.tolist() == [[-0.2, 3.0]]

    def test_zero_dropout_train_equals_eval(self):
        mlp = float64_mlp([3, 5, 2], seed=1)
        x = Rng(2).normal(12).reshape(4, 3)
        train = nn.forward(mlp, x, train=True, rng=Rng(0))
        eval_ = nn.forward(mlp, x, train=False)
        assert np.array_equal(train.logits, eval_.logits)

    def test_eval_is_pure(self):
        mlp = float64_mlp([3, 5, 2], seed=1, dropout=0.5)
        x = Rng(2).normal(6).reshape(2, 3)
        a = nn.forward(mlp, x)
        b = nn.forward(mlp, x)
        assert np.array_equal(a.logits, b.logits)

    def test_dropout_masks_are_seeded(self):
        mlp = float64_mlp([3, 50, 2], seed=1, dropout=0.5)
        x = Rng(2).normal(3).reshape(1, 3)
        a = nn.forward(mlp, x, train=True, rng=Rng(9).split("d"))
        b = nn.forward(mlp, x, train=True, rng=Rng(9).split("d"))
        c = nn.forward(mlp, x, train=True, rng=Rng(10).split("d"))
        assert np.array_equal(a.logits, b.logits)
        assert not np.array_equal(a.logits, c.logits)

    def test_inverted_dropout_preserves_expectation(self):
        mlp = float64_mlp([3, 6, 2], seed=4, dropout=0.3)
        x = Rng(5).normal(3).reshape(1, 3)
        clean = nn.forward(mlp, x).penultimate
        total = np.zeros_like(clean)
        n = 4000
        for s in range(n):
            total += nn.forward(mlp, x, train=True, rng=Rng(s)).penultimate
        mean = total / n
        se = np.abs(clean) * math.sqrt(0.3 / 0.7 / n) + 1e-9
        assert np.all(np.abs(mean - clean) < 5 * se)

    def test_shape_mismatch_raises(self):
        mlp = float64_mlp([3, 4, 2], seed=0)
        with pytest.raises(NumericError, match="does not match input dim"):
            nn.forward(mlp, np.zeros((2, 5)))

    def test_non_finite_input_raises(self):
        mlp = float64_mlp([2, 3, 2], seed=0)
        with pytest.raises(NumericError):
            nn.forward(mlp, np.array([[1.0, np.nan]]))


def xent_loss_through(mlp, x, targets, dropout_seed=None):
    def loss():
        rng = None if dropout_seed is None else Rng(dropout_seed).split("fd")
        cache = nn.forward(mlp, x, train=dropout_seed is not None, rng=rng)
        value, _ = nn.softmax_xent(cache.logits, targets)
        return value
    return loss


def assert_margin(mlp, x, dropout_seed=None, margin=2e-3):
    # Finite differences are only valid away from the leaky-ReLU kink.
    rng = None if dropout_seed is None else Rng(dropout_seed).split("fd")
    cache = nn.forward(mlp, x, train=dropout_seed is not None, rng=rng)
    for z in cache.pre_acts:
        assert np.min(np.abs(z)) > margin, "fixture too close to activation kink; pick another seed"


class TestBackward:
    def fd_check(self, dims, seed, dropout_seed=None, dropout=0.0):
        mlp = float64_mlp(dims, seed=seed, dropout=dropout)
        x = Rng(seed).split("x").normal(3 * dims[0]).reshape(3, dims[0])
        targets = np.array([i % dims[-1] for i in range(3)])
        assert_margin(mlp, x, dropout_seed)
        loss_fn = xent_loss_through(mlp, x, targets, dropout_seed)

        rng = None if dropout_seed is None else Rng(dropout_seed).split("fd")
        cache = nn.forward(mlp, x, train=dropout_seed is not None, rng=rng)
        _, dlogits = nn.softmax_xent(cache.logits, targets)
        grads = nn.backward(mlp, cache, dlogits, need_input_grad=True)

        for p, g in zip(mlp.parameters(), grads.flat()):
            def f_of_param(vals, p=p):
                saved = p.copy()
                p[...] = vals.reshape(p.shape)
                try:
                    return loss_fn()
                finally:
                    p[...] = saved
            fd = central_difference(f_of_param, p.ravel()).reshape(p.shape)
            assert rel_err(fd, g) < 1e-4

        def f_of_input(vals):
            nonlocal x
            saved = x
            x = vals.reshape(saved.shape)
            try:
                return xent_loss_through(mlp, x, targets, dropout_seed)()
            finally:
                x = saved
        fd_x = central_difference(f_of_input, x.ravel()).reshape(x.shape)
        assert rel_err(fd_x, grads.wrt_input) < 1e-4

    def test_gradients_match_finite_differences(self):
        self.fd_check([4, 8, 3], seed=0)

    def test_gradients_match_with_two_hidden_layers(self):
        self.fd_check([5, 6, 4, 3], seed=2)

    def test_gradients_match_under_fixed_dropout(self):
        self.fd_check([4, 8, 3], seed=2, dropout_seed=7, dropout=0.4)

    def test_zero_upstream_grad_gives_zero_gradients(self):
        mlp = float64_mlp([3, 4, 2], seed=0)
        x = Rng(1).normal(6).reshape(2, 3)
        cache = nn.forward(mlp, x)
        grads = nn.backward(mlp, cache, np.zeros_like(cache.logits), need_input_grad=True)
        assert all(np.all(g == 0.0) for g in grads.flat())
        assert np.all(grads.wrt_input == 0.0)

    def test_penultimate_injection_reaches_input(self):
        mlp = float64_mlp([3, 4, 2], seed=0)
        x = Rng(1).normal(3).reshape(1, 3)
        assert_margin(mlp, x)
        cache = nn.forward(mlp, x)

        target = Rng(2).normal(4)

        def fm_loss():
            c = nn.forward(mlp, x)
            d = c.penultimate[0] - target
            return float(d @ d)

        cache = nn.forward(mlp, x)
        dpen = 2.0 * (cache.penultimate - target)
        grads = nn.backward(mlp, cache, np.zeros_like(cache.logits), grad_wrt_penultimate=dpen)
        for p, g in zip(mlp.parameters()[:2], grads.flat()[:2]):
            def f_of_param(vals, p=p):
                saved = p.copy()
                p[...] = vals.reshape(p.shape)
                try:
                    return fm_loss()
                finally:
                    p[...] = saved
            fd = central_difference(f_of_param, p.ravel()).reshape(p.shape)
            assert rel_err(fd, g) < 1e-4


class TestSoftmaxXent:
    def test_uniform_logits_loss_is_log_c(self):
        logits = np.zeros((4, 31))
        loss, _ = nn.softmax_xent(logits, np.arange(4) % 31)
        assert loss == pytest.approx(math.log(31), abs=1e-12)

    def test_loss_vanishes_with_margin(self):
        losses = []
        for margin in (1.0, 5.0, 20.0, 80.0):
            logits = np.zeros((1, 5))
            logits[0, 2] = margin
            loss, _ = nn.softmax_xent(logits, np.array([2]))
            losses.append(loss)
        assert all(a > b for a, b in zip(losses, losses[1:]))
        assert losses[-1] < 1e-30

    def test_random_case_matches_mpmath(self):
        logits = Rng(13).normal(20).reshape(4, 5) * 3.0
        targets = [1, 4, 0, 2]
        loss, grad = nn.softmax_xent(logits, np.array(targets))
        want_loss, want_grad = mp_softmax_xent(logits.tolist(), targets)
        assert loss == pytest.approx(want_loss, rel=1e-12)
        assert np.allclose(grad, np.array(want_grad), rtol=1e-11, atol=1e-15)

    def test_gradient_rows_sum_to_zero(self):
        logits = Rng(3).normal(12).reshape(3, 4)
        _, grad = nn.softmax_xent(logits, np.array([0, 1, 2]))
        assert np.allclose(grad.sum(axis=1), 0.0, atol=1e-15)


class TestLogSumExp:
    def test_single_element(self):
        assert nn.logsumexp(np.array([[3.7]]), axis=1)[0] == pytest.approx(3.7, abs=0)

    def test_shift_invariance(self):
        x = Rng(4).normal(8).reshape(1, 8) * 10
        base = nn.logsumexp(x, axis=1)[0]
        shifted = nn.logsumexp(x + 123.456, axis=1)[0]
        assert shifted - base == pytest.approx(123.456, abs=1e-12)

    def test_31_zeros(self):
        assert nn.logsumexp(np.zeros((1, 31)), axis=1)[0] == pytest.approx(math.log(31), abs=1e-12)

    def test_extreme_magnitudes_stay_finite(self):
        x = np.array([[1000.0, -1000.0, 999.0]])
        out = nn.logsumexp(x, axis=1)[0]
        assert math.isfinite(out)
        assert out == pytest.approx(1000.0 + math.log(1 + math.exp(-1.0)), rel=1e-15)


def reference_adam_scalar(theta, grads, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    m = v = 0.0
    out = []
    for t, g in enumerate(grads, start=1):
        m = beta1 * m + (1 - beta1) * g
        v = beta2 * v + (1 - beta2) * g * g
        mh = m / (1 - beta1**t)
        vh = v / (1 - beta2**t)
        theta -= lr * mh / (math.sqrt(vh) + eps)
        out.append(theta)
    return out


class TestAdam:
    def test_zero_gradient_leaves_parameters(self):
        p = np.array([1.0, -2.0])
        state = nn.AdamState([p], lr=0.01)
        nn.adam_step([p], [np.zeros(2)], state)
        assert p.tolist() == [1.0, -2.0]
        assert state.t == 1

    def test_first_step_closed_form(self):
        g = 0.5
        p = np.array([0.0])
        nn.adam_step([p], [np.array([g])], nn.AdamState([p], lr=0.01))
        expected = -0.01 * g / (abs(g) + 1e-8)
        assert p[0] == pytest.approx(expected, rel=1e-12)
        assert p[0] == pytest.approx(-0.00999999, abs=1e-8)

    def test_quadratic_descent_matches_reference_loop(self):
        theta = np.array([1.0])
        state = nn.AdamState([theta], lr=0.01)
        trajectory = []
        ref_grads = []
        t = 1.0
        for _ in range(100):
            ref_grads.append(2.0 * t)
            t = reference_adam_scalar(t, [ref_grads[-1]], 0.01)[0]
        # re-run reference with evolving state
        m = v = 0.0
        ref_theta = 1.0
        ref_traj = []
        for step in range(1, 101):
            g = 2.0 * ref_theta
            m = 0.9 * m + 0.1 * g
            v = 0.999 * v + 0.001 * g * g
            ref_theta -= 0.01 * (m / (1 - 0.9**step)) / (math.sqrt(v / (1 - 0.999**step)) + 1e-8)
            ref_traj.append(ref_theta)
        for _ in range(100):
            nn.adam_step([theta], [2.0 * theta], state)
            trajectory.append(float(theta[0]))
        assert np.allclose(trajectory, ref_traj, rtol=1e-12)
        mags = [abs(v) for v in trajectory]
        assert all(a > b for a, b in zip(mags, mags[1:]))

    def test_float32_storage_is_preserved(self):
        p = np.array([1.0], dtype=np.float32)
        state = nn.AdamState([p], lr=0.01)
        nn.adam_step([p], [np.array([0.5])], state)
        assert p.dtype == np.float32

    def test_non_finite_update_aborts(self):
        p = np.array([1.0])
        state = nn.AdamState([p], lr=0.01)
        with pytest.raises(NumericError):
            nn.adam_step([p], [np.array([np.inf])], state)
