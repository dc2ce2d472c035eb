"""Dense networks: forward oracle, exact gradients, optimizers, hyper head."""

import numpy as np
import pytest

from scorelab.core import DomainError, ShapeError, StaleCacheError, TrainingError
from scorelab.neural import (
    Activation,
    DenseNet,
    HyperHead,
    Optimizer,
    grad_check,
    rel_error,
)

from oracles import fd_gradient, forward_oracle


class TestForward:
    def test_identity_single_layer(self):
        net = DenseNet([3, 3], activations=[Activation.IDENTITY], seed=0)
        net.weights[0][:] = np.eye(3)
        net.biases[0][:] = 0.0
        v = np.array([0.3, -1.2, 4.0])
        out, _ = net.forward(v)
        np.testing.assert_array_equal(out, v)

    def test_zero_weights_return_bias(self):
        net = DenseNet([4, 2], activations=[Activation.IDENTITY], seed=0)
        net.weights[0][:] = 0.0
        net.biases[0][:] = [1.5, -2.0]
        out, _ = net.forward(np.array([9.0, 9.0, 9.0, 9.0]))
        np.testing.assert_array_equal(out, [1.5, -2.0])

    def test_matches_independent_oracle(self):
        net = DenseNet([6, 5, 3], seed=42)
        rng = np.random.default_rng(1)
        for _ in range(10):
            x = rng.normal(size=6)
            out, _ = net.forward(x)
            want = forward_oracle(net.weights, net.biases, ["relu", "identity"], x)
            np.testing.assert_allclose(out, want, atol=1e-12)

    def test_sigmoid_matches_oracle(self):
        net = DenseNet([4, 3, 2], activations=[Activation.SIGMOID, Activation.IDENTITY], seed=3)
        x = np.array([0.4, -0.8, 1.1, 0.0])
        out, _ = net.forward(x)
        want = forward_oracle(net.weights, net.biases, ["sigmoid", "identity"], x)
        np.testing.assert_allclose(out, want, atol=1e-12)

    def test_batch_equals_per_sample(self):
        net = DenseNet([5, 4, 2], seed=7)
        rng = np.random.default_rng(2)
        X = rng.normal(size=(6, 5))
        batch_out, _ = net.forward(X)
        for i in range(6):
            single, _ = net.forward(X[i])
            np.testing.assert_allclose(batch_out[i], single, atol=0)

    def test_dimension_mismatch(self):
        net = DenseNet([3, 2], seed=0)
        with pytest.raises(ShapeError):
            net.forward(np.zeros(4))

    def test_bad_dims_rejected(self):
        with pytest.raises(ShapeError):
            DenseNet([4], seed=0)
        with pytest.raises(ShapeError):
            DenseNet([4, 0, 2], seed=0)


class TestBackward:
    def test_single_linear_layer_closed_form(self):
        """MSE on a scalar output: gradient is 2*(y - t) * input."""
        net = DenseNet([3, 1], activations=[Activation.IDENTITY], seed=0)
        x = np.array([0.5, -1.0, 2.0])
        out, cache = net.forward(x)
        t = 0.7
        upstream = np.array([2.0 * (out[0] - t)])
        grads, _ = net.backward(cache, upstream)
        np.testing.assert_allclose(grads["W0"], upstream[0] * x[None, :], atol=1e-14)
        np.testing.assert_allclose(grads["b0"], upstream, atol=1e-14)

    def test_matches_finite_differences(self):
        net = DenseNet([4, 6, 3, 1], seed=5)
        x = np.random.default_rng(3).normal(size=4)
        assert grad_check(net, "mse", x, np.array([1.3])) < 1e-5

    def test_relu_subgradient_zero_at_zero(self):
        net = DenseNet([1, 1, 1], seed=0)
        net.weights[0][:] = 1.0
        net.biases[0][:] = 0.0   # pre-activation exactly 0 for x = 0
        net.weights[1][:] = 1.0
        _, cache = net.forward(np.array([0.0]))
        grads, dx = net.backward(cache, np.array([1.0]))
        assert grads["W0"][0, 0] == 0.0
        assert dx[0] == 0.0

    def test_stale_cache_rejected(self):
        net_a = DenseNet([3, 2], seed=0)
        net_b = DenseNet([3, 2], seed=1)
        _, cache = net_a.forward(np.zeros(3))
        with pytest.raises(StaleCacheError):
            net_b.backward(cache, np.zeros(2))

    def test_upstream_shape_checked(self):
        net = DenseNet([3, 2], seed=0)
        _, cache = net.forward(np.zeros(3))
        with pytest.raises(ShapeError):
            net.backward(cache, np.zeros(3))

    def test_input_gradient_matches_fd(self):
        net = DenseNet([4, 5, 2], seed=9)
        x = np.random.default_rng(4).normal(size=4)
        d = np.array([0.3, -0.7])

        def f(v):
            out, _ = net.forward(v)
            return float(np.dot(out, d))

        _, cache = net.forward(x)
        _, dx = net.backward(cache, d)
        np.testing.assert_allclose(dx, fd_gradient(f, x), atol=1e-7)


class TestGradCheck:
    def test_mlp_mse(self):
        net = DenseNet([8, 4, 1], seed=1)
        x = np.random.default_rng(5).normal(size=8)
        assert grad_check(net, "mse", x, np.array([0.5])) < 1e-5

    def test_ce_head(self):
        net = DenseNet([8, 5], activations=[Activation.IDENTITY], seed=2)
        x = np.random.default_rng(6).normal(size=8)
        assert grad_check(net, "ce", x, 3) < 1e-5

    def test_all_zero_case_exact(self):
        net = DenseNet([3, 2, 1], seed=0)
        for w in net.weights:
            w[:] = 0.0
        assert grad_check(net, "mse", np.zeros(3), np.array([0.0])) == 0.0

    def test_unknown_loss(self):
        with pytest.raises(DomainError):
            grad_check(DenseNet([2, 1], seed=0), "huber", np.zeros(2), 0.0)

    def test_rel_error_scale(self):
        assert rel_error(0.0, 0.0) == 0.0
        assert rel_error(100.0, 101.0) == pytest.approx(1.0 / 101.0)


class TestOptimizer:
    def test_sgd_step_value(self):
        p = {"w": np.array([1.0])}
        Optimizer(kind="sgd", lr=0.1).step(p, {"w": np.array([1.0])})
        assert p["w"][0] == pytest.approx(0.9, abs=1e-15)

    def test_adamw_first_step_opposes_gradient(self):
        p = {"w": np.array([0.0, 0.0])}
        g = {"w": np.array([1.0, -2.0])}
        Optimizer(kind="adamw", lr=0.1).step(p, g)
        assert p["w"][0] < 0.0 and p["w"][1] > 0.0

    def test_sgd_converges_on_quadratic(self):
        """Gradient descent on (p-3)^2 contracts geometrically: |p-3| -> 0.8^n."""
        p = {"w": np.array([0.0])}
        opt = Optimizer(kind="sgd", lr=0.1)
        for _ in range(100):
            opt.step(p, {"w": 2.0 * (p["w"] - 3.0)})
        assert abs(p["w"][0] - 3.0) < 1e-4
        assert abs(p["w"][0] - 3.0) == pytest.approx(3.0 * 0.8**100, rel=1e-9)

    def test_nan_gradient_raises_with_step(self):
        opt = Optimizer(kind="sgd", lr=0.1)
        opt.step({"w": np.array([1.0])}, {"w": np.array([0.1])})
        with pytest.raises(TrainingError) as err:
            opt.step({"w": np.array([1.0])}, {"w": np.array([np.nan])})
        assert err.value.step == 2

    def test_weight_decay_decoupled(self):
        """Zero gradient still shrinks the parameter under AdamW decay."""
        p = {"w": np.array([1.0])}
        Optimizer(kind="adamw", lr=0.1, weight_decay=0.5).step(p, {"w": np.array([0.0])})
        assert p["w"][0] == pytest.approx(1.0 - 0.1 * 0.5, abs=1e-12)

    def test_bad_lr(self):
        with pytest.raises(DomainError):
            Optimizer(lr=0.0)

    def test_training_determinism(self):
        """Same seed and data give bit-identical parameters after N steps."""
        def run():
            net = DenseNet([4, 8, 1], seed=13)
            opt = Optimizer(kind="adamw", lr=1e-2)
            rng = np.random.default_rng(0)
            X = rng.normal(size=(16, 4))
            y = rng.normal(size=(16, 1))
            params = net.params()
            for _ in range(50):
                out, cache = net.forward(X)
                grads, _ = net.backward(cache, 2.0 * (out - y) / 16)
                opt.step(params, grads)
            return {k: v.copy() for k, v in params.items()}

        a, b = run(), run()
        for k in a:
            np.testing.assert_array_equal(a[k], b[k])


class TestHyperHead:
    def test_param_count_invariant(self):
        head = HyperHead(semantic_dim=6, z_dim=6, target_hidden=(8, 4), seed=0)
        want = (6 * 8 + 8) + (8 * 4 + 4) + (4 * 1 + 1)
        assert head.param_count == want
        assert head.mapper.dims[-1] == want

    def test_zero_mapper_gives_zero_output(self):
        head = HyperHead(semantic_dim=4, z_dim=4, target_hidden=(3,), seed=0)
        for w in head.mapper.weights:
            w[:] = 0.0
        y, _ = head.forward(np.ones(4), np.array([5.0, -2.0, 0.3, 1.0]))
        assert y == 0.0

    def test_different_z_different_output(self):
        head = HyperHead(semantic_dim=4, z_dim=4, target_hidden=(3,), seed=1)
        semantic = np.array([0.5, -0.2, 0.9, 0.1])
        y1, _ = head.forward(semantic, np.array([1.0, 0.0, 0.0, 0.0]))
        y2, _ = head.forward(semantic, np.array([0.0, 1.0, 0.0, 0.0]))
        assert y1 != y2

    def test_gradients_through_both_paths(self):
        """Mapper parameters, semantic input, and z all pass FD checks."""
        head = HyperHead(semantic_dim=5, z_dim=5, target_hidden=(4, 3), mapper_hidden=(8,), seed=2)
        rng = np.random.default_rng(7)
        semantic = rng.normal(size=5)
        z = rng.normal(size=5)

        y, cache = head.forward(semantic, z)
        grads, d_sem, d_z = head.backward(cache, 1.0)

        worst = 0.0
        for name, p in head.params().items():
            flat = p.reshape(-1)
            gflat = grads[name].reshape(-1)
            for k in range(flat.size):
                orig = flat[k]
                flat[k] = orig + 1e-5
                up, _ = head.forward(semantic, z)
                flat[k] = orig - 1e-5
                dn, _ = head.forward(semantic, z)
                flat[k] = orig
                worst = max(worst, rel_error(gflat[k], (up - dn) / 2e-5))
        assert worst < 1e-4

        num_sem = fd_gradient(lambda v: head.forward(v, z)[0], semantic)
        num_z = fd_gradient(lambda v: head.forward(semantic, v)[0], z)
        np.testing.assert_allclose(d_sem, num_sem, atol=1e-6)
        np.testing.assert_allclose(d_z, num_z, atol=1e-6)

    def test_z_shape_checked(self):
        head = HyperHead(semantic_dim=4, z_dim=4, target_hidden=(3,), seed=0)
        with pytest.raises(ShapeError):
            head.forward(np.zeros(4), np.zeros(5))

    def test_stale_cache_rejected(self):
        head_a = HyperHead(semantic_dim=3, z_dim=3, target_hidden=(2,), seed=0)
        head_b = HyperHead(semantic_dim=3, z_dim=3, target_hidden=(2,), seed=1)
        _, cache = head_a.forward(np.zeros(3), np.zeros(3))
        with pytest.raises(StaleCacheError):
            head_b.backward(cache, 1.0)
