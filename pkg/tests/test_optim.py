"""Adam and rectified-Adam update rules."""

import numpy as np
import pytest

from wranksim.exceptions import DomainError, ValidationError
from wranksim.optim import (
    OptimConfig,
    OptimizerKind,
    OptimizerState,
    optimizer_step,
)


def manual_rectification(t, beta2):
    rho_inf = 2.0 / (1.0 - beta2) - 1.0
    rho_t = rho_inf - 2.0 * t * beta2**t / (1.0 - beta2**t)
    if rho_t <= 4.0:
        return False, 1.0
    num = (rho_t - 4.0) * (rho_t - 2.0) * rho_inf
    den = (rho_inf - 4.0) * (rho_inf - 2.0) * rho_t
    return True, np.sqrt(num / den)


def manual_update(p, g, m, v, t, cfg):
    """Reference re-implementation of one optimizer step on scalars."""
    p = p * (1.0 - cfg.lr * cfg.weight_decay)
    m = cfg.beta1 * m + (1 - cfg.beta1) * g
    v = cfg.beta2 * v + (1 - cfg.beta2) * g * g
    m_hat = m / (1 - cfg.beta1**t)
    if cfg.kind is OptimizerKind.ADAM:
        adaptive, factor = True, 1.0
    else:
        adaptive, factor = manual_rectification(t, cfg.beta2)
    if adaptive:
        v_hat = np.sqrt(v / (1 - cfg.beta2**t))
        p = p - cfg.lr * factor * m_hat / (v_hat + cfg.eps)
    else:
        p = p - cfg.lr * m_hat
    return p, m, v


class TestOptimConfig:
    def test_defaults(self):
        cfg = OptimConfig()
        assert cfg.kind is OptimizerKind.RADAM
        assert (cfg.beta1, cfg.beta2) == (0.9, 0.999)

    def test_rejects_bad_values(self):
        with pytest.raises(ValidationError, match="lr"):
            OptimConfig(lr=0.0)
        with pytest.raises(ValidationError, match="weight_decay"):
            OptimConfig(weight_decay=-1e-3)
        with pytest.raises(ValidationError, match="beta1"):
            OptimConfig(beta1=1.0)
        with pytest.raises(ValidationError, match="beta2"):
            OptimConfig(beta2=-0.1)
        with pytest.raises(ValidationError, match="eps"):
            OptimConfig(eps=0.0)

    def test_rejects_decay_factor_at_or_above_one(self):
        with pytest.raises(ValidationError, match="lr \\* weight_decay"):
            OptimConfig(lr=2.0, weight_decay=0.5)

    def test_kind_from_name(self):
        assert OptimizerKind.from_name("Adam") is OptimizerKind.ADAM
        with pytest.raises(ValidationError, match="adam, radam"):
            OptimizerKind.from_name("sgd")


class TestAdam:
    def test_zero_gradients_no_decay_leave_params_unchanged(self):
        cfg = OptimConfig(kind=OptimizerKind.ADAM, lr=1e-3, weight_decay=0.0)
        params = [np.array([1.0, -2.0]), np.array([[3.0]])]
        state = OptimizerState.for_params(params)
        new_params, _ = optimizer_step(
            params, [np.zeros(2), np.zeros((1, 1))], state, cfg)
        for p, q in zip(params, new_params):
            np.testing.assert_array_equal(p, q)

    def test_first_step_magnitude_near_lr(self):
        # m_hat = g and sqrt(v_hat) = |g| on step one, so the update is
        # lr * g / (|g| + eps): one learning rate per coordinate, sign of g
        cfg = OptimConfig(kind=OptimizerKind.ADAM, lr=0.01, weight_decay=0.0)
        params = [np.array([5.0, -5.0])]
        grads = [np.array([2.0, -3.0])]
        state = OptimizerState.for_params(params)
        new_params, _ = optimizer_step(params, grads, state, cfg)
        expected = [5.0 - 0.01 * 2.0 / (2.0 + cfg.eps),
                    -5.0 + 0.01 * 3.0 / (3.0 + cfg.eps)]
        np.testing.assert_allclose(new_params[0], expected, rtol=1e-15)

    def test_matches_manual_two_steps(self):
        cfg = OptimConfig(kind=OptimizerKind.ADAM, lr=0.1, weight_decay=0.0)
        params = [np.array([1.0])]
        state = OptimizerState.for_params(params)
        p, m, v = 1.0, 0.0, 0.0
        for t in (1, 2):
            g = 0.5 * t
            params, state = optimizer_step(params, [np.array([g])], state, cfg)
            p, m, v = manual_update(p, g, m, v, t, cfg)
            np.testing.assert_allclose(params[0], [p], rtol=1e-12)

    def test_decoupled_weight_decay_applied_before_update(self):
        cfg = OptimConfig(kind=OptimizerKind.ADAM, lr=0.1, weight_decay=0.5)
        params = [np.array([2.0])]
        grads = [np.array([1.0])]
        state = OptimizerState.for_params(params)
        new_params, _ = optimizer_step(params, grads, state, cfg)
        # p * (1 - lr*wd) = 2 * 0.95, then the moment-based step
        expected = 2.0 * 0.95 - 0.1 * 1.0 / (1.0 + cfg.eps)
        np.testing.assert_allclose(new_params[0], [expected], rtol=1e-15)

    def test_step_is_pure(self):
        cfg = OptimConfig(kind=OptimizerKind.ADAM)
        params = [np.array([1.0, 2.0])]
        grads = [np.array([0.3, -0.4])]
        state = OptimizerState.for_params(params)
        before_p = params[0].copy()
        before_m = state.m[0].copy()
        new_params, new_state = optimizer_step(params, grads, state, cfg)
        np.testing.assert_array_equal(params[0], before_p)
        np.testing.assert_array_equal(state.m[0], before_m)
        assert state.step == 0
        assert new_state.step == 1
        assert new_params[0] is not params[0]

    def test_shape_mismatch_rejected(self):
        cfg = OptimConfig()
        params = [np.zeros(2)]
        state = OptimizerState.for_params(params)
        with pytest.raises(DomainError, match="shape"):
            optimizer_step(params, [np.zeros(3)], state, cfg)
        with pytest.raises(DomainError, match="mismatch"):
            optimizer_step(params, [np.zeros(2), np.zeros(1)], state, cfg)


class TestRadam:
    def test_rectification_threshold(self):
        # for beta2 = 0.999 the variance term is tractable from step 5 on
        for t in (1, 2, 3, 4):
            adaptive, _ = manual_rectification(t, 0.999)
            assert not adaptive
        adaptive, factor = manual_rectification(5, 0.999)
        assert adaptive and 0.0 < factor < 1.0

    def test_early_steps_use_unadapted_momentum(self):
        cfg = OptimConfig(kind=OptimizerKind.RADAM, lr=0.01, weight_decay=0.0)
        params = [np.array([1.0])]
        grads = [np.array([0.7])]
        state = OptimizerState.for_params(params)
        new_params, _ = optimizer_step(params, grads, state, cfg)
        # t=1: not rectified, update is lr * m_hat and m_hat = g exactly
        np.testing.assert_allclose(new_params[0], [1.0 - 0.01 * 0.7],
                                   rtol=1e-12)

    def test_trajectory_matches_manual(self):
        # crosses the rectification threshold at t=5
        cfg = OptimConfig(kind=OptimizerKind.RADAM, lr=0.05, weight_decay=0.0)
        params = [np.array([0.3])]
        state = OptimizerState.for_params(params)
        p, m, v = 0.3, 0.0, 0.0
        rng = np.random.default_rng(0)
        for t in range(1, 9):
            g = float(rng.normal())
            params, state = optimizer_step(params, [np.array([g])], state, cfg)
            p, m, v = manual_update(p, g, m, v, t, cfg)
            np.testing.assert_allclose(params[0], [p], rtol=1e-12)

    def test_decay_applies_even_with_zero_gradient(self):
        cfg = OptimConfig(kind=OptimizerKind.RADAM, lr=0.1, weight_decay=0.2)
        params = [np.array([4.0])]
        state = OptimizerState.for_params(params)
        new_params, _ = optimizer_step(params, [np.zeros(1)], state, cfg)
        np.testing.assert_allclose(new_params[0], [4.0 * (1 - 0.1 * 0.2)],
                                   rtol=1e-12)

    def test_state_moments_track_both_kinds(self):
        for kind in (OptimizerKind.ADAM, OptimizerKind.RADAM):
            cfg = OptimConfig(kind=kind)
            params = [np.array([1.0])]
            g = [np.array([2.0])]
            state = OptimizerState.for_params(params)
            _, state = optimizer_step(params, g, state, cfg)
            np.testing.assert_allclose(state.m[0], [(1 - 0.9) * 2.0],
                                       rtol=1e-12)
            np.testing.assert_allclose(state.v[0], [(1 - 0.999) * 4.0],
                                       rtol=1e-12)
