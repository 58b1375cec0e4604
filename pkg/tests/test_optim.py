import numpy as np
import pytest

from nodebound.optim import AdamState, adam_step


def test_zero_gradient_leaves_fresh_parameters_unchanged():
    params = {"w": np.array([1.0, -2.0, 3.0])}
    state = AdamState(lr=0.1)
    adam_step(state, {"w": np.zeros(3)}, params)
    np.testing.assert_array_equal(params["w"], np.array([1.0, -2.0, 3.0]))


def test_first_step_magnitude_bounded_by_lr():
    rng = np.random.default_rng(0)
    g = rng.standard_normal(20)
    params = {"w": np.zeros(20)}
    adam_step(AdamState(lr=0.01), {"w": g}, params)
    # bias-corrected first step is lr * g / (|g| + eps') per entry
    assert np.all(np.abs(params["w"]) <= 0.01 * (1 + 1e-6))
    big = np.abs(g) > 1e-3
    assert np.all(np.abs(params["w"][big]) > 0.009)


def test_two_runs_bit_identical():
    rng = np.random.default_rng(1)
    grads = [{"w": rng.standard_normal((3, 2))} for _ in range(10)]

    def run():
        params = {"w": np.ones((3, 2))}
        state = AdamState(lr=0.05)
        seq = []
        for g in grads:
            adam_step(state, g, params)
            seq.append(params["w"].copy())
        return seq

    for a, b in zip(run(), run()):
        assert np.array_equal(a, b)


def test_lr_zero_is_bit_identical():
    rng = np.random.default_rng(2)
    w0 = rng.standard_normal(8)
    params = {"w": w0.copy()}
    state = AdamState(lr=0.0)
    for _ in range(5):
        adam_step(state, {"w": rng.standard_normal(8)}, params)
    assert np.array_equal(params["w"], w0)


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        adam_step(AdamState(lr=0.1), {"w": np.zeros(3)}, {"w": np.zeros(4)})


def test_step_counter_increases():
    state = AdamState(lr=0.1)
    params = {"w": np.zeros(2)}
    for expected in (1, 2, 3):
        adam_step(state, {"w": np.ones(2)}, params)
        assert state.step == expected
