import numpy as np
import pytest

from nodebound.autodiff import (
    Tape,
    backward,
    cross_entropy_with_logits,
    mean_all,
    relu,
    sum_all,
    tanh,
    top_singular_value,
)


def test_square_gradient():
    tape = Tape()
    p = tape.parameter("p", np.array(3.0))
    out = p * p
    grads = backward(tape, out)
    assert grads["p"] == pytest.approx(6.0)


def test_unused_parameter_gets_exact_zero():
    tape = Tape()
    p = tape.parameter("p", np.array([1.0, 2.0]))
    q = tape.parameter("q", np.array(5.0))
    out = q * q
    grads = backward(tape, out)
    assert np.array_equal(grads["p"], np.zeros(2))
    assert grads["q"] == pytest.approx(10.0)


def test_non_scalar_output_rejected():
    tape = Tape()
    p = tape.parameter("p", np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        backward(tape, p + p)


def test_duplicate_parameter_name_rejected():
    tape = Tape()
    tape.parameter("p", np.array(1.0))
    with pytest.raises(ValueError):
        tape.parameter("p", np.array(2.0))


def test_mixing_tapes_rejected():
    t1, t2 = Tape(), Tape()
    a = t1.constant(1.0)
    b = t2.constant(2.0)
    with pytest.raises(ValueError):
        a + b


def test_replay_reproduces_values_bit_exactly():
    tape = Tape()
    rng = np.random.default_rng(0)
    w = tape.parameter("w", rng.standard_normal((4, 3)))
    x = tape.constant(rng.standard_normal((5, 4)))
    out = mean_all(tanh(x @ w) * 2.0)
    assert tape.replay_check()
    assert out.value.shape == ()


def test_bias_broadcast_gradient():
    tape = Tape()
    b = tape.parameter("b", np.zeros(3))
    x = tape.constant(np.ones((4, 3)))
    out = sum_all(x + b)
    grads = backward(tape, out)
    np.testing.assert_array_equal(grads["b"], np.full(3, 4.0))


def test_matmul_vector_gradient():
    tape = Tape()
    w = tape.parameter("w", np.array([[1.0, 2.0], [3.0, 4.0]]))
    z = tape.constant(np.array([1.0, 1.0]))
    out = sum_all(z @ w)
    grads = backward(tape, out)
    np.testing.assert_allclose(grads["w"], np.ones((2, 2)))


def test_relu_subgradient_at_zero_is_zero():
    tape = Tape()
    p = tape.parameter("p", np.array([0.0, -1.0, 2.0]))
    out = sum_all(relu(p))
    grads = backward(tape, out)
    np.testing.assert_array_equal(grads["p"], np.array([0.0, 0.0, 1.0]))


def test_cross_entropy_uniform_logits():
    tape = Tape()
    logits = tape.parameter("z", np.zeros((1, 2)))
    out = cross_entropy_with_logits(logits, np.array([0]))
    assert float(out.value) == pytest.approx(np.log(2.0), rel=1e-12)
    grads = backward(tape, out)
    np.testing.assert_allclose(grads["z"], np.array([[-0.5, 0.5]]), atol=1e-12)


def test_cross_entropy_matches_finite_differences():
    rng = np.random.default_rng(1)
    base = rng.standard_normal((6, 4))
    labels = rng.integers(0, 4, size=6)

    def value(z):
        tape = Tape()
        node = cross_entropy_with_logits(tape.parameter("z", z), labels)
        return float(node.value)

    tape = Tape()
    node = cross_entropy_with_logits(tape.parameter("z", base.copy()), labels)
    grad = backward(tape, node)["z"]
    eps = 1e-6
    for idx in [(0, 0), (3, 2), (5, 3)]:
        up, down = base.copy(), base.copy()
        up[idx] += eps
        down[idx] -= eps
        fd = (value(up) - value(down)) / (2 * eps)
        assert grad[idx] == pytest.approx(fd, rel=1e-5)


def test_top_singular_value_gradient_is_singular_pair_outer():
    tape = Tape()
    w = tape.parameter("w", np.diag([3.0, 1.0]))
    out = top_singular_value(w, tol=1e-14, max_iter=500)
    assert float(out.value) == pytest.approx(3.0, abs=1e-9)
    grads = backward(tape, out)
    expected = np.zeros((2, 2))
    expected[0, 0] = 1.0
    # singular-vector accuracy is ~sqrt of the value tolerance
    np.testing.assert_allclose(grads["w"], expected, atol=1e-6)


def test_gradient_accumulates_across_reuse():
    tape = Tape()
    p = tape.parameter("p", np.array(2.0))
    out = p * p * p  # p**3, derivative 3 p**2 = 12
    grads = backward(tape, out)
    assert grads["p"] == pytest.approx(12.0)
