import math

import numpy as np
import pytest

from nodebound.autodiff import Tape
from nodebound.linalg import spectral_norm
from nodebound.model import (
    MLPDynamics,
    NeuralODEModel,
    eval_dynamics,
    forward,
    forward_on_tape,
    from_json,
    network_lipschitz,
    parameter_arrays,
    random_model,
    to_json,
    weight_path_lipschitz,
)


def scalar_model(a=1.0, b=0.0, activation="identity", t_final=1.0, steps=20):
    dyn = MLPDynamics([np.array([[a]])], [np.array([b])], activation)
    return NeuralODEModel(dyn, "none", t_final=t_final, steps=steps)


def test_zero_network_maps_to_zero():
    dyn = MLPDynamics([np.zeros((3, 2)), np.zeros((2, 3))], [np.zeros(2), np.zeros(3)], "tanh")
    model = NeuralODEModel(dyn)
    np.testing.assert_array_equal(eval_dynamics(model, np.ones(3), 0.0), np.zeros(3))


def test_single_affine_layer():
    model = scalar_model(a=2.0, b=1.0)
    assert eval_dynamics(model, np.array([3.0]), 0.0) == pytest.approx([7.0])


def test_sine_modulation_zeroes_hidden_at_t_zero():
    rng = np.random.default_rng(0)
    dyn = MLPDynamics([rng.standard_normal((2, 5)), rng.standard_normal((5, 2))],
                      [rng.standard_normal(5), np.zeros(2)], "tanh")
    model = NeuralODEModel(dyn, "sine")
    out = eval_dynamics(model, rng.standard_normal(2), 0.0)
    np.testing.assert_allclose(out, np.zeros(2), atol=1e-15)
    # away from t=0 the hidden layer contributes
    assert np.linalg.norm(eval_dynamics(model, np.ones(2), 0.7)) > 0


def test_sine_modulation_requires_hidden_layer():
    dyn = MLPDynamics([np.eye(2)], [np.zeros(2)], "tanh")
    with pytest.raises(ValueError):
        NeuralODEModel(dyn, "sine")


def test_forward_identity_with_zero_dynamics():
    dyn = MLPDynamics([np.zeros((2, 2))], [np.zeros(2)], "identity")
    model = NeuralODEModel(dyn, "none")
    x = np.array([0.3, -0.7])
    pred, traj = forward(model, x)
    np.testing.assert_allclose(pred, x, atol=1e-15)
    assert len(traj.states) == model.steps + 1


def test_forward_exponential_scaling():
    model = scalar_model(a=1.0, b=0.0, steps=20)
    x = np.array([2.5])
    pred, _ = forward(model, x)
    assert pred[0] == pytest.approx(math.e * 2.5, abs=1e-5)


def test_forward_batch_shape_and_trajectory_length():
    model = random_model(2, 3, [4], 1, "tanh", "none", steps=7, rng=0)
    x = np.random.default_rng(1).standard_normal((6, 2))
    pred, traj = forward(model, x)
    assert pred.shape == (6, 1)
    assert len(traj.states) == 8


def test_network_lipschitz_product_of_spectral_norms():
    dyn = MLPDynamics([np.diag([2.0, 2.0]), np.diag([3.0, 3.0])],
                      [np.zeros(2), np.zeros(2)], "tanh")
    assert network_lipschitz(dyn) == pytest.approx(6.0, rel=1e-9)


def test_network_lipschitz_zero_layer():
    dyn = MLPDynamics([np.zeros((2, 2)), np.diag([3.0, 3.0])], [np.zeros(2), np.zeros(2)], "relu")
    assert network_lipschitz(dyn) == 0.0


def test_network_lipschitz_identity():
    dyn = MLPDynamics([np.eye(4)], [np.zeros(4)], "identity")
    assert network_lipschitz(dyn) == pytest.approx(1.0, abs=1e-12)


def test_weight_path_lipschitz_constant_weights():
    model = random_model(2, 2, [4], 2, "relu", "none", rng=0, identity_maps=True)
    assert weight_path_lipschitz(model, np.linspace(0, 1, 50)) == 0.0


def test_weight_path_lipschitz_sine_bounded_by_spectral_norm():
    model = random_model(2, 2, [6], 2, "relu", "sine", rng=1, identity_maps=True)
    grid = np.linspace(0.0, 1.0, 100)
    estimate = weight_path_lipschitz(model, grid)
    top = spectral_norm(model.dynamics.weights[-1]).value
    assert 0 < estimate <= top * (1 + 1e-9)


def test_weight_path_lipschitz_positive_homogeneity():
    model = random_model(2, 2, [6], 2, "relu", "sine", rng=2, identity_maps=True)
    grid = np.linspace(0.0, 1.0, 40)
    base = weight_path_lipschitz(model, grid)
    model.dynamics.weights[-1] *= 2.0
    assert weight_path_lipschitz(model, grid) == pytest.approx(2.0 * base, rel=1e-9)


def test_weight_path_lipschitz_needs_two_nodes():
    model = random_model(2, 2, [4], 2, "relu", "sine", rng=0, identity_maps=True)
    with pytest.raises(ValueError):
        weight_path_lipschitz(model, np.array([0.5]))


def test_dynamics_empirically_lipschitz():
    rng = np.random.default_rng(7)
    for trial in range(20):
        state = int(rng.integers(1, 6))
        dyn = MLPDynamics(
            [rng.uniform(-1, 1, size=(state, 4)), rng.uniform(-1, 1, size=(4, state))],
            [rng.uniform(-1, 1, size=4), rng.uniform(-1, 1, size=state)],
            ("relu", "tanh", "identity")[trial % 3],
        )
        model = NeuralODEModel(dyn, "none")
        bound = network_lipschitz(dyn)
        for _ in range(50):
            z1 = rng.uniform(-3, 3, size=state)
            z2 = rng.uniform(-3, 3, size=state)
            lhs = np.linalg.norm(eval_dynamics(model, z1, 0.3) - eval_dynamics(model, z2, 0.3))
            assert lhs <= bound * np.linalg.norm(z1 - z2) * (1 + 1e-9) + 1e-12


def test_tape_forward_matches_plain_forward_bit_exactly():
    for modulation, final in (("none", None), ("sine", "identity")):
        model = random_model(3, 4, [5], 2, "tanh", modulation, steps=9, rng=11,
                             final_activation=final)
        x = np.random.default_rng(5).standard_normal((7, 3))
        plain, _ = forward(model, x)
        tape = Tape()
        params = {name: tape.parameter(name, arr) for name, arr in parameter_arrays(model).items()}
        node = forward_on_tape(model, tape, x, params)
        assert np.array_equal(plain, node.value)


def test_json_round_trip():
    model = random_model(2, 3, [5], 1, "relu", "sine", t_final=2.0, steps=12, rng=3,
                         final_activation="identity")
    doc = to_json(model)
    clone = from_json(doc)
    x = np.random.default_rng(0).standard_normal((4, 2))
    p1, _ = forward(model, x)
    p2, _ = forward(clone, x)
    np.testing.assert_array_equal(p1, p2)
    assert clone.dynamics.activation == "relu"
    assert clone.dynamics.final_activation == "identity"
    assert clone.steps == 12


def test_json_identity_maps_round_trip():
    model = random_model(2, 2, [4], 2, "relu", "none", rng=1, identity_maps=True)
    clone = from_json(to_json(model))
    assert clone.input_weight is None and clone.output_weight is None
    x = np.random.default_rng(2).standard_normal((3, 2))
    np.testing.assert_array_equal(forward(model, x)[0], forward(clone, x)[0])


def test_json_schema_fields():
    import json

    doc = json.loads(to_json(random_model(2, 3, [4], 1, rng=0)))
    assert set(doc) >= {"depth", "dims", "activation", "modulation", "weights", "biases", "span", "steps"}
    assert doc["depth"] == 2
    assert doc["dims"] == [3, 4, 3]
    assert doc["span"] == [0.0, 1.0]
    assert len(doc["weights"]) == doc["depth"] + 2


def test_dimension_validation():
    with pytest.raises(ValueError):
        MLPDynamics([np.zeros((2, 3)), np.zeros((2, 2))], [np.zeros(3), np.zeros(2)], "tanh")
    with pytest.raises(ValueError):
        NeuralODEModel(MLPDynamics([np.zeros((2, 3))], [np.zeros(3)], "tanh"))
    with pytest.raises(ValueError):
        eval_dynamics(scalar_model(), np.array([1.0, 2.0]), 0.0)
