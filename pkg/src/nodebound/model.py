"""Neural ODE models: layered MLP dynamics, forward prediction, Lipschitz measurements.

The dynamics are ``z' = act(A_N act(... act(A_1 z + b_1) ...) + b_N)`` with
the activation applied at every layer.  Time dependence is either absent
("none") or a sine modulation ("sine") that scales the last hidden
activation by ``sin(t)`` before the output layer, which makes the
effective output-layer weights ``sin(t) * A_N``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import autodiff
from .linalg import as_float_array, spectral_norm
from .odeint import Trajectory, rk4_path, rk4_solve

# all supported activations are 1-Lipschitz and fix the origin
ACTIVATIONS = {
    "relu": (lambda x: np.where(x > 0.0, x, 0.0), 1.0),
    "tanh": (np.tanh, 1.0),
    "identity": (lambda x: x, 1.0),
}

_TAPE_ACTIVATIONS = {
    "relu": autodiff.relu,
    "tanh": autodiff.tanh,
    "identity": lambda x: x,
}

MODULATIONS = ("none", "sine")


def activation_lipschitz(name: str) -> float:
    if name not in ACTIVATIONS:
        raise ValueError(f"unknown activation {name!r}")
    return ACTIVATIONS[name][1]


@dataclass
class MLPDynamics:
    """Stacked affine layers with a shared activation; weight ``k`` has shape (dims[k], dims[k+1]).

    ``final_activation`` defaults to the shared activation; set it to
    "identity" for the usual hidden-activation-only MLP (a relu output
    layer clips the vector field to be non-negative, which cripples flows
    that must decrease state coordinates).
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activation: str = "tanh"
    final_activation: str | None = None

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.final_activation is None:
            self.final_activation = self.activation
        if self.final_activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.final_activation!r}")
        if not self.weights or len(self.weights) != len(self.biases):
            raise ValueError("need matching non-empty weight and bias lists")
        self.weights = [as_float_array(w, f"weight[{i}]") for i, w in enumerate(self.weights)]
        self.biases = [as_float_array(b, f"bias[{i}]") for i, b in enumerate(self.biases)]
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.ndim != 1 or w.shape[1] != b.shape[0]:
                raise ValueError(f"layer {i} weight/bias shapes do not chain: {w.shape} vs {b.shape}")
            if i > 0 and self.weights[i - 1].shape[1] != w.shape[0]:
                raise ValueError(f"layer {i - 1} output does not feed layer {i} input")

    @property
    def depth(self) -> int:
        return len(self.weights)

    @property
    def dims(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def state_dim(self) -> int:
        return self.weights[0].shape[0]


def _apply_dynamics(weights, biases, act, final_act, modulation: str, z, t: float):
    """Shared layer loop; works on ndarrays and on tape nodes alike."""
    h = z
    last = len(weights) - 1
    for i, (w, b) in enumerate(zip(weights, biases)):
        h = (final_act if i == last else act)(h @ w + b)
        if modulation == "sine" and i == last - 1:
            h = h * math.sin(t)
    return h


@dataclass
class NeuralODEModel:
    """ODE dynamics wrapped with optional affine input/output maps.

    ``input_weight is None`` means the state is the raw input (identity
    map); likewise for the output.  Predictions read the state at the final
    time ``t_final``.
    """

    dynamics: MLPDynamics
    modulation: str = "none"
    input_weight: np.ndarray | None = None
    input_bias: np.ndarray | None = None
    output_weight: np.ndarray | None = None
    output_bias: np.ndarray | None = None
    t_final: float = 1.0
    steps: int = 20

    def __post_init__(self):
        if self.modulation not in MODULATIONS:
            raise ValueError(f"unknown modulation {self.modulation!r}")
        if self.modulation == "sine" and self.dynamics.depth < 2:
            raise ValueError("sine modulation needs a hidden layer (depth >= 2)")
        if not self.t_final > 0:
            raise ValueError("t_final must be positive")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        d = self.dynamics.state_dim
        if self.dynamics.dims[-1] != d:
            raise ValueError("dynamics must map the state dimension to itself")
        if (self.input_weight is None) != (self.input_bias is None):
            raise ValueError("input map needs both weight and bias (or neither)")
        if (self.output_weight is None) != (self.output_bias is None):
            raise ValueError("output map needs both weight and bias (or neither)")
        if self.input_weight is not None:
            self.input_weight = as_float_array(self.input_weight, "input_weight")
            self.input_bias = as_float_array(self.input_bias, "input_bias")
            if self.input_weight.shape[1] != d:
                raise ValueError("input map must produce the state dimension")
        if self.output_weight is not None:
            self.output_weight = as_float_array(self.output_weight, "output_weight")
            self.output_bias = as_float_array(self.output_bias, "output_bias")
            if self.output_weight.shape[0] != d:
                raise ValueError("output map must consume the state dimension")

    @property
    def input_dim(self) -> int:
        return self.dynamics.state_dim if self.input_weight is None else self.input_weight.shape[0]

    @property
    def output_dim(self) -> int:
        return self.dynamics.state_dim if self.output_weight is None else self.output_weight.shape[1]

    @property
    def hidden_units(self) -> int:
        """Capacity knob reported in experiment records: widest dynamics layer."""
        return max(self.dynamics.dims)


def eval_dynamics(model: NeuralODEModel, z, t: float) -> np.ndarray:
    """Evaluate the dynamics right-hand side at state ``z`` and time ``t``."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape[-1] != model.dynamics.state_dim:
        raise ValueError(f"state has width {z.shape[-1]}, dynamics expect {model.dynamics.state_dim}")
    act = ACTIVATIONS[model.dynamics.activation][0]
    final_act = ACTIVATIONS[model.dynamics.final_activation][0]
    return _apply_dynamics(model.dynamics.weights, model.dynamics.biases, act, final_act,
                           model.modulation, z, t)


def forward(model: NeuralODEModel, x) -> tuple[np.ndarray, Trajectory]:
    """Predict by integrating the state to ``t_final`` and applying the output map.

    Accepts a single input ``(p,)`` or a batch ``(n, p)``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.input_dim:
        raise ValueError(f"input has width {x.shape[-1]}, model expects {model.input_dim}")
    z0 = x if model.input_weight is None else x @ model.input_weight + model.input_bias
    traj = rk4_solve(lambda z, t: eval_dynamics(model, z, t), z0, (0.0, model.t_final), model.steps)
    z_final = traj.states[-1]
    pred = z_final if model.output_weight is None else z_final @ model.output_weight + model.output_bias
    return pred, traj


def forward_on_tape(model: NeuralODEModel, tape: autodiff.Tape, x: np.ndarray,
                    params: dict[str, autodiff.Node]) -> autodiff.Node:
    """Tape twin of :func:`forward`: identical update expressions over nodes.

    ``params`` maps the names produced by :func:`parameter_arrays` to nodes
    already registered on ``tape``.
    """
    act = _TAPE_ACTIVATIONS[model.dynamics.activation]
    final_act = _TAPE_ACTIVATIONS[model.dynamics.final_activation]
    weights = [params[f"dyn_w{i}"] for i in range(model.dynamics.depth)]
    biases = [params[f"dyn_b{i}"] for i in range(model.dynamics.depth)]
    x_node = tape.constant(x)
    if model.input_weight is None:
        z0 = x_node
    else:
        z0 = x_node @ params["input_w"] + params["input_b"]

    def f(z, t):
        return _apply_dynamics(weights, biases, act, final_act, model.modulation, z, t)

    states = rk4_path(f, z0, (0.0, model.t_final), model.steps)
    z_final = states[-1]
    if model.output_weight is None:
        return z_final
    return z_final @ params["output_w"] + params["output_b"]


def parameter_arrays(model: NeuralODEModel) -> dict[str, np.ndarray]:
    """The trainable arrays, keyed by the names the tape and optimizer use."""
    out: dict[str, np.ndarray] = {}
    if model.input_weight is not None:
        out["input_w"] = model.input_weight
        out["input_b"] = model.input_bias
    for i in range(model.dynamics.depth):
        out[f"dyn_w{i}"] = model.dynamics.weights[i]
        out[f"dyn_b{i}"] = model.dynamics.biases[i]
    if model.output_weight is not None:
        out["output_w"] = model.output_weight
        out["output_b"] = model.output_bias
    return out


def network_lipschitz(dynamics: MLPDynamics, tol: float = 1e-10, max_iter: int = 300) -> float:
    """Upper-bound estimate of the dynamics' Lipschitz constant in the state.

    Product of per-layer spectral norms times the activation constant per
    layer; 0 as soon as any layer is all zero.
    """
    total = 1.0
    for i, w in enumerate(dynamics.weights):
        name = dynamics.final_activation if i == dynamics.depth - 1 else dynamics.activation
        total *= activation_lipschitz(name) * spectral_norm(w, tol=tol, max_iter=max_iter).value
        if total == 0.0:
            return 0.0
    return total


def weight_path_lipschitz(model: NeuralODEModel, time_grid) -> float:
    """Largest per-unit-time spectral change of the effective weights on a grid.

    With sine modulation only the output layer moves, as ``sin(t) * A_N``,
    so the change between grid nodes is ``|sin t' - sin t| * ||A_N||`` and
    the estimate never exceeds ``||A_N||`` (sine is 1-Lipschitz).
    """
    grid = np.asarray(time_grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("time_grid needs at least 2 nodes")
    if not np.all(np.diff(grid) > 0):
        raise ValueError("time_grid must be strictly increasing")
    if model.modulation == "none":
        return 0.0
    sines = np.sin(grid)
    rate = np.max(np.abs(np.diff(sines)) / np.diff(grid))
    return float(spectral_norm(model.dynamics.weights[-1], tol=1e-9, max_iter=200).value * rate)


def random_model(input_dim: int, state_dim: int, hidden_dims: list[int], output_dim: int,
                 activation: str = "tanh", modulation: str = "none",
                 t_final: float = 1.0, steps: int = 20, rng=None,
                 identity_maps: bool = False, final_activation: str | None = None,
                 init_scale: float = 1.0) -> NeuralODEModel:
    """Fresh model with uniform ``+-init_scale/sqrt(fan_in)`` weights from a seeded generator."""
    rng = np.random.default_rng(rng)

    def layer(n_in, n_out):
        bound = init_scale / math.sqrt(n_in)
        w = rng.uniform(-bound, bound, size=(n_in, n_out))
        b = rng.uniform(-bound, bound, size=n_out)
        return w, b

    dims = [state_dim, *hidden_dims, state_dim]
    weights, biases = [], []
    for n_in, n_out in zip(dims[:-1], dims[1:]):
        w, b = layer(n_in, n_out)
        weights.append(w)
        biases.append(b)
    dynamics = MLPDynamics(weights, biases, activation, final_activation)
    if identity_maps:
        if input_dim != state_dim or output_dim != state_dim:
            raise ValueError("identity maps require input/output dims equal to the state dim")
        return NeuralODEModel(dynamics, modulation, None, None, None, None, t_final, steps)
    iw, ib = layer(input_dim, state_dim)
    ow, ob = layer(state_dim, output_dim)
    return NeuralODEModel(dynamics, modulation, iw, ib, ow, ob, t_final, steps)


def to_json(model: NeuralODEModel) -> str:
    """Serialize to the flat JSON object used by the CLI (stable field names)."""
    def arr(a):
        return None if a is None else a.tolist()

    doc = {
        "depth": model.dynamics.depth,
        "dims": model.dynamics.dims,
        "activation": model.dynamics.activation,
        "modulation": model.modulation,
        "weights": [arr(model.input_weight)] + [w.tolist() for w in model.dynamics.weights] + [arr(model.output_weight)],
        "biases": [arr(model.input_bias)] + [b.tolist() for b in model.dynamics.biases] + [arr(model.output_bias)],
        "span": [0.0, model.t_final],
        "steps": model.steps,
    }
    if model.dynamics.final_activation != model.dynamics.activation:
        doc["final_activation"] = model.dynamics.final_activation
    return json.dumps(doc)


def from_json(text: str) -> NeuralODEModel:
    doc = json.loads(text)
    depth = doc["depth"]
    weights = doc["weights"]
    biases = doc["biases"]
    if len(weights) != depth + 2 or len(biases) != depth + 2:
        raise ValueError("weights/biases must hold input map, dynamics layers, output map")
    span = doc["span"]
    if len(span) != 2 or span[0] != 0.0:
        raise ValueError("span must be [0, L]")
    dynamics = MLPDynamics(
        [np.array(w, dtype=np.float64) for w in weights[1:-1]],
        [np.array(b, dtype=np.float64) for b in biases[1:-1]],
        doc["activation"],
        doc.get("final_activation"),
    )
    if dynamics.dims != list(doc["dims"]):
        raise ValueError("dims field disagrees with the stored weights")

    def opt(a):
        return None if a is None else np.array(a, dtype=np.float64)

    return NeuralODEModel(
        dynamics,
        doc["modulation"],
        opt(weights[0]),
        opt(biases[0]),
        opt(weights[-1]),
        opt(biases[-1]),
        float(span[1]),
        int(doc["steps"]),
    )
