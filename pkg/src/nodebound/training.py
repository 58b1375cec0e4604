"""Empirical-risk minimization with an optional spectral-norm penalty.

The reported train/eval losses always exclude the penalty term so the
generalization gap compares like with like; the penalty only shapes the
gradients.  Everything is deterministic given the config seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff
from .autodiff import Tape, backward, cross_entropy_with_logits, mean_all, top_singular_value
from .datasets import Dataset
from .linalg import spectral_norm
from .model import NeuralODEModel, forward, forward_on_tape, network_lipschitz, parameter_arrays, weight_path_lipschitz
from .optim import AdamState, adam_step

LOSS_KINDS = ("mse", "cross_entropy")


@dataclass
class TrainConfig:
    epochs: int
    lr: float = 0.01
    batch_size: int = 0  # 0 = full batch
    loss_kind: str = "mse"
    penalty_weight: float = 0.0
    seed: int = 0
    solver_steps: int = 20

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.lr > 0:
            raise ValueError("lr must be positive")
        if self.penalty_weight < 0:
            raise ValueError("penalty weight must be >= 0")
        if self.loss_kind not in LOSS_KINDS:
            raise ValueError(f"unknown loss kind {self.loss_kind!r}")
        if self.batch_size < 0:
            raise ValueError("batch_size must be >= 0 (0 = full batch)")
        if self.solver_steps < 1:
            raise ValueError("solver_steps must be >= 1")

    def as_dict(self) -> dict:
        return {
            "epochs": self.epochs,
            "lr": self.lr,
            "batch_size": self.batch_size,
            "loss_kind": self.loss_kind,
            "penalty_weight": self.penalty_weight,
            "seed": self.seed,
            "solver_steps": self.solver_steps,
        }


@dataclass
class EpochRow:
    epoch: int
    train_loss: float
    eval_loss: float
    gen_gap: float
    lipschitz: float
    weight_path_lipschitz: float


@dataclass
class ExperimentRecord:
    """Per-epoch training trace plus the metadata the CSV schema carries."""

    rows: list[EpochRow]
    seed: int
    config: TrainConfig
    hidden_units: int
    diverged: bool = False
    final_accuracy: float | None = None

    CSV_HEADER = "seed,epoch,train_loss,eval_loss,gen_gap,lipschitz,weight_path_lipschitz,lambda,hidden_units"

    @property
    def final_train_loss(self) -> float:
        return self.rows[-1].train_loss

    @property
    def final_eval_loss(self) -> float:
        return self.rows[-1].eval_loss

    @property
    def final_gap(self) -> float:
        return self.rows[-1].gen_gap

    def to_csv(self, header: bool = True) -> str:
        lines = [self.CSV_HEADER] if header else []
        for r in self.rows:
            lines.append(
                f"{self.seed},{r.epoch},{r.train_loss!r},{r.eval_loss!r},{r.gen_gap!r},"
                f"{r.lipschitz!r},{r.weight_path_lipschitz!r},{self.config.penalty_weight!r},{self.hidden_units}"
            )
        return "\n".join(lines) + "\n"


def loss(pred, target, kind: str) -> float:
    """Mean squared error, or mean negative log-softmax of the true class."""
    pred = np.asarray(pred, dtype=np.float64)
    if pred.size == 0:
        raise ValueError("empty batch")
    if kind == "mse":
        target = np.asarray(target, dtype=np.float64)
        if pred.shape != target.shape:
            raise ValueError(f"prediction shape {pred.shape} does not match target shape {target.shape}")
        diff = pred - target
        return float(np.mean(diff * diff))
    if kind == "cross_entropy":
        labels = np.asarray(target)
        if pred.ndim != 2 or labels.ndim != 1 or pred.shape[0] != labels.shape[0]:
            raise ValueError("cross_entropy needs (n, classes) logits and (n,) class indices")
        zmax = pred.max(axis=1, keepdims=True)
        lse = zmax[:, 0] + np.log(np.exp(pred - zmax).sum(axis=1))
        return float(np.mean(lse - pred[np.arange(len(labels)), labels]))
    raise ValueError(f"unknown loss kind {kind!r}")


def penalized_loss(model: NeuralODEModel, inputs, targets, kind: str,
                   penalty_weight: float = 0.0) -> autodiff.Node:
    """Scalar loss node: batch loss plus ``penalty_weight * max_i sigma_max(A_i)``.

    The max is over the dynamics weight matrices; at ties the lowest-index
    layer carries the (sub)gradient, which is ``penalty_weight * outer(u, v)``
    for that layer's leading singular pair.
    """
    if penalty_weight < 0:
        raise ValueError("penalty weight must be >= 0")
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("inputs must be a non-empty (n, p) batch")
    tape = Tape()
    params = {name: tape.parameter(name, arr) for name, arr in parameter_arrays(model).items()}
    pred = forward_on_tape(model, tape, x, params)
    if kind == "mse":
        target = np.asarray(targets, dtype=np.float64)
        diff = pred - tape.constant(target)
        base = mean_all(diff * diff)
    elif kind == "cross_entropy":
        base = cross_entropy_with_logits(pred, targets)
    else:
        raise ValueError(f"unknown loss kind {kind!r}")
    if penalty_weight == 0.0:
        return base
    estimates = [spectral_norm(w, tol=1e-9, max_iter=200) for w in model.dynamics.weights]
    top = int(np.argmax([e.value for e in estimates]))  # argmax returns the first maximum
    penalty = top_singular_value(params[f"dyn_w{top}"], est=estimates[top])
    return base + penalty * penalty_weight


def evaluate(model: NeuralODEModel, dataset: Dataset, kind: str) -> dict[str, float]:
    """Mean pure loss over the dataset; adds argmax accuracy for classification."""
    if dataset.n == 0:
        raise ValueError("empty dataset")
    pred, _ = forward(model, dataset.inputs)
    out = {"loss": loss(pred, dataset.targets, kind)}
    if kind == "cross_entropy":
        out["accuracy"] = float(np.mean(np.argmax(pred, axis=1) == np.asarray(dataset.targets)))
    return out


def train(model: NeuralODEModel, train_set: Dataset, eval_set: Dataset,
          config: TrainConfig, epoch_callback=None) -> ExperimentRecord:
    """Adam on the penalized loss; one record row per epoch.

    The model is updated in place (its ``steps`` is set to the config's
    solver steps so training and evaluation integrate identically).  A
    non-finite loss truncates the record and sets the divergence flag.
    ``epoch_callback(model, row, train_metrics, eval_metrics)`` runs after
    each completed epoch.
    """
    if train_set.n == 0 or eval_set.n == 0:
        raise ValueError("datasets must be non-empty")
    if train_set.inputs.shape[1] != model.input_dim:
        raise ValueError("train set width does not match the model input")
    model.steps = config.solver_steps
    rng = np.random.default_rng(config.seed)
    params = parameter_arrays(model)
    adam = AdamState(lr=config.lr)
    n = train_set.n
    batch = config.batch_size if 0 < config.batch_size < n else n
    solver_grid = np.linspace(0.0, model.t_final, config.solver_steps + 1)

    rows: list[EpochRow] = []
    diverged = False
    final_accuracy = None
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n) if batch < n else np.arange(n)
        ok = True
        for start in range(0, n, batch):
            idx = order[start:start + batch]
            node = penalized_loss(model, train_set.inputs[idx], train_set.targets[idx],
                                  config.loss_kind, config.penalty_weight)
            if not np.isfinite(node.value):
                ok = False
                break
            grads = backward(node.tape, node)
            adam_step(adam, grads, params)
        if not ok:
            diverged = True
            break
        train_metrics = evaluate(model, train_set, config.loss_kind)
        eval_metrics = evaluate(model, eval_set, config.loss_kind)
        if not (np.isfinite(train_metrics["loss"]) and np.isfinite(eval_metrics["loss"])):
            diverged = True
            break
        row = EpochRow(
            epoch=epoch,
            train_loss=train_metrics["loss"],
            eval_loss=eval_metrics["loss"],
            gen_gap=eval_metrics["loss"] - train_metrics["loss"],
            lipschitz=network_lipschitz(model.dynamics, tol=1e-9, max_iter=200),
            weight_path_lipschitz=weight_path_lipschitz(model, solver_grid),
        )
        rows.append(row)
        final_accuracy = eval_metrics.get("accuracy")
        if epoch_callback is not None:
            epoch_callback(model, row, train_metrics, eval_metrics)
    return ExperimentRecord(rows, config.seed, config, model.hidden_units,
                            diverged=diverged, final_accuracy=final_accuracy)
