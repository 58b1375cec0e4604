"""Reverse-mode automatic differentiation on a flat operation tape.

A :class:`Tape` records every primitive applied to its nodes in creation
order, which is already a topological order, so the backward sweep is a
single reversed pass that visits each node once.  Values are float64
ndarrays (0-d for scalars).  Supported primitives: add/sub, elementwise
multiply (with broadcasting), matmul, relu/tanh, full reductions, a
softmax cross-entropy head, and the largest singular value of a matrix.
"""

from __future__ import annotations

import numpy as np

from .linalg import spectral_norm


class Tape:
    """Ordered record of primitive operations plus a parameter registry."""

    def __init__(self):
        self.nodes: list[Node] = []
        self.params: dict[str, Node] = {}

    def _register(self, node: "Node") -> "Node":
        node.index = len(self.nodes)
        self.nodes.append(node)
        return node

    def constant(self, value) -> "Node":
        arr = np.asarray(value, dtype=np.float64)
        return self._register(Node(self, arr))

    def parameter(self, name: str, value: np.ndarray) -> "Node":
        if name in self.params:
            raise ValueError(f"parameter {name!r} registered twice")
        arr = np.asarray(value, dtype=np.float64)
        node = self._register(Node(self, arr))
        self.params[name] = node
        return node

    def replay_check(self) -> bool:
        """Re-run every recorded forward closure; True iff all values match bit-exactly."""
        for node in self.nodes:
            if node.fwd is None:
                continue
            if not np.array_equal(node.fwd(), node.value):
                return False
        return True


class Node:
    """One tape entry: a value, its parents, and per-parent vjp closures."""

    __slots__ = ("tape", "value", "parents", "vjps", "fwd", "index", "op")

    def __init__(self, tape, value, parents=(), vjps=(), fwd=None, op="leaf"):
        self.tape = tape
        self.value = value
        self.parents = parents
        self.vjps = vjps
        self.fwd = fwd
        self.index = -1
        self.op = op

    def _lift(self, other) -> "Node":
        if isinstance(other, Node):
            if other.tape is not self.tape:
                raise ValueError("cannot mix nodes from different tapes")
            return other
        return self.tape.constant(other)

    def __add__(self, other):
        return add(self, self._lift(other))

    def __radd__(self, other):
        return add(self._lift(other), self)

    def __sub__(self, other):
        return sub(self, self._lift(other))

    def __rsub__(self, other):
        return sub(self._lift(other), self)

    def __mul__(self, other):
        return mul(self, self._lift(other))

    def __rmul__(self, other):
        return mul(self._lift(other), self)

    def __matmul__(self, other):
        return matmul(self, self._lift(other))

    def __neg__(self):
        return mul(self, self._lift(-1.0))


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a gradient over the axes numpy broadcast into existence."""
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


def _node(tape, value, parents, vjps, fwd, op):
    return tape._register(Node(tape, value, parents, vjps, fwd, op))


def add(a: Node, b: Node) -> Node:
    return _node(
        a.tape,
        a.value + b.value,
        (a, b),
        (
            lambda g: _unbroadcast(g, a.value.shape),
            lambda g: _unbroadcast(g, b.value.shape),
        ),
        lambda: a.value + b.value,
        "add",
    )


def sub(a: Node, b: Node) -> Node:
    return _node(
        a.tape,
        a.value - b.value,
        (a, b),
        (
            lambda g: _unbroadcast(g, a.value.shape),
            lambda g: _unbroadcast(-g, b.value.shape),
        ),
        lambda: a.value - b.value,
        "sub",
    )


def mul(a: Node, b: Node) -> Node:
    return _node(
        a.tape,
        a.value * b.value,
        (a, b),
        (
            lambda g: _unbroadcast(g * b.value, a.value.shape),
            lambda g: _unbroadcast(g * a.value, b.value.shape),
        ),
        lambda: a.value * b.value,
        "mul",
    )


def matmul(a: Node, b: Node) -> Node:
    av, bv = a.value, b.value

    def grad_b(g):
        # vector @ matrix collapses the contraction axis; restore it with an outer product
        if av.ndim == 1:
            return np.outer(av, g)
        return av.T @ g

    return _node(
        a.tape,
        av @ bv,
        (a, b),
        (lambda g: g @ bv.T, grad_b),
        lambda: a.value @ b.value,
        "matmul",
    )


def relu(x: Node) -> Node:
    mask = x.value > 0.0
    return _node(
        x.tape,
        np.where(mask, x.value, 0.0),
        (x,),
        (lambda g: g * mask,),
        lambda: np.where(x.value > 0.0, x.value, 0.0),
        "relu",
    )


def tanh(x: Node) -> Node:
    y = np.tanh(x.value)
    return _node(
        x.tape,
        y,
        (x,),
        (lambda g: g * (1.0 - y * y),),
        lambda: np.tanh(x.value),
        "tanh",
    )


def sum_all(x: Node) -> Node:
    return _node(
        x.tape,
        np.asarray(x.value.sum()),
        (x,),
        (lambda g: np.broadcast_to(g, x.value.shape).copy(),),
        lambda: np.asarray(x.value.sum()),
        "sum_all",
    )


def mean_all(x: Node) -> Node:
    size = x.value.size
    return _node(
        x.tape,
        np.asarray(x.value.mean()),
        (x,),
        (lambda g: np.broadcast_to(g / size, x.value.shape).copy(),),
        lambda: np.asarray(x.value.mean()),
        "mean_all",
    )


def cross_entropy_with_logits(logits: Node, labels) -> Node:
    """Mean negative log-softmax of the true class.  ``labels`` are class indices."""
    lab = np.asarray(labels)
    if lab.ndim != 1 or logits.value.ndim != 2 or lab.shape[0] != logits.value.shape[0]:
        raise ValueError("logits must be (n, classes) and labels (n,)")
    n = lab.shape[0]

    def forward():
        z = logits.value
        zmax = z.max(axis=1, keepdims=True)
        lse = zmax[:, 0] + np.log(np.exp(z - zmax).sum(axis=1))
        return np.asarray(np.mean(lse - z[np.arange(n), lab]))

    def grad(g):
        z = logits.value
        zmax = z.max(axis=1, keepdims=True)
        ez = np.exp(z - zmax)
        p = ez / ez.sum(axis=1, keepdims=True)
        p[np.arange(n), lab] -= 1.0
        return p * (float(g) / n)

    return _node(logits.tape, forward(), (logits,), (grad,), forward, "cross_entropy")


def top_singular_value(w: Node, tol: float = 1e-9, max_iter: int = 200, est=None) -> Node:
    """Largest singular value of a matrix node.

    The gradient is the rank-one subgradient ``outer(u, v)`` built from the
    converged singular pair, exact wherever the top singular value is
    simple.  ``est`` short-circuits the forward power iteration when the
    caller already holds a :class:`~nodebound.linalg.SpectralEstimate`.
    """
    if est is None:
        est = spectral_norm(w.value, tol=tol, max_iter=max_iter)
    uv = np.outer(est.left, est.right)
    return _node(
        w.tape,
        np.asarray(est.value),
        (w,),
        (lambda g: float(g) * uv,),
        lambda: np.asarray(spectral_norm(w.value, tol=tol, max_iter=max_iter).value),
        "top_singular_value",
    )


def backward(tape: Tape, output: Node) -> dict[str, np.ndarray]:
    """Gradients of a scalar output for every registered parameter.

    Parameters the output does not depend on receive exact zero arrays.
    """
    if output.tape is not tape:
        raise ValueError("output node does not belong to this tape")
    if output.value.size != 1:
        raise ValueError("backward requires a scalar output node")
    grads: list[np.ndarray | None] = [None] * len(tape.nodes)
    grads[output.index] = np.ones_like(output.value)
    for node in reversed(tape.nodes[: output.index + 1]):
        g = grads[node.index]
        if g is None:
            continue
        for parent, vjp in zip(node.parents, node.vjps):
            pg = vjp(g)
            if grads[parent.index] is None:
                grads[parent.index] = pg
            else:
                grads[parent.index] = grads[parent.index] + pg
    out = {}
    for name, node in tape.params.items():
        g = grads[node.index]
        out[name] = np.zeros_like(node.value) if g is None else np.asarray(g)
    return out
