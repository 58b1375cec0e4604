"""Deterministic fixed-step classical Runge-Kutta integration.

``rk4_path`` is deliberately duck-typed: the state only needs ``+`` and
scalar ``*``, so the same update expressions drive both plain ndarray
integration and the autodiff tape used during training.  Keeping a single
code path means the gradient is the exact derivative of the discrete
solution the solver produces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SolverDivergence(RuntimeError):
    """Raised when a non-finite state shows up mid-integration."""

    def __init__(self, step_index: int):
        super().__init__(f"non-finite state at step {step_index}")
        self.step_index = step_index


@dataclass
class Trajectory:
    """Discretised solution path on a uniform time grid."""

    times: np.ndarray  # (steps + 1,)
    states: np.ndarray  # (steps + 1, *state shape)
    step: float

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states lengths differ")
        if len(self.times) < 2:
            raise ValueError("a trajectory needs at least 2 nodes")
        dt = np.diff(self.times)
        if not np.all(dt > 0):
            raise ValueError("times must be strictly increasing")
        if not np.allclose(dt, dt[0], rtol=1e-9, atol=0.0):
            raise ValueError("times must be uniformly spaced")

    @property
    def steps(self) -> int:
        return len(self.times) - 1


def rk4_path(f, z0, t_span, steps: int, check=None) -> list:
    """All RK4 states from ``z0`` across ``t_span`` in ``steps`` uniform steps.

    ``check(k, z)`` runs after each update and may raise to abort.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if not t1 > t0:
        raise ValueError("t_span must satisfy t_b > t_a")
    h = (t1 - t0) / steps
    z = z0
    states = [z]
    for k in range(steps):
        t = t0 + k * h
        k1 = f(z, t)
        k2 = f(z + (h / 2.0) * k1, t + h / 2.0)
        k3 = f(z + (h / 2.0) * k2, t + h / 2.0)
        k4 = f(z + h * k3, t + h)
        z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if check is not None:
            check(k, z)
        states.append(z)
    return states


def rk4_solve(f, z0, t_span, steps: int) -> Trajectory:
    """Integrate ``dz/dt = f(z, t)`` and return the full trajectory.

    Aborts with :class:`SolverDivergence` (carrying the step index) as soon
    as a state stops being finite.
    """
    z0 = np.asarray(z0, dtype=np.float64)

    def check(k, z):
        if not np.all(np.isfinite(z)):
            raise SolverDivergence(k)

    states = rk4_path(f, z0, t_span, steps, check=check)
    t0, t1 = float(t_span[0]), float(t_span[1])
    h = (t1 - t0) / steps
    times = t0 + h * np.arange(steps + 1)
    return Trajectory(times, np.stack([np.asarray(s, dtype=np.float64) for s in states]), h)
