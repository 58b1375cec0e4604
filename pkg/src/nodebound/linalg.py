"""Dense array validation and the power-iteration spectral norm.

Everything downstream works on plain float64 numpy arrays; matrices that
map ``k`` inputs to ``m`` outputs are stored with shape ``(k, m)`` so that
batched application is ``X @ W + b``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def as_float_array(values, name: str = "array") -> np.ndarray:
    """Convert to a float64 ndarray, rejecting NaN/Inf entries."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def as_matrix(values, name: str = "matrix") -> np.ndarray:
    arr = as_float_array(values, name)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    return arr


def as_vector(values, name: str = "vector") -> np.ndarray:
    arr = as_float_array(values, name)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    return arr


@dataclass
class SpectralEstimate:
    """Largest singular value of a matrix plus the singular pair.

    The pair satisfies ``m @ right ~= value * left`` and is what the
    training penalty uses for its gradient (``d sigma / d m = outer(left,
    right)``).  ``converged`` is False when the iteration hit ``max_iter``
    before the estimate stabilised; the best estimate is still returned.
    """

    value: float
    left: np.ndarray
    right: np.ndarray
    iterations: int
    converged: bool

    def __float__(self) -> float:
        return self.value


def spectral_norm(matrix, tol: float = 1e-12, max_iter: int = 500) -> SpectralEstimate:
    """Estimate the largest singular value by power iteration.

    Iteration starts from the normalised all-ones vector so repeated calls
    are deterministic.  Convergence is declared when the relative change of
    the estimate between two consecutive iterations drops to ``tol``.  A
    zero matrix short-circuits to exactly 0.
    """
    m = as_matrix(matrix)
    if m.size == 0:
        raise ValueError("spectral_norm needs a non-empty matrix")
    if tol <= 0:
        raise ValueError("tol must be positive")
    rows, cols = m.shape
    if not m.any():
        return SpectralEstimate(0.0, np.zeros(rows), np.zeros(cols), 0, True)

    v = np.ones(cols) / np.sqrt(cols)
    u = np.zeros(rows)
    sigma = 0.0
    fallback = 0
    for it in range(1, max_iter + 1):
        mv = m @ v
        norm_mv = float(np.linalg.norm(mv))
        if norm_mv == 0.0:
            # start vector landed in the null space; restart from a basis vector
            v = np.zeros(cols)
            v[fallback % cols] = 1.0
            fallback += 1
            continue
        u = mv / norm_mv
        mtu = m.T @ u
        new_sigma = float(np.linalg.norm(mtu))
        if new_sigma == 0.0:
            return SpectralEstimate(0.0, u, v, it, True)
        v = mtu / new_sigma
        if sigma > 0.0 and abs(new_sigma - sigma) <= tol * new_sigma:
            return SpectralEstimate(new_sigma, u, v, it, True)
        sigma = new_sigma
    return SpectralEstimate(sigma, u, v, max_iter, False)
