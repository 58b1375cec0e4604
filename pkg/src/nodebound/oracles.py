"""Independent brute-force verifiers for the inequalities behind the bounds.

Everything here deliberately avoids the closed forms in :mod:`.bounds`:
covers are found by search, Rademacher complexities by sign enumeration or
Monte Carlo, counts by exhaustive enumeration, and the Gronwall / gamma
inequalities by direct two-sided evaluation.  Where a search is heuristic
(greedy covers) it errs on the large side, so "oracle <= closed-form
bound" stays a valid soundness check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

EXACT_COVER_LIMIT = 20
COVER_CLASS_LIMIT = 20000
EXACT_SIGNS_LIMIT = 16
ENUMERATION_LIMIT = 8
BINOMIAL_LIMIT = 30


@dataclass
class SampledFunctionClass:
    """A finite function class restricted to fixed evaluation points."""

    points: np.ndarray  # (n,)
    values: np.ndarray  # (members, n)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.points.ndim != 1 or self.values.ndim != 2:
            raise ValueError("points must be (n,) and values (members, n)")
        if self.values.shape[1] != self.points.shape[0]:
            raise ValueError("value vectors must match the number of points")

    @property
    def size(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[0]


@dataclass
class StaircaseClass:
    """Nondecreasing integer-level step functions on a uniform grid.

    Members are ``psi(x) = level[k] * (range_bound / grid_size)`` on cell
    ``k`` of ``[0, domain_bound]``, with levels nondecreasing in
    ``{0, ..., grid_size}``.  The member count is the central binomial
    coefficient ``C(2 grid_size, grid_size)``.
    """

    grid_size: int
    domain_bound: float = 1.0
    range_bound: float = 1.0

    def __post_init__(self):
        if self.grid_size < 1:
            raise ValueError("grid_size must be >= 1")
        if not self.domain_bound > 0 or not self.range_bound > 0:
            raise ValueError("domain and range bounds must be positive")

    def level_rows(self) -> np.ndarray:
        """All nondecreasing level tuples, shape (C(2N, N), N)."""
        rows = list(itertools.combinations_with_replacement(range(self.grid_size + 1), self.grid_size))
        return np.array(rows, dtype=np.int64)

    def member_count(self) -> int:
        return math.comb(2 * self.grid_size, self.grid_size)

    def evaluate(self, levels: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Values of the step functions with given ``levels`` at ``points``."""
        points = np.asarray(points, dtype=np.float64)
        cell = np.clip(
            (points / self.domain_bound * self.grid_size).astype(np.int64),
            0,
            self.grid_size - 1,
        )
        step_height = self.range_bound / self.grid_size
        return levels[:, cell] * step_height

    def sample(self, points, max_members: int | None = None, seed: int = 0) -> SampledFunctionClass:
        """Restrict (a possibly subsampled set of) members to evaluation points."""
        points = np.asarray(points, dtype=np.float64)
        levels = self.level_rows()
        if max_members is not None and len(levels) > max_members:
            rng = np.random.default_rng(seed)
            keep = rng.choice(len(levels), size=max_members, replace=False)
            keep.sort()
            levels = levels[keep]
        return SampledFunctionClass(points, self.evaluate(levels, points))


@dataclass
class CountResult:
    value: int
    exhaustive: bool

    def __int__(self) -> int:
        return self.value


def count_monotone(grid_size: int) -> CountResult:
    """Count nondecreasing integer tuples ``0 <= a_0 <= ... <= a_{N-1} <= N``.

    Exhaustive enumeration up to N = 8 (cross-checked against the central
    binomial coefficient); the closed form with ``exhaustive=False`` beyond.
    """
    if grid_size < 0:
        raise ValueError("grid_size must be >= 0")
    closed = math.comb(2 * grid_size, grid_size)
    if grid_size > ENUMERATION_LIMIT:
        return CountResult(closed, False)
    count = sum(1 for _ in itertools.combinations_with_replacement(range(grid_size + 1), grid_size))
    if count != closed:
        raise AssertionError(f"enumeration {count} != C({2 * grid_size}, {grid_size}) = {closed}")
    return CountResult(count, True)


@dataclass
class CentralBinomial:
    value: int
    recurrence_holds: bool
    upper_bound: float | None
    upper_bound_holds: bool

    def __int__(self) -> int:
        return self.value


def central_binomial(n: int) -> CentralBinomial:
    """``C(2n, n)`` in exact integer arithmetic, with its recurrence and bound checked.

    Checks ``(n+1) C(2n+2, n+1) = (4n+2) C(2n, n)`` and, for n >= 1,
    ``C(2n, n) <= 4**n / sqrt(pi n)``.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > BINOMIAL_LIMIT:
        raise ValueError(f"n = {n} exceeds the supported range ({BINOMIAL_LIMIT})")
    value = math.comb(2 * n, n)
    recurrence = (n + 1) * math.comb(2 * n + 2, n + 1) == (4 * n + 2) * value
    if n >= 1:
        bound = 4.0**n / math.sqrt(math.pi * n)
        bound_holds = value <= bound
    else:
        bound = None
        bound_holds = True
    return CentralBinomial(value, recurrence, bound, bound_holds)


def _pairwise_l2(values: np.ndarray) -> np.ndarray:
    """Empirical L2 distances sqrt(mean((f - g)^2)) between all member pairs."""
    sq = np.sum(values * values, axis=1)
    gram = values @ values.T
    d2 = (sq[:, None] + sq[None, :] - 2.0 * gram) / values.shape[1]
    np.maximum(d2, 0.0, out=d2)
    return np.sqrt(d2)


@dataclass
class CoverResult:
    size: int
    exact: bool
    centers: list[int]

    def __int__(self) -> int:
        return self.size


def _exact_min_cover(balls: list[int], universe: int, upper: int) -> list[int]:
    """Smallest subset of balls (bitmasks) covering the universe; tries sizes below ``upper``."""
    m = len(balls)
    order = sorted(range(m), key=lambda i: -bin(balls[i]).count("1"))
    for k in range(1, upper):
        for combo in itertools.combinations(order, k):
            mask = 0
            for i in combo:
                mask |= balls[i]
                if mask == universe:
                    break
            if mask == universe:
                return list(combo)
    return []


def exact_covering_number(cls: SampledFunctionClass, radius: float) -> CoverResult:
    """Size of a minimal (or greedy, flagged) proper cover under the empirical L2 metric.

    Up to 20 members the minimum is found by set-cover search; larger
    classes use a farthest-point greedy pass whose size can only
    overestimate the true covering number.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if cls.size == 0:
        raise ValueError("empty function class")
    if cls.size > COVER_CLASS_LIMIT:
        raise ValueError(f"class size {cls.size} exceeds the supported limit {COVER_CLASS_LIMIT}")
    if cls.size <= EXACT_COVER_LIMIT:
        dist = _pairwise_l2(cls.values)
        balls = []
        for i in range(cls.size):
            mask = 0
            for j in range(cls.size):
                if dist[i, j] <= radius:
                    mask |= 1 << j
            balls.append(mask)
        universe = (1 << cls.size) - 1
        greedy = _greedy_cover(cls.values, radius)
        better = _exact_min_cover(balls, universe, len(greedy))
        centers = better if better else greedy
        return CoverResult(len(centers), True, centers)
    centers = _greedy_cover(cls.values, radius)
    return CoverResult(len(centers), False, centers)


def _greedy_cover(values: np.ndarray, radius: float) -> list[int]:
    """Farthest-point traversal: each new center is the member worst covered so far."""
    m, n = values.shape
    centers = [0]
    dist = np.sqrt(np.mean((values - values[0]) ** 2, axis=1))
    while True:
        worst = int(np.argmax(dist))
        if dist[worst] <= radius:
            return centers
        centers.append(worst)
        d_new = np.sqrt(np.mean((values - values[worst]) ** 2, axis=1))
        np.minimum(dist, d_new, out=dist)


@dataclass
class RademacherEstimate:
    value: float
    std_error: float
    exact: bool

    def __float__(self) -> float:
        return self.value


def mc_rademacher(cls: SampledFunctionClass, trials: int = 1000, seed: int = 0) -> RademacherEstimate:
    """Empirical Rademacher complexity of a finite class on its sample.

    Exact expectation by enumerating all sign patterns when the sample has
    at most 16 points; otherwise a seeded Monte Carlo estimate with its
    standard error.
    """
    if cls.size == 0:
        raise ValueError("empty function class")
    n = cls.n
    if n <= EXACT_SIGNS_LIMIT:
        total = 0.0
        patterns = 1 << n
        chunk = 4096
        bits = np.arange(n)
        for start in range(0, patterns, chunk):
            idx = np.arange(start, min(start + chunk, patterns))
            signs = 1.0 - 2.0 * ((idx[:, None] >> bits[None, :]) & 1)
            sup = np.max(signs @ cls.values.T, axis=1)
            total += float(np.sum(sup))
        return RademacherEstimate(total / patterns / n, 0.0, True)
    if trials < 100:
        raise ValueError("trials must be >= 100")
    rng = np.random.default_rng(seed)
    sups = np.empty(trials)
    for t in range(trials):
        signs = rng.choice((-1.0, 1.0), size=n)
        sups[t] = np.max(cls.values @ signs)
    sups /= n
    return RademacherEstimate(float(np.mean(sups)), float(np.std(sups, ddof=1) / math.sqrt(trials)), False)


def total_variation(states) -> float:
    """Sum of Euclidean increments along a discretised path.

    Accepts a :class:`~nodebound.odeint.Trajectory` or a raw (K+1, ...)
    state array.
    """
    arr = np.asarray(getattr(states, "states", states), dtype=np.float64)
    if arr.shape[0] < 2:
        raise ValueError("need at least 2 trajectory nodes")
    diffs = np.diff(arr, axis=0)
    if diffs.ndim == 1:
        return float(np.sum(np.abs(diffs)))
    return float(np.sum(np.linalg.norm(diffs.reshape(diffs.shape[0], -1), axis=1)))


@dataclass
class InequalityCheck:
    passed: bool
    slack: float
    lhs: np.ndarray
    rhs: np.ndarray

    def __bool__(self) -> bool:
        return self.passed


_FP_SLACK = 1e-9


def _conclude(lhs: np.ndarray, rhs: np.ndarray) -> InequalityCheck:
    lhs = np.asarray(lhs, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    gaps = rhs - lhs
    slack = float(np.min(gaps))
    tol = _FP_SLACK * max(1.0, float(np.max(np.abs(rhs))))
    return InequalityCheck(slack >= -tol, slack, lhs, rhs)


def gronwall_check(kind: str, **inputs) -> InequalityCheck:
    """Evaluate both sides of one Gronwall-type lemma and check LHS <= RHS.

    kinds:
      continuous          inputs: times, alpha (nondecreasing), beta (>= 0), optional u
      sequence_sum        inputs: f (> 0), b (> 0), optional y
      sequence_recurrence inputs: u0, a (> 0), b (> 0), optional u

    When the bounded sequence/function is omitted it is built by running
    the hypothesis with equality, which makes the conclusion tight.
    Hypothesis violations are rejected, not reported as lemma failures.
    """
    if kind == "continuous":
        return _gronwall_continuous(**inputs)
    if kind == "sequence_sum":
        return _gronwall_sequence_sum(**inputs)
    if kind == "sequence_recurrence":
        return _gronwall_recurrence(**inputs)
    raise ValueError(f"unknown gronwall kind {kind!r}")


def _gronwall_continuous(times, alpha, beta, u=None) -> InequalityCheck:
    t = np.asarray(times, dtype=np.float64)
    a = np.asarray(alpha, dtype=np.float64)
    b = np.asarray(beta, dtype=np.float64)
    if t.ndim != 1 or t.size < 2 or not np.all(np.diff(t) > 0):
        raise ValueError("times must be an increasing grid with >= 2 nodes")
    if a.shape != t.shape or b.shape != t.shape:
        raise ValueError("alpha and beta must be sampled on the time grid")
    if np.any(np.diff(a) < 0):
        raise ValueError("alpha must be nondecreasing")
    if np.any(a < 0):
        # the discrete left-Riemann check is only one-sided for non-negative alpha
        raise ValueError("alpha must be non-negative")
    if np.any(b < 0):
        raise ValueError("beta must be non-negative")
    dt = np.diff(t)
    if u is None:
        # run the integral inequality with equality (left Riemann sums)
        u_eq = np.empty_like(a)
        acc = 0.0
        u_eq[0] = a[0]
        for k in range(1, t.size):
            acc += b[k - 1] * u_eq[k - 1] * dt[k - 1]
            u_eq[k] = a[k] + acc
        u = u_eq
    else:
        u = np.asarray(u, dtype=np.float64)
        integral = np.concatenate(([0.0], np.cumsum(b[:-1] * u[:-1] * dt)))
        if not np.all(u <= a + integral + _FP_SLACK * np.maximum(1.0, np.abs(a + integral))):
            raise ValueError("u violates the integral inequality hypothesis")
    beta_integral = np.concatenate(([0.0], np.cumsum(b[:-1] * dt)))
    return _conclude(u, a * np.exp(beta_integral))


def _gronwall_sequence_sum(f, b, y=None) -> InequalityCheck:
    f = np.asarray(f, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if f.ndim != 1 or f.shape != b.shape or f.size < 1:
        raise ValueError("f and b must be equal-length 1-d sequences")
    if np.any(f <= 0) or np.any(b <= 0):
        raise ValueError("f and b must be positive")
    m = f.size
    if y is None:
        y = np.empty(m)
        for k in range(m):
            y[k] = f[k] + float(np.dot(b[:k], y[:k]))
    else:
        y = np.asarray(y, dtype=np.float64)
        for k in range(m):
            cap = f[k] + float(np.dot(b[:k], y[:k]))
            if y[k] > cap + _FP_SLACK * max(1.0, abs(cap)):
                raise ValueError("y violates the summed hypothesis")
    rhs = np.empty(m)
    for k in range(m):
        acc = f[k]
        for l in range(k):
            acc += f[l] * b[l] * float(np.prod(1.0 + b[l + 1:k]))
        rhs[k] = acc
    return _conclude(y, rhs)


def _gronwall_recurrence(u0, a, b, u=None) -> InequalityCheck:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or a.shape != b.shape or a.size < 1:
        raise ValueError("a and b must be equal-length 1-d sequences")
    if np.any(a <= 0) or np.any(b <= 0):
        raise ValueError("a and b must be positive")
    k_max = a.size
    if u is None:
        u = np.empty(k_max + 1)
        u[0] = u0
        for k in range(1, k_max + 1):
            u[k] = a[k - 1] * u[k - 1] + b[k - 1]
    else:
        u = np.asarray(u, dtype=np.float64)
        if u.shape != (k_max + 1,) or u[0] != u0:
            raise ValueError("u must have length len(a) + 1 and start at u0")
        for k in range(1, k_max + 1):
            cap = a[k - 1] * u[k - 1] + b[k - 1]
            if u[k] > cap + _FP_SLACK * max(1.0, abs(cap)):
                raise ValueError("u violates the recurrence hypothesis")
    rhs = np.empty(k_max + 1)
    rhs[0] = u0
    for k in range(1, k_max + 1):
        prod_all = float(np.prod(a[:k]))
        acc = prod_all * u0
        for j in range(1, k + 1):
            acc += b[j - 1] * float(np.prod(a[j:k]))
        rhs[k] = acc
    return _conclude(u, rhs)


@dataclass
class GammaRatioCheck:
    passed: bool
    lower: float
    ratio: float
    upper: float

    def __bool__(self) -> bool:
        return self.passed


def gamma_ratio_check(x: float, lam: float) -> GammaRatioCheck:
    """Verify ``x**(1-lam) <= Gamma(x+1)/Gamma(x+lam) <= (x+1)**(1-lam)``."""
    if not x > 0:
        raise ValueError("x must be positive")
    if not 0.0 < lam < 1.0:
        raise ValueError("lam must lie strictly inside (0, 1)")
    ratio = math.exp(math.lgamma(x + 1.0) - math.lgamma(x + lam))
    lower = x ** (1.0 - lam)
    upper = (x + 1.0) ** (1.0 - lam)
    return GammaRatioCheck(lower <= ratio <= upper, lower, ratio, upper)
