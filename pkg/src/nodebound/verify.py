"""End-to-end verification suite: every closed form checked against an independent route.

Each check pits a formula from :mod:`.bounds` (or a solver/gradient
implementation) against enumeration, Monte Carlo, finite differences, or a
hand-derived constant.  The CLI ``verify`` subcommand runs everything and
exits non-zero on any failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import (
    ComplexityParams,
    GenBoundParams,
    SolutionBoundParams,
    covering_bound_bv,
    covering_bound_monotone,
    generalization_bound,
    marion_bound,
    ncde_bound,
    rademacher_bound,
    solution_norm_bound,
)
from .autodiff import backward
from .model import (
    MLPDynamics,
    NeuralODEModel,
    eval_dynamics,
    network_lipschitz,
    parameter_arrays,
    random_model,
)
from .odeint import rk4_solve
from .oracles import (
    StaircaseClass,
    central_binomial,
    count_monotone,
    exact_covering_number,
    gamma_ratio_check,
    gronwall_check,
    mc_rademacher,
    total_variation,
)
from .seeding import derive_seed
from .training import penalized_loss


@dataclass
class CheckOutcome:
    name: str
    passed: bool
    detail: str

    def __bool__(self) -> bool:
        return self.passed


# ---------------------------------------------------------------------------
# golden closed-form values

GOLDEN_SOLUTION_BOUND = 4.0 * math.e  # params (1, 1, 1, 2, 1, 2, 1)
GOLDEN_COVERING_MONOTONE = 2.0**16 / 18.0  # (1, 1, 0.25)
GOLDEN_GENERALIZATION_TOTAL = 8.507423468899413
GOLDEN_MARION_TOTAL = 12.330102271469471
GOLDEN_NCDE_TOTAL = 106.68935983133558


def check_bound_golden_values() -> CheckOutcome:
    """Closed forms against high-precision evaluations of the same expressions."""
    failures = []

    v = solution_norm_bound(SolutionBoundParams(1.0, 1.0, 1.0, 2.0, 1.0, 2, 1.0))
    if abs(v - GOLDEN_SOLUTION_BOUND) > 1e-12 * GOLDEN_SOLUTION_BOUND:
        failures.append(f"solution norm bound {v} != 4e")

    c = covering_bound_monotone(1.0, 1.0, 0.25)
    if abs(c - GOLDEN_COVERING_MONOTONE) > 1e-12 * GOLDEN_COVERING_MONOTONE:
        failures.append(f"monotone covering bound {c} != 2**16/18")

    r = rademacher_bound(ComplexityParams(1.0, 1.0, 1, 100, 1.0)).value
    if not 3.9999 <= r <= 4.0001:
        failures.append(f"rademacher bound {r} outside [3.9999, 4.0001]")

    g = generalization_bound(GenBoundParams(0.1, 1.0, 1.0, 0.05, ComplexityParams(1.0, 1.0, 1, 100, 1.0)))
    if abs(g.total - GOLDEN_GENERALIZATION_TOTAL) > 1e-9 * GOLDEN_GENERALIZATION_TOTAL:
        failures.append(f"generalization total {g.total} != {GOLDEN_GENERALIZATION_TOTAL}")

    m = marion_bound(1, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 10_000, 0.05, 0.0)
    if abs(m.total - GOLDEN_MARION_TOTAL) > 1e-9 * GOLDEN_MARION_TOTAL:
        failures.append(f"parameterized-ODE total {m.total} != {GOLDEN_MARION_TOTAL}")

    nc = ncde_bound(1.0, 1.0, 1.0, 1, 2, 1, 100, 0.1, 1.0, 1.0)
    if abs(nc.total - GOLDEN_NCDE_TOTAL) > 1e-9 * GOLDEN_NCDE_TOTAL:
        failures.append(f"controlled-ODE total {nc.total} != {GOLDEN_NCDE_TOTAL}")

    return CheckOutcome("bound golden values", not failures, "; ".join(failures) or "5 formulas match")


def check_monotone_counts(max_grid: int = 8) -> CheckOutcome:
    """Exhaustive staircase counts equal the central binomial coefficients."""
    for grid in range(max_grid + 1):
        res = count_monotone(grid)
        cb = central_binomial(grid)
        if not res.exhaustive or res.value != cb.value:
            return CheckOutcome("monotone counts", False, f"mismatch at N={grid}")
    return CheckOutcome("monotone counts", True, f"N=0..{max_grid} enumerated")


def check_central_binomial(max_n: int = 29) -> CheckOutcome:
    for n in range(max_n + 1):
        res = central_binomial(n)
        if not res.recurrence_holds:
            return CheckOutcome("central binomial", False, f"recurrence fails at n={n}")
        if not res.upper_bound_holds:
            return CheckOutcome("central binomial", False, f"4**n/sqrt(pi n) bound fails at n={n}")
    return CheckOutcome("central binomial", True, f"recurrence and bound hold for n=0..{max_n}")


def check_gamma_ratio(points_per_axis: int = 9) -> CheckOutcome:
    xs = np.linspace(0.1, 10.0, points_per_axis)
    lams = np.linspace(0.1, 0.9, points_per_axis)
    bad = 0
    for x in xs:
        for lam in lams:
            if not gamma_ratio_check(float(x), float(lam)).passed:
                bad += 1
    total = points_per_axis**2
    return CheckOutcome("gamma ratio inequality", bad == 0, f"{total - bad}/{total} grid points pass")


def check_gronwall(cases: int = 100, seed: int = 0) -> CheckOutcome:
    """All three lemma variants on seeded hypothesis-satisfying inputs."""
    failures = 0
    for i in range(cases):
        rng = np.random.default_rng(derive_seed(seed, "gronwall", i))

        times = np.concatenate(([0.0], np.cumsum(rng.uniform(0.01, 0.1, size=20))))
        alpha = rng.uniform(0.0, 1.0) + np.concatenate(([0.0], np.cumsum(rng.uniform(0.0, 0.2, size=20))))
        beta = rng.uniform(0.0, 2.0, size=21)
        if not gronwall_check("continuous", times=times, alpha=alpha, beta=beta).passed:
            failures += 1

        m = int(rng.integers(3, 10))
        f = rng.uniform(0.1, 2.0, size=m)
        b = rng.uniform(0.01, 0.5, size=m)
        y = np.empty(m)
        for k in range(m):
            y[k] = rng.uniform(0.5, 1.0) * (f[k] + float(np.dot(b[:k], y[:k])))
        if not gronwall_check("sequence_sum", f=f, b=b, y=y).passed:
            failures += 1

        a = rng.uniform(0.5, 2.0, size=m)
        b2 = rng.uniform(0.1, 1.0, size=m)
        u0 = rng.uniform(0.0, 1.0)
        u = np.empty(m + 1)
        u[0] = u0
        for k in range(1, m + 1):
            u[k] = rng.uniform(0.5, 1.0) * (a[k - 1] * u[k - 1] + b2[k - 1])
        if not gronwall_check("sequence_recurrence", u0=u0, a=a, b=b2, u=u).passed:
            failures += 1
    return CheckOutcome("gronwall lemmas", failures == 0, f"{failures} failures in {3 * cases} checks")


def check_covering_soundness(grids=(6, 8), radii=(0.5, 0.25), sample_points: int = 64) -> CheckOutcome:
    """Searched staircase covers stay below the closed-form covering bound."""
    points = (np.arange(sample_points) + 0.5) / sample_points
    details = []
    for grid in grids:
        cls = StaircaseClass(grid, 1.0, 1.0).sample(points)
        for radius in radii:
            cover = exact_covering_number(cls, radius)
            bound = covering_bound_monotone(1.0, 1.0, radius)
            details.append(f"N={grid} tau={radius}: {cover.size} <= {bound:.1f}")
            if cover.size > bound:
                return CheckOutcome("covering soundness", False, details[-1])
    return CheckOutcome("covering soundness", True, "; ".join(details))


def check_rademacher_soundness(cases: int = 50, seed: int = 0) -> CheckOutcome:
    """Exact sign-enumeration Rademacher complexity never exceeds the entropy bound."""
    checked = 0
    for i in range(cases):
        rng = np.random.default_rng(derive_seed(seed, "rademacher-soundness", i))
        n = int(rng.integers(10, 13))
        horizon = float(rng.uniform(0.02, 0.1))
        height = float(rng.uniform(0.2, 1.0))
        grid = int(rng.integers(4, 9))
        points = np.sort(rng.uniform(0.0, horizon, size=n))
        cls = StaircaseClass(grid, horizon, height).sample(points, max_members=256,
                                                           seed=derive_seed(seed, "rademacher-members", i))
        params = ComplexityParams(horizon, height, 1, n, height)
        if height < 36.0 * horizon * height * math.log(2.0) / n:
            continue  # precondition does not hold; nothing to check
        bound = rademacher_bound(params).value
        est = mc_rademacher(cls)
        if not est.exact or est.value > bound:
            return CheckOutcome(
                "rademacher soundness", False,
                f"case {i}: estimate {est.value} vs bound {bound} (n={n}, L={horizon}, V={height})",
            )
        checked += 1
    return CheckOutcome("rademacher soundness", True, f"{checked}/{cases} classes below the bound")


def random_dynamics(rng, max_depth: int = 3, max_width: int = 8) -> tuple[MLPDynamics, str]:
    """Dynamics with U(-1, 1) weights and a random activation/modulation."""
    state = int(rng.integers(1, max_width + 1))
    depth = int(rng.integers(1, max_depth + 1))
    dims = [state] + [int(rng.integers(1, max_width + 1)) for _ in range(depth - 1)] + [state]
    weights = [rng.uniform(-1.0, 1.0, size=(dims[i], dims[i + 1])) for i in range(depth)]
    biases = [rng.uniform(-1.0, 1.0, size=dims[i + 1]) for i in range(depth)]
    activation = ("relu", "tanh", "identity")[int(rng.integers(0, 3))]
    final_activation = None if rng.random() < 0.5 else "identity"
    modulation = "sine" if depth >= 2 and rng.random() < 0.5 else "none"
    return MLPDynamics(weights, biases, activation, final_activation), modulation


def check_trajectory_soundness(cases: int = 1000, seed: int = 0, steps: int = 64,
                               tv_slack: float = 1.1) -> CheckOutcome:
    """RK4 trajectories respect the solution-norm bound and the variation bound."""
    norm_violations = 0
    tv_violations = 0
    for i in range(cases):
        rng = np.random.default_rng(derive_seed(seed, "trajectory", i))
        dynamics, modulation = random_dynamics(rng)
        model = NeuralODEModel(dynamics, modulation, t_final=1.0, steps=steps)
        z0 = rng.uniform(-1.0, 1.0, size=dynamics.state_dim)
        traj = rk4_solve(lambda z, t: eval_dynamics(model, z, t), z0, (0.0, 1.0), steps)

        weight_bound = max(float(np.linalg.norm(w, 2)) for w in dynamics.weights)
        bias_bound = max(float(np.linalg.norm(b)) for b in dynamics.biases)
        params = SolutionBoundParams(
            initial_norm=float(np.linalg.norm(z0)),
            time=1.0,
            activation_lipschitz=1.0,
            weight_bound=weight_bound,
            bias_bound=bias_bound,
            depth=dynamics.depth,
            dynamics_lipschitz=network_lipschitz(dynamics),
        )
        v_bound = solution_norm_bound(params)
        sup_norm = float(np.max(np.linalg.norm(traj.states, axis=1)))
        if sup_norm > v_bound * (1.0 + 1e-9):
            norm_violations += 1

        node_f = np.array([np.linalg.norm(eval_dynamics(model, traj.states[k], traj.times[k]))
                           for k in range(len(traj.times))])
        m_hat = float(np.max(node_f))
        if total_variation(traj) > tv_slack * m_hat * 1.0 + 1e-12:
            tv_violations += 1
    ok = norm_violations == 0 and tv_violations == 0
    return CheckOutcome(
        "trajectory bound soundness", ok,
        f"{cases} models: {norm_violations} norm violations, {tv_violations} variation violations",
    )


def finite_difference_grads(model: NeuralODEModel, inputs: np.ndarray, targets: np.ndarray,
                            kind: str = "mse", step: float = 1e-4) -> dict[str, np.ndarray]:
    """Central finite differences of the training loss for every parameter entry."""
    grads = {}
    for name, arr in parameter_arrays(model).items():
        g = np.zeros_like(arr)
        flat = arr.reshape(-1)
        gflat = g.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + step
            up = float(penalized_loss(model, inputs, targets, kind).value)
            flat[j] = orig - step
            down = float(penalized_loss(model, inputs, targets, kind).value)
            flat[j] = orig
            gflat[j] = (up - down) / (2.0 * step)
        grads[name] = g
    return grads


def _relu_kink_margin(node) -> float:
    """Smallest |pre-activation| feeding any relu on the node's tape."""
    margin = math.inf
    for entry in node.tape.nodes:
        if entry.op == "relu":
            margin = min(margin, float(np.min(np.abs(entry.parents[0].value))))
    return margin


def check_gradients(cases: int = 100, seed: int = 0, tol: float = 1e-4,
                    fd_step: float = 1e-4) -> CheckOutcome:
    """Tape gradients of full ODE-training losses against central differences.

    Central differences are only a valid oracle where the loss is smooth
    across the perturbation window, so draws whose relu pre-activations sit
    within 20x the step of a kink are redrawn.
    """
    worst = 0.0
    for i in range(cases):
        for attempt in range(50):
            rng = np.random.default_rng(derive_seed(seed, f"fd-grad-{attempt}", i))
            state = int(rng.integers(1, 4))
            hidden = [int(rng.integers(1, 5))] if rng.random() < 0.7 else []
            modulation = "sine" if hidden and rng.random() < 0.5 else "none"
            model = random_model(
                input_dim=2, state_dim=state, hidden_dims=hidden, output_dim=1,
                activation=("tanh", "relu", "identity")[int(rng.integers(0, 3))],
                modulation=modulation, t_final=1.0, steps=6, rng=rng,
            )
            # U(-1, 1) parameters, per the contract this check certifies
            for arr in parameter_arrays(model).values():
                arr[...] = rng.uniform(-1.0, 1.0, size=arr.shape)
            x = rng.uniform(-1.0, 1.0, size=(4, 2))
            y = rng.uniform(-1.0, 1.0, size=(4, 1))
            node = penalized_loss(model, x, y, "mse")
            if _relu_kink_margin(node) > 20.0 * fd_step:
                break
        tape_grads = backward(node.tape, node)
        fd_grads = finite_difference_grads(model, x, y, step=fd_step)
        tape_vec = np.concatenate([tape_grads[k].ravel() for k in sorted(tape_grads)])
        fd_vec = np.concatenate([fd_grads[k].ravel() for k in sorted(fd_grads)])
        denom = max(float(np.linalg.norm(fd_vec)), 1e-12)
        rel = float(np.linalg.norm(tape_vec - fd_vec)) / denom
        worst = max(worst, rel)
        if rel >= tol:
            return CheckOutcome("gradient check", False, f"case {i}: relative error {rel:.2e}")
    return CheckOutcome("gradient check", True, f"{cases} losses, worst relative error {worst:.2e}")


def rk4_convergence_slope(step_counts=(10, 20, 40, 80)) -> float:
    """Fitted order of the global RK4 error on dz/dt = z over [0, 1]."""
    errors = []
    for steps in step_counts:
        traj = rk4_solve(lambda z, t: z, np.array([1.0]), (0.0, 1.0), steps)
        errors.append(abs(float(traj.states[-1][0]) - math.e))
    hs = [1.0 / s for s in step_counts]
    slope = np.polyfit(np.log(hs), np.log(errors), 1)[0]
    return float(slope)


def check_rk4_convergence(lo: float = 3.8, hi: float = 4.2) -> CheckOutcome:
    slope = rk4_convergence_slope()
    return CheckOutcome("rk4 convergence order", lo <= slope <= hi, f"fitted slope {slope:.4f}")


def fitted_loglog_slope(ns, values) -> float:
    return float(np.polyfit(np.log(np.asarray(ns, dtype=float)), np.log(np.asarray(values)), 1)[0])


def check_rate_slopes() -> CheckOutcome:
    """The comparison bound's smoothness term is n**-0.25; ours decays like n**-0.5."""
    ns = [10**4, 10**5, 10**6, 10**7]
    terms = [
        marion_bound(1, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, n, 0.05, 0.0).terms["param_smoothness_term"]
        for n in ns
    ]
    slope_quarter = fitted_loglog_slope(ns, terms)
    if abs(slope_quarter + 0.25) > 1e-6:
        return CheckOutcome("rate comparison", False, f"smoothness-term slope {slope_quarter}")

    big_ns = [10**6, 10**7, 10**8, 10**9]
    rads = [rademacher_bound(ComplexityParams(1.0, 1.0, 1, n, 1.0)).value for n in big_ns]
    slope_half = fitted_loglog_slope(big_ns, rads)
    ok = -0.55 <= slope_half <= -0.45
    return CheckOutcome("rate comparison", ok,
                        f"smoothness-term slope {slope_quarter:.8f}, rademacher slope {slope_half:.4f}")


def check_bv_identity(cases: int = 50, seed: int = 0) -> CheckOutcome:
    """covering_bound_bv(tau, dim=1) equals covering_bound_monotone(tau/2)**2."""
    rng = np.random.default_rng(seed)
    for _ in range(cases):
        horizon = float(rng.uniform(0.1, 3.0))
        height = float(rng.uniform(0.1, 3.0))
        # radius kept large enough that the squared bound stays a finite double
        radius = float(rng.uniform(0.2, 1.0)) * math.sqrt(horizon * height)
        bv = covering_bound_bv(horizon, height, radius)
        mono = covering_bound_monotone(horizon, height, radius / 2.0, allow_large_radius=True)
        mono_log2 = math.log2(mono)
        if abs(bv.log2_value - 2.0 * mono_log2) > 1e-9 * max(abs(bv.log2_value), 1.0):
            return CheckOutcome("bv covering identity", False,
                                f"log2 mismatch at h={horizon} V={height} tau={radius}")
        if math.isfinite(bv.value) and abs(bv.value - mono**2) > 1e-9 * max(bv.value, 1.0):
            return CheckOutcome("bv covering identity", False,
                                f"value mismatch at h={horizon} V={height} tau={radius}")
    return CheckOutcome("bv covering identity", True, f"{cases} random parameter triples agree")


def run_all(seed: int = 0, quick: bool = False) -> list[CheckOutcome]:
    """The full oracle suite; ``quick`` trims the case counts for smoke runs."""
    cases = 20 if quick else 100
    traj_cases = 100 if quick else 1000
    rad_cases = 10 if quick else 50
    return [
        check_bound_golden_values(),
        check_monotone_counts(),
        check_central_binomial(),
        check_gamma_ratio(),
        check_gronwall(cases=cases, seed=seed),
        check_bv_identity(seed=seed),
        check_covering_soundness(),
        check_rademacher_soundness(cases=rad_cases, seed=seed),
        check_trajectory_soundness(cases=traj_cases, seed=seed),
        check_gradients(cases=cases, seed=seed),
        check_rk4_convergence(),
        check_rate_slopes(),
    ]
