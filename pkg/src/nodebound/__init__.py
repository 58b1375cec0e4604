"""Neural ODE training at desk scale, closed-form generalization bounds, and the
brute-force oracles that verify them."""

from .bounds import (
    BoundReport,
    ComplexityParams,
    CoveringBound,
    GenBoundParams,
    RademacherBound,
    SolutionBoundParams,
    covering_bound_bv,
    covering_bound_monotone,
    generalization_bound,
    marion_bound,
    ncde_bound,
    rademacher_bound,
    rademacher_floor,
    solution_norm_bound,
    weight_norm_bound,
)
from .datasets import Dataset, gen_blob_dataset, gen_linear_dataset, gen_sin_dataset, load_idx
from .linalg import SpectralEstimate, spectral_norm
from .model import (
    MLPDynamics,
    NeuralODEModel,
    eval_dynamics,
    forward,
    from_json,
    network_lipschitz,
    random_model,
    to_json,
    weight_path_lipschitz,
)
from .odeint import SolverDivergence, Trajectory, rk4_solve
from .oracles import (
    SampledFunctionClass,
    StaircaseClass,
    central_binomial,
    count_monotone,
    exact_covering_number,
    gamma_ratio_check,
    gronwall_check,
    mc_rademacher,
    total_variation,
)
from .training import ExperimentRecord, TrainConfig, evaluate, loss, penalized_loss, train

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "ComplexityParams",
    "CoveringBound",
    "Dataset",
    "ExperimentRecord",
    "GenBoundParams",
    "MLPDynamics",
    "NeuralODEModel",
    "RademacherBound",
    "SampledFunctionClass",
    "SolutionBoundParams",
    "SolverDivergence",
    "SpectralEstimate",
    "StaircaseClass",
    "TrainConfig",
    "Trajectory",
    "central_binomial",
    "count_monotone",
    "covering_bound_bv",
    "covering_bound_monotone",
    "eval_dynamics",
    "evaluate",
    "exact_covering_number",
    "forward",
    "from_json",
    "gamma_ratio_check",
    "gen_blob_dataset",
    "gen_linear_dataset",
    "gen_sin_dataset",
    "generalization_bound",
    "gronwall_check",
    "load_idx",
    "loss",
    "marion_bound",
    "mc_rademacher",
    "ncde_bound",
    "network_lipschitz",
    "penalized_loss",
    "rademacher_bound",
    "rademacher_floor",
    "random_model",
    "rk4_solve",
    "solution_norm_bound",
    "spectral_norm",
    "to_json",
    "total_variation",
    "train",
    "weight_norm_bound",
    "weight_path_lipschitz",
]
