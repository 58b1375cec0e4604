"""The three desk-scale experiment protocols and their summary statistics.

Each sweep derives every random stream from one base seed, runs
independent trials (optionally across a thread pool), and reports
rank-correlation trends: test error against model width, generalization
gap against the training penalty weight, and per-epoch gap against the
measured dynamics Lipschitz constant.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.stats
from threadpoolctl import threadpool_limits

from .datasets import Dataset, gen_blob_dataset, gen_linear_dataset, gen_sin_dataset, load_idx
from .model import random_model
from .seeding import derive_seed
from .training import ExperimentRecord, TrainConfig, train

THREADS_ENV = "NODEBOUND_THREADS"


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    if raw.strip():
        return max(1, int(raw))
    return os.cpu_count() or 1


def spearman(xs, ys) -> float:
    """Rank correlation with average-rank ties; NaN when either series is constant."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1 or xs.size < 2:
        raise ValueError("need two equal-length series with >= 2 entries")
    if np.all(xs == xs[0]) or np.all(ys == ys[0]):
        return math.nan
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rho = scipy.stats.spearmanr(xs, ys).statistic
    return float(rho)


def quartile_summary(values) -> dict[str, float]:
    """Box-plot statistics with linear-interpolation quantiles."""
    arr = np.asarray(values, dtype=np.float64)
    q = np.quantile(arr, [0.0, 0.25, 0.5, 0.75, 1.0])
    return {
        "mean": float(np.mean(arr)),
        "min": float(q[0]),
        "q1": float(q[1]),
        "median": float(q[2]),
        "q3": float(q[3]),
        "max": float(q[4]),
    }


@dataclass
class SweepEntry:
    sweep_value: float
    trial: int
    record: ExperimentRecord
    final_gap: float
    final_eval_loss: float
    final_lipschitz: float


@dataclass
class SweepResult:
    sweep_name: str
    entries: list[SweepEntry]
    summaries: dict[float, dict[str, float]]
    correlation: float
    divergent: int = 0

    def records_csv(self) -> str:
        lines = [ExperimentRecord.CSV_HEADER]
        for e in self.entries:
            lines.append(e.record.to_csv(header=False).rstrip("\n"))
        return "\n".join(lines) + "\n"

    def trials_csv(self) -> str:
        lines = ["sweep_value,trial,final_gap,final_lipschitz"]
        for e in self.entries:
            lines.append(f"{e.sweep_value!r},{e.trial},{e.final_gap!r},{e.final_lipschitz!r}")
        return "\n".join(lines) + "\n"

    def summary_csv(self) -> str:
        lines = ["sweep_value,mean,min,q1,median,q3,max"]
        for value in sorted(self.summaries):
            s = self.summaries[value]
            lines.append(
                f"{value!r},{s['mean']!r},{s['min']!r},{s['q1']!r},{s['median']!r},{s['q3']!r},{s['max']!r}"
            )
        return "\n".join(lines) + "\n"


def _run_trials(jobs, threads: int):
    """Run the job closures, preserving submission order in the results.

    Worker threads pin the BLAS pools to one thread each; without that the
    nested parallelism oversubscribes the cores and runs slower than a
    sequential pass.
    """
    if threads <= 1 or len(jobs) <= 1:
        return [job() for job in jobs]
    with threadpool_limits(limits=1):
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(job) for job in jobs]
            return [f.result() for f in futures]


def sweep_width(widths, trials: int, base_config: TrainConfig, base_seed: int = 0,
                train_n: int = 100, test_n: int = 30, threads: int | None = None) -> SweepResult:
    """Test error of sine-target regression as the state width grows.

    Per trial the data is shared across widths so the correlation compares
    like with like; the trend statistic is the rank correlation between
    width and the mean final test error.
    """
    widths = [int(w) for w in widths]
    if not widths:
        raise ValueError("widths must be non-empty")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    threads = thread_count() if threads is None else threads

    def make_job(width, trial):
        def job():
            data_seed = derive_seed(base_seed, "width-data", trial)
            train_set = gen_sin_dataset(train_n, data_seed)
            test_set = gen_sin_dataset(test_n, derive_seed(base_seed, "width-data-test", trial))
            model = random_model(
                input_dim=2, state_dim=width, hidden_dims=[], output_dim=1,
                activation="relu", modulation="none", t_final=1.0,
                steps=base_config.solver_steps,
                rng=derive_seed(base_seed, f"width-model-{width}", trial),
            )
            config = TrainConfig(
                epochs=base_config.epochs, lr=base_config.lr, batch_size=0,
                loss_kind="mse", penalty_weight=0.0,
                seed=derive_seed(base_seed, f"width-train-{width}", trial),
                solver_steps=base_config.solver_steps,
            )
            return train(model, train_set, test_set, config)
        return job

    pairs = [(w, t) for w in widths for t in range(trials)]
    records = _run_trials([make_job(w, t) for w, t in pairs], threads)
    entries, divergent = [], 0
    for (w, t), rec in zip(pairs, records):
        if rec.diverged or not rec.rows:
            divergent += 1
            continue
        entries.append(SweepEntry(float(w), t, rec, rec.final_gap, rec.final_eval_loss,
                                  rec.rows[-1].lipschitz))
    summaries = {}
    for w in widths:
        vals = [e.final_eval_loss for e in entries if e.sweep_value == float(w)]
        if vals:
            summaries[float(w)] = quartile_summary(vals)
    if len(summaries) >= 2:
        xs = sorted(summaries)
        correlation = spearman(xs, [summaries[x]["mean"] for x in xs])
    else:
        correlation = math.nan
    return SweepResult("width", entries, summaries, correlation, divergent)


def sweep_lambda(lambdas, trials: int, base_config: TrainConfig, base_seed: int = 0,
                 train_n: int = 100, eval_n: int = 20, hidden: int = 50,
                 init_scale: float = 2.0, threads: int | None = None) -> SweepResult:
    """Generalization gap of the linear task under growing spectral-penalty weight.

    Data and model initialisation are shared across penalty values within a
    trial, so the penalty weight is the only difference between paired runs.
    The doubled init scale starts the unpenalized runs with visibly rough
    vector fields; 50 epochs re-fit the task either way, so the penalty's
    smoothing is what separates the gap distributions.
    """
    lambdas = [float(v) for v in lambdas]
    if not lambdas:
        raise ValueError("lambdas must be non-empty")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    threads = thread_count() if threads is None else threads

    def make_job(lam, trial):
        def job():
            train_set = gen_linear_dataset(train_n, derive_seed(base_seed, "lambda-data", trial))
            eval_set = gen_linear_dataset(eval_n, derive_seed(base_seed, "lambda-data-eval", trial))
            model = random_model(
                input_dim=2, state_dim=2, hidden_dims=[hidden], output_dim=2,
                activation="relu", modulation="sine", t_final=1.0,
                steps=base_config.solver_steps,
                rng=derive_seed(base_seed, "lambda-model", trial),
                identity_maps=True, final_activation="identity", init_scale=init_scale,
            )
            config = TrainConfig(
                epochs=base_config.epochs, lr=base_config.lr, batch_size=0,
                loss_kind="mse", penalty_weight=lam,
                seed=derive_seed(base_seed, "lambda-train", trial),
                solver_steps=base_config.solver_steps,
            )
            return train(model, train_set, eval_set, config)
        return job

    pairs = [(lam, t) for lam in lambdas for t in range(trials)]
    records = _run_trials([make_job(lam, t) for lam, t in pairs], threads)
    entries, divergent = [], 0
    for (lam, t), rec in zip(pairs, records):
        if rec.diverged or not rec.rows:
            divergent += 1
            continue
        entries.append(SweepEntry(lam, t, rec, rec.final_gap, rec.final_eval_loss,
                                  rec.rows[-1].lipschitz))
    summaries = {}
    for lam in lambdas:
        gaps = [e.final_gap for e in entries if e.sweep_value == lam]
        if gaps:
            summaries[lam] = quartile_summary(gaps)
    if len(summaries) >= 2:
        xs = sorted(summaries)
        correlation = spearman(xs, [summaries[x]["mean"] for x in xs])
    else:
        correlation = math.nan
    return SweepResult("lambda", entries, summaries, correlation, divergent)


@dataclass
class LipGapResult:
    record: ExperimentRecord
    lipschitz: list[float] = field(default_factory=list)
    error_gap: list[float] = field(default_factory=list)
    correlation: float = math.nan

    def epochs_csv(self) -> str:
        lines = ["epoch,lipschitz,error_gap"]
        for i, (lip, gap) in enumerate(zip(self.lipschitz, self.error_gap), start=1):
            lines.append(f"{i},{lip!r},{gap!r}")
        return "\n".join(lines) + "\n"


def lip_gap_run(train_set: Dataset, test_set: Dataset, config: TrainConfig,
                base_seed: int = 0, state_dim: int = 16, hidden: int = 64,
                init_scale: float = 1.0) -> LipGapResult:
    """Classification run tracking the dynamics Lipschitz constant against the error gap.

    The gap is test error minus train error (error = 1 - accuracy); the
    result carries the rank correlation between the two per-epoch series.
    """
    if not (train_set.is_classification and test_set.is_classification):
        raise ValueError("lip_gap_run needs classification datasets")
    classes = int(max(train_set.targets.max(), test_set.targets.max())) + 1
    model = random_model(
        input_dim=train_set.inputs.shape[1], state_dim=state_dim, hidden_dims=[hidden],
        output_dim=classes, activation="tanh", modulation="none", t_final=1.0,
        steps=config.solver_steps, rng=derive_seed(base_seed, "lip-gap-model"),
        final_activation="identity", init_scale=init_scale,
    )
    run_config = TrainConfig(
        epochs=config.epochs, lr=config.lr, batch_size=config.batch_size,
        loss_kind="cross_entropy", penalty_weight=config.penalty_weight,
        seed=derive_seed(base_seed, "lip-gap-train"), solver_steps=config.solver_steps,
    )

    lipschitz: list[float] = []
    error_gap: list[float] = []

    def on_epoch(model_, row, train_metrics, eval_metrics):
        lipschitz.append(row.lipschitz)
        # (1 - test accuracy) - (1 - train accuracy)
        error_gap.append(train_metrics["accuracy"] - eval_metrics["accuracy"])

    record = train(model, train_set, test_set, run_config, epoch_callback=on_epoch)
    rho = spearman(lipschitz, error_gap) if len(lipschitz) >= 2 else math.nan
    return LipGapResult(record, lipschitz, error_gap, rho)


def classification_data(images_path=None, labels_path=None, train_n: int = 2000,
                        test_n: int = 1000, seed: int = 0) -> tuple[Dataset, Dataset]:
    """IDX image data when paths are given, otherwise the Gaussian-blob fallback.

    The fallback blobs carry 20% label noise: within the short pinned
    training budget the noisy labels are what capacity growth memorizes, so
    the generalization gap has an actual signal to track.
    """
    if images_path is not None and labels_path is not None:
        full = load_idx(images_path, labels_path, limit=train_n + test_n)
        if full.n < train_n + test_n:
            raise ValueError(f"need {train_n + test_n} rows, file holds {full.n}")
        train_set = Dataset(full.inputs[:train_n], full.targets[:train_n], full.provenance, seed)
        test_set = Dataset(full.inputs[train_n:], full.targets[train_n:], full.provenance, seed)
        return train_set, test_set
    train_set = gen_blob_dataset(train_n, derive_seed(seed, "blob-train"),
                                 dim=8, separation=1.5, label_noise=0.2)
    test_set = gen_blob_dataset(test_n, derive_seed(seed, "blob-test"),
                                dim=8, separation=1.5, label_noise=0.2)
    return train_set, test_set
