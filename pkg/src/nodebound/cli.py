"""Command-line entry point.

Subcommands: ``bound`` (evaluate closed-form bounds from a JSON parameter
file), ``verify`` (run the oracle suite), ``train`` (one training run),
``sweep-width`` / ``sweep-lambda`` / ``lip-gap`` (the three experiment
protocols).  Every run writes a ``manifest.json`` echoing the fully
resolved configuration and the produced files, so re-running a manifest
reproduces identical bytes.  Exit codes: 0 success, 1 invalid
configuration or precondition, 2 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bounds, svgplot
from .experiments import classification_data, lip_gap_run, sweep_lambda, sweep_width
from .training import TrainConfig, train
from .verify import run_all


class CliError(Exception):
    pass


def _load_params(path: str | None) -> dict:
    if path is None:
        return {}
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict):
        raise CliError("parameter file must hold a JSON object")
    return doc


def _apply_overrides(config: dict, pairs: list[str]) -> dict:
    for pair in pairs:
        if "=" not in pair:
            raise CliError(f"override {pair!r} is not key=value")
        key, raw = pair.split("=", 1)
        if key not in config:
            raise CliError(f"unknown config key {key!r}; known keys: {', '.join(sorted(config))}")
        config[key] = json.loads(raw) if raw and raw[0] in "[{" else _coerce(config[key], raw)
    return config


def _coerce(template, raw: str):
    if isinstance(template, bool):
        return raw.lower() in ("1", "true", "yes")
    if isinstance(template, int) and not isinstance(template, bool):
        return int(raw)
    if isinstance(template, float):
        return float(raw)
    if isinstance(template, list):
        return [type(template[0])(v) if template else v for v in raw.split(",")]
    return raw


def _merge_config(defaults: dict, params: dict, overrides: list[str]) -> dict:
    config = dict(defaults)
    for key, value in params.items():
        if key not in config:
            raise CliError(f"unknown config key {key!r}; known keys: {', '.join(sorted(config))}")
        config[key] = value
    return _apply_overrides(config, overrides)


def _write_outputs(out_dir: str, subcommand: str, config: dict, files: dict[str, str],
                   seed: int | None = None) -> list[str]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in files.items():
        (out / name).write_text(text)
        written.append(name)
    manifest = {
        "subcommand": subcommand,
        "seed": seed,
        "config": config,
        "outputs": sorted(written) + ["manifest.json"],
    }
    # the config block round-trips: feed it back through --params with the same
    # seed to reproduce every output byte
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return written


# ---------------------------------------------------------------------------
# bound evaluation


def _run_bound(args) -> int:
    if args.set:
        raise CliError("bound takes no --set overrides; edit the parameter file instead")
    params = _load_params(args.params)
    if not params:
        raise CliError("bound needs --params pointing at a JSON file")
    known = {"solution", "covering_monotone", "covering_bv", "rademacher",
             "generalization", "parameterized_ode", "ncde"}
    unknown = set(params) - known
    if unknown:
        raise CliError(f"unknown bound sections: {', '.join(sorted(unknown))}")

    reports: dict[str, dict] = {}
    lines = []
    if "solution" in params:
        p = bounds.SolutionBoundParams(**params["solution"])
        value = bounds.solution_norm_bound(p)
        reports["solution"] = {"value": value}
        lines.append(f"solution norm bound        {value:.6g}")
    if "covering_monotone" in params:
        value = bounds.covering_bound_monotone(**params["covering_monotone"])
        reports["covering_monotone"] = {"value": value}
        lines.append(f"monotone covering bound    {value:.6g}")
    if "covering_bv" in params:
        cb = bounds.covering_bound_bv(**params["covering_bv"])
        reports["covering_bv"] = {"value": cb.value, "log2_value": cb.log2_value}
        lines.append(f"BV covering bound          {cb.value:.6g} (log2 {cb.log2_value:.4f})")
    if "rademacher" in params:
        rb = bounds.rademacher_bound(bounds.ComplexityParams(**params["rademacher"]))
        reports["rademacher"] = {"value": rb.value, "dudley_cutoff": rb.dudley_cutoff}
        lines.append(f"rademacher bound           {rb.value:.6g}")
    if "generalization" in params:
        section = dict(params["generalization"])
        complexity = bounds.ComplexityParams(**section.pop("complexity"))
        report = bounds.generalization_bound(bounds.GenBoundParams(complexity=complexity, **section))
        reports["generalization"] = report.as_dict()
        lines.append(f"generalization bound       {report.total:.6g}")
        for term, value in report.terms.items():
            lines.append(f"  {term:<24} {value:.6g}")
    if "parameterized_ode" in params:
        report = bounds.marion_bound(**params["parameterized_ode"])
        reports["parameterized_ode"] = report.as_dict()
        lines.append(f"parameterized-ODE bound    {report.total:.6g}")
        for term, value in report.terms.items():
            lines.append(f"  {term:<24} {value:.6g}")
    if "ncde" in params:
        report = bounds.ncde_bound(**params["ncde"])
        reports["ncde"] = report.as_dict()
        lines.append(f"controlled-ODE bound       {report.total:.6g}")
        for term, value in report.terms.items():
            lines.append(f"  {term:<24} {value:.6g}")

    table = "\n".join(lines) + "\n"
    print(table, end="")
    if args.out:
        _write_outputs(args.out, "bound", params,
                       {"report.json": json.dumps(reports, indent=2, sort_keys=True) + "\n"},
                       seed=args.seed)
    return 0


def _run_verify(args) -> int:
    if args.set:
        raise CliError("verify takes no --set overrides")
    outcomes = run_all(seed=args.seed, quick=args.quick)
    width = max(len(o.name) for o in outcomes)
    failed = 0
    rows = []
    for o in outcomes:
        status = "PASS" if o.passed else "FAIL"
        failed += 0 if o.passed else 1
        rows.append(f"{o.name:<{width}}  {status}  {o.detail}")
    table = "\n".join(rows) + "\n"
    print(table, end="")
    if args.out:
        doc = [{"name": o.name, "passed": o.passed, "detail": o.detail} for o in outcomes]
        _write_outputs(args.out, "verify", {"quick": args.quick},
                       {"verify.json": json.dumps(doc, indent=2) + "\n", "verify.txt": table},
                       seed=args.seed)
    return 0 if failed == 0 else 2


TRAIN_DEFAULTS = {
    "data": "linear",          # linear | sin | blobs
    "train_n": 100,
    "eval_n": 20,
    "width": 50,
    "state_dim": 16,           # blobs only
    "activation": "relu",
    "modulation": "sine",
    "loss": "mse",
    "epochs": 50,
    "lr": 0.01,
    "batch_size": 0,
    "lambda": 0.0,
    "solver_steps": 20,
    "noise_sigma": 0.0,
}


def _build_train_run(config: dict, seed: int):
    from .datasets import gen_linear_dataset, gen_sin_dataset
    from .model import random_model
    from .seeding import derive_seed

    data = config["data"]
    if data == "linear":
        train_set = gen_linear_dataset(config["train_n"], derive_seed(seed, "train-data"))
        eval_set = gen_linear_dataset(config["eval_n"], derive_seed(seed, "eval-data"))
        model = random_model(2, 2, [config["width"]], 2, config["activation"], config["modulation"],
                             steps=config["solver_steps"], rng=derive_seed(seed, "model"),
                             identity_maps=True)
    elif data == "sin":
        train_set = gen_sin_dataset(config["train_n"], derive_seed(seed, "train-data"),
                                    config["noise_sigma"])
        eval_set = gen_sin_dataset(config["eval_n"], derive_seed(seed, "eval-data"),
                                   config["noise_sigma"])
        model = random_model(2, config["width"], [], 1, config["activation"], "none",
                             steps=config["solver_steps"], rng=derive_seed(seed, "model"))
    elif data == "blobs":
        train_set, eval_set = classification_data(train_n=config["train_n"],
                                                  test_n=config["eval_n"], seed=seed)
        model = random_model(train_set.inputs.shape[1], config["state_dim"], [config["width"]],
                             2, "tanh", "none", steps=config["solver_steps"],
                             rng=derive_seed(seed, "model"))
    else:
        raise CliError(f"unknown data kind {data!r}")
    loss_kind = "cross_entropy" if data == "blobs" else config["loss"]
    train_config = TrainConfig(
        epochs=config["epochs"], lr=config["lr"], batch_size=config["batch_size"],
        loss_kind=loss_kind, penalty_weight=config["lambda"],
        seed=derive_seed(seed, "train"), solver_steps=config["solver_steps"],
    )
    return model, train_set, eval_set, train_config


def _run_train(args) -> int:
    config = _merge_config(TRAIN_DEFAULTS, _load_params(args.params), args.set or [])
    model, train_set, eval_set, train_config = _build_train_run(config, args.seed)
    record = train(model, train_set, eval_set, train_config)
    files = {"record.csv": record.to_csv()}
    from .model import to_json
    files["model.json"] = to_json(model) + "\n"
    if args.out:
        _write_outputs(args.out, "train", config, files, seed=args.seed)
    last = record.rows[-1] if record.rows else None
    if last is None:
        print("diverged before the first epoch completed")
        return 1
    print(f"epochs={len(record.rows)} train_loss={last.train_loss:.6g} "
          f"eval_loss={last.eval_loss:.6g} gap={last.gen_gap:.6g} diverged={record.diverged}")
    return 0


SWEEP_WIDTH_DEFAULTS = {
    "widths": [100, 200, 300, 400, 500, 600, 700, 800, 900],
    "trials": 5,
    "train_n": 100,
    "test_n": 30,
    "epochs": 100,
    "lr": 0.01,
    "solver_steps": 2,
}

SWEEP_LAMBDA_DEFAULTS = {
    "lambdas": [0.0, 0.01, 0.1, 1.0],
    "trials": 20,
    "train_n": 100,
    "eval_n": 20,
    "hidden": 50,
    "epochs": 50,
    "lr": 0.01,
    "solver_steps": 8,
    "init_scale": 2.0,
}

LIP_GAP_DEFAULTS = {
    "train_n": 2000,
    "test_n": 1000,
    "epochs": 10,
    "lr": 0.001,
    "batch_size": 128,
    "solver_steps": 8,
    "state_dim": 32,
    "hidden": 256,
    "init_scale": 2.0,
    "images": "",
    "labels": "",
}


def _sweep_files(result, svg: bool, svg_kind: str) -> dict[str, str]:
    files = {
        "records.csv": result.records_csv(),
        "trials.csv": result.trials_csv(),
        f"summary_{result.sweep_name}.csv": result.summary_csv(),
    }
    if svg and result.summaries:
        xs = sorted(result.summaries)
        if svg_kind == "scatter":
            files["trend.svg"] = svgplot.scatter_svg(
                [e.sweep_value for e in result.entries],
                [e.final_eval_loss for e in result.entries],
                title="test error vs width", xlabel="hidden units", ylabel="test mse",
            )
        else:
            files["trend.svg"] = svgplot.box_svg(
                {str(x): result.summaries[x] for x in xs},
                title="generalization gap vs penalty weight", xlabel="lambda", ylabel="gap",
            )
    return files


def _run_sweep_width(args) -> int:
    config = _merge_config(SWEEP_WIDTH_DEFAULTS, _load_params(args.params), args.set or [])
    if args.widths:
        config["widths"] = [int(w) for w in args.widths.split(",")]
    if args.trials:
        config["trials"] = args.trials
    base = TrainConfig(epochs=config["epochs"], lr=config["lr"], solver_steps=config["solver_steps"])
    result = sweep_width(config["widths"], config["trials"], base, base_seed=args.seed,
                         train_n=config["train_n"], test_n=config["test_n"], threads=args.threads)
    print(f"widths={config['widths']} trials={config['trials']} "
          f"spearman(width, mean test error)={result.correlation:.4f} divergent={result.divergent}")
    if args.out:
        _write_outputs(args.out, "sweep-width", config,
                       _sweep_files(result, args.svg, "scatter"), seed=args.seed)
    return 0


def _run_sweep_lambda(args) -> int:
    config = _merge_config(SWEEP_LAMBDA_DEFAULTS, _load_params(args.params), args.set or [])
    if args.lambdas:
        config["lambdas"] = [float(v) for v in args.lambdas.split(",")]
    if args.trials:
        config["trials"] = args.trials
    base = TrainConfig(epochs=config["epochs"], lr=config["lr"], solver_steps=config["solver_steps"])
    result = sweep_lambda(config["lambdas"], config["trials"], base, base_seed=args.seed,
                          train_n=config["train_n"], eval_n=config["eval_n"],
                          hidden=config["hidden"], init_scale=config["init_scale"],
                          threads=args.threads)
    means = {lam: result.summaries[lam]["mean"] for lam in sorted(result.summaries)}
    print(f"lambdas={config['lambdas']} trials={config['trials']} mean gaps={means} "
          f"divergent={result.divergent}")
    if args.out:
        _write_outputs(args.out, "sweep-lambda", config,
                       _sweep_files(result, args.svg, "box"), seed=args.seed)
    return 0


def _run_lip_gap(args) -> int:
    config = _merge_config(LIP_GAP_DEFAULTS, _load_params(args.params), args.set or [])
    images = config["images"] or None
    labels = config["labels"] or None
    train_set, test_set = classification_data(images, labels, config["train_n"],
                                              config["test_n"], seed=args.seed)
    run_config = TrainConfig(epochs=config["epochs"], lr=config["lr"],
                             batch_size=config["batch_size"], loss_kind="cross_entropy",
                             solver_steps=config["solver_steps"])
    result = lip_gap_run(train_set, test_set, run_config, base_seed=args.seed,
                         state_dim=config["state_dim"], hidden=config["hidden"],
                         init_scale=config["init_scale"])
    print(f"data={train_set.provenance} epochs={len(result.lipschitz)} "
          f"spearman(lipschitz, gap)={result.correlation:.4f}")
    files = {"record.csv": result.record.to_csv(), "epochs.csv": result.epochs_csv()}
    if args.svg and result.lipschitz:
        files["trend.svg"] = svgplot.scatter_svg(result.lipschitz, result.error_gap,
                                                 title="error gap vs dynamics Lipschitz",
                                                 xlabel="lipschitz", ylabel="error gap")
    if args.out:
        _write_outputs(args.out, "lip-gap", config, files, seed=args.seed)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nodebound",
                                     description="Neural ODE bounds, oracles, and experiments")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, trials_flag=False):
        p.add_argument("--params", help="JSON parameter file")
        p.add_argument("--out", help="output directory (writes manifest.json)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override one config key (repeatable)")
        p.add_argument("--threads", type=int, default=None,
                       help=f"parallel trials (default: ${{{'NODEBOUND_THREADS'}}} or cores)")
        p.add_argument("--svg", action="store_true", help="also write an SVG figure")
        if trials_flag:
            p.add_argument("--trials", type=int, default=None)

    p_bound = sub.add_parser("bound", help="evaluate closed-form bounds from a JSON file")
    common(p_bound)
    p_bound.set_defaults(func=_run_bound)

    p_verify = sub.add_parser("verify", help="run the oracle verification suite")
    common(p_verify)
    p_verify.add_argument("--quick", action="store_true", help="reduced case counts")
    p_verify.set_defaults(func=_run_verify)

    p_train = sub.add_parser("train", help="one training run")
    common(p_train)
    p_train.set_defaults(func=_run_train)

    p_w = sub.add_parser("sweep-width", help="test error vs hidden units")
    common(p_w, trials_flag=True)
    p_w.add_argument("--widths", help="comma-separated widths")
    p_w.set_defaults(func=_run_sweep_width)

    p_l = sub.add_parser("sweep-lambda", help="generalization gap vs penalty weight")
    common(p_l, trials_flag=True)
    p_l.add_argument("--lambdas", help="comma-separated penalty weights")
    p_l.set_defaults(func=_run_sweep_lambda)

    p_g = sub.add_parser("lip-gap", help="per-epoch Lipschitz constant vs error gap")
    common(p_g)
    p_g.set_defaults(func=_run_lip_gap)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (CliError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
