"""Command-line surface: generate, fit, tune, simulate, bench, export-barycenter.

Exit codes are a stable contract: 0 success, 2 usage, 3 non-convergence,
4 unsupported simulation target, 5 missing external data, 6 corrupt input.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import (
    DataError,
    HeterogeneousDataset,
    format_float,
    load_dataset,
    load_schema,
    schema_to_json,
    write_dataset,
)
from .evaluation import (
    BONE_SIZES,
    METHODS,
    METRIC_AVG_KL,
    METRIC_AVG_LOGLIK,
    BoneSpec,
    MissingTestSpec,
    extrapolation_trial,
    hidden_factor_trial,
    load_bone_csv,
    run_benchmark_suite,
    structured_trial,
    _pmap,
)
from .pipeline import DEFAULT_L_MAX, DEFAULT_N_MIN, fit as fit_pipeline, tune_and_fit
from .solver import NonConvergenceError, load_solution, save_solution
from .synthgen import (
    gen_extrapolation,
    gen_hidden_factor,
    gen_missing_test,
    gen_structured,
)
from .transport import UnsupportedTargetError, simulate_conditional
from .tuning import TuningGrid, default_grid

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NONCONVERGENCE = 3
EXIT_UNSUPPORTED_TARGET = 4
EXIT_MISSING_DATA = 5
EXIT_CORRUPT_INPUT = 6

SEED_ENV_VAR = "HBARY_SEED"

GENERATE_TESTS = ("missing1", "missing2", "missing3", "structured", "extrapolation", "hidden")
BENCH_EXPERIMENTS = GENERATE_TESTS + ("bone",)


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        return 0


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_atomic(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_manifest(out_dir: Path, command: str, args: dict, seed, inputs, outputs, t0: float) -> Path:
    manifest = {
        "command": command,
        "arguments": {k: v for k, v in sorted(args.items())},
        "seed": seed,
        "input_digests": {str(p): _sha256(Path(p)) for p in inputs},
        "output_paths": [str(p) for p in outputs],
        "tool_version": __version__,
        "wall_time_seconds": time.time() - t0,
    }
    path = out_dir / "manifest.json"
    _write_atomic(path, json.dumps(manifest, indent=2) + "\n")
    return path


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def _fmt(value) -> str:
    return format_float(value) if isinstance(value, float) else str(value)


def _truth_json(truth) -> str:
    doc = {
        "descriptor": truth.descriptor,
        "z_support": {k: list(v) for k, v in truth.z_support.items()},
        "noise_kind": truth.noise_kind,
    }
    return json.dumps(doc, indent=2) + "\n"


# ---------------------------------------------------------------------------
# generate


def cmd_generate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    seed = args.seed
    outputs = []

    def emit_dataset(name: str, d: HeterogeneousDataset):
        path = out / name
        with open(path, "w", encoding="utf-8", newline="") as fh:
            write_dataset(d, fh)
        outputs.append(path)
        return d

    if args.test.startswith("missing"):
        test_id = int(args.test[-1])
        bundle = gen_missing_test(
            test_id, args.n1, args.n2, args.n3, args.n_val, seed=seed
        )
        emit_dataset("data.csv", bundle.train)
        emit_dataset("val.csv", bundle.validation)
        emit_dataset("complete.csv", bundle.complete)
        schema, truth = bundle.train.schema, bundle.truth
    elif args.test == "structured":
        data, truth = gen_structured(args.alpha, args.n1, args.n2, seed=seed)
        emit_dataset("data.csv", data)
        schema = data.schema
    elif args.test == "extrapolation":
        data, truth, targets = gen_extrapolation(args.n1, args.n2, seed=seed)
        emit_dataset("data.csv", data)
        truth.descriptor["targets"] = list(targets)
        schema = data.schema
    elif args.test == "hidden":
        data, truth, labels = gen_hidden_factor(args.n1, args.n2, seed=seed)
        emit_dataset("data.csv", data)
        labels_path = out / "hidden_labels.csv"
        _write_csv(labels_path, ["row", "label"], [(i, _fmt(float(v))) for i, v in enumerate(labels)])
        outputs.append(labels_path)
        schema = data.schema
    else:  # unreachable through argparse choices
        raise AssertionError(args.test)

    schema_path = out / "schema.json"
    _write_atomic(schema_path, schema_to_json(schema) + "\n")
    truth_path = out / "truth.json"
    _write_atomic(truth_path, _truth_json(truth))
    outputs += [schema_path, truth_path]
    outputs.append(
        write_manifest(out, "generate", vars(args), seed, [], outputs, t0)
    )
    print(f"wrote {len(outputs)} files to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# fit


def _load_inputs(data_path, schema_path):
    schema = load_schema(schema_path)
    return load_dataset(data_path, schema), schema


def _write_convergence_log(path: Path, history) -> None:
    _write_csv(
        path,
        ["iteration", "objective", "eta", "grad_norm"],
        [(h.iteration, _fmt(h.objective), _fmt(h.eta), _fmt(h.grad_max_norm)) for h in history],
    )


def cmd_fit(args, parser) -> int:
    if args.tune and args.lambda_scale is not None:
        parser.error("--lambda conflicts with --tune; pick one")
    if args.tune and not args.val:
        parser.error("--tune requires --val")
    if not args.tune and args.lambda_scale is None:
        parser.error("either --lambda or --tune is required")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    train, schema = _load_inputs(args.data, args.schema)
    inputs = [args.data, args.schema]

    if args.tune:
        validation = load_dataset(args.val, schema)
        inputs.append(args.val)
        sol, report = tune_and_fit(
            train, validation, grid=_grid_from_args(args), l_max=args.lmax, n_min=args.nmin
        )
    else:
        sol = fit_pipeline(
            train,
            lambda_scale=args.lambda_scale,
            h_y_multiplier=args.hy_mult,
            l_max=args.lmax,
            n_min=args.nmin,
        )

    sol_path = out / "solution.json"
    save_solution(sol, sol_path)
    log_path = out / "convergence.csv"
    _write_convergence_log(log_path, sol.history)
    outputs = [sol_path, log_path]
    outputs.append(write_manifest(out, "fit", vars(args), args.seed, inputs, outputs, t0))
    diag = sol.diagnostics
    print(
        f"fit: iterations={diag.iterations} objective={diag.objective:.6g} "
        f"grad_max={diag.grad_max_norm:.3e} converged={diag.converged}"
    )
    if not diag.converged:
        print("non-convergence: gradient tolerance not reached", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    return EXIT_OK


# ---------------------------------------------------------------------------
# tune


def _grid_from_args(args) -> TuningGrid:
    grid = default_grid()
    lambdas = grid.lambda_values
    mults = grid.h_y_multipliers
    if getattr(args, "lambda_grid", None):
        lambdas = tuple(float(v) for v in args.lambda_grid.split(","))
    if getattr(args, "hy_mult_grid", None):
        mults = tuple(float(v) for v in args.hy_mult_grid.split(","))
    return TuningGrid(lambda_values=lambdas, h_y_multipliers=mults)


def cmd_tune(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    train, schema = _load_inputs(args.data, args.schema)
    validation = load_dataset(args.val, schema)
    _, report = tune_and_fit(
        train, validation, grid=_grid_from_args(args), l_max=args.lmax, n_min=args.nmin
    )
    report_path = out / "tuning.csv"
    _write_csv(
        report_path,
        ["lambda", "h_y_multiplier", "score"],
        [(_fmt(e.lambda_scale), _fmt(e.h_y_multiplier), _fmt(e.score)) for e in report.entries],
    )
    best_path = out / "best.json"
    _write_atomic(
        best_path,
        json.dumps(
            {
                "lambda": report.best.lambda_scale,
                "h_y_multiplier": report.best.h_y_multiplier,
                "score": report.best.score,
            },
            indent=2,
        )
        + "\n",
    )
    outputs = [report_path, best_path]
    outputs.append(
        write_manifest(out, "tune", vars(args), args.seed, [args.data, args.schema, args.val], outputs, t0)
    )
    print(f"best lambda={report.best.lambda_scale:g} h_y_multiplier={report.best.h_y_multiplier:g}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate


def _parse_targets(pairs, sol, parser) -> dict:
    target = {}
    names = [c.name for c in sol.schema.covariates]
    if sol.extended:
        names = [n for n in names if n != "w"]
    for pair in pairs or []:
        if "=" not in pair:
            parser.error(f"--z expects name=value, got {pair!r}")
        key, _, raw = pair.partition("=")
        if key not in names:
            parser.error(f"unknown covariate {key!r}; valid names: {names}")
        kind = sol.schema.kind_of(key)
        if kind == "continuous":
            try:
                target[key] = float(raw)
            except ValueError:
                parser.error(f"covariate {key} expects a number, got {raw!r}")
        else:
            target[key] = raw
    return target


def cmd_simulate(args, parser) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    sol = load_solution(args.solution)
    target = _parse_targets(args.z, sol, parser)
    sample_set = simulate_conditional(sol, target)
    samples = sample_set.samples

    samples_path = out / "samples.csv"
    dim = samples.shape[1]
    _write_csv(
        samples_path,
        [f"x{j + 1}" for j in range(dim)],
        [[_fmt(float(v)) for v in row] for row in samples],
    )
    hist_path = out / "histogram.csv"
    rows = []
    for j in range(dim):
        counts, edges = np.histogram(samples[:, j], bins=args.bins)
        for b in range(args.bins):
            rows.append((f"x{j + 1}", _fmt(float(edges[b])), _fmt(float(edges[b + 1])), int(counts[b])))
    _write_csv(hist_path, ["dimension", "bin_left", "bin_right", "count"], rows)

    sidecar = out / "target.json"
    _write_atomic(
        sidecar,
        json.dumps(
            {
                "z_target": sample_set.target,
                "solution": str(args.solution),
                "solution_digest": _sha256(Path(args.solution)),
                "n_samples": int(samples.shape[0]),
            },
            indent=2,
        )
        + "\n",
    )
    outputs = [samples_path, hist_path, sidecar]
    outputs.append(write_manifest(out, "simulate", vars(args), args.seed, [args.solution], outputs, t0))
    print(f"simulated {samples.shape[0]} samples at {sample_set.target}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# export-barycenter


def cmd_export_barycenter(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    sol = load_solution(args.solution)
    bary_path = out / "barycenter.csv"
    dim = sol.y.shape[1]
    _write_csv(
        bary_path,
        [f"y{j + 1}" for j in range(dim)],
        [[_fmt(float(v)) for v in row] for row in sol.y],
    )
    sidecar = out / "barycenter.json"
    _write_atomic(
        sidecar,
        json.dumps(
            {
                "standardized_scale": True,
                "standardization": {"mean": list(sol.mean), "scale": list(sol.scale)},
                "solution": str(args.solution),
                "n": sol.n,
            },
            indent=2,
        )
        + "\n",
    )
    outputs = [bary_path, sidecar]
    outputs.append(
        write_manifest(out, "export-barycenter", vars(args), args.seed, [args.solution], outputs, t0)
    )
    print(f"exported {sol.n} barycenter points")
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench


def _summary_json(results) -> dict:
    summary = {}
    for res in results:
        summary[res.method] = {
            "metric": res.metric,
            "mean": float(np.mean(res.per_seed)),
            "std": float(np.std(res.per_seed, ddof=1)) if len(res.per_seed) > 1 else 0.0,
            "seeds": res.seeds,
        }
    return summary


def _bench_rows(results):
    for res in results:
        for seed, value in zip(res.seeds, res.per_seed):
            yield (res.method, res.metric, seed, _fmt(float(value)))


def cmd_bench(args, parser) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in METHODS:
            parser.error(f"unknown method {m!r}; choose from {','.join(METHODS)}")
    if args.seeds < 1:
        parser.error("--seeds must be >= 1")
    seeds = [args.seed + i for i in range(args.seeds)]
    jobs = args.jobs or os.cpu_count() or 1
    grid = _grid_from_args(args)
    outputs = []
    inputs = []

    if args.experiment.startswith("missing"):
        spec = MissingTestSpec(test_id=int(args.experiment[-1]))
        results = run_benchmark_suite(
            spec, methods, METRIC_AVG_KL, seeds, grid=grid, jobs=jobs
        )
        bench_path = out / "benchmark.csv"
        _write_csv(bench_path, ["method", "metric", "seed", "value"], _bench_rows(results))
        summary_path = out / "summary.json"
        _write_atomic(summary_path, json.dumps(_summary_json(results), indent=2) + "\n")
        outputs += [bench_path, summary_path]
    elif args.experiment == "bone":
        if not args.data:
            print(
                "bone experiment needs --data pointing at the bone-density CSV "
                "(user supplied; see README for column mapping)",
                file=sys.stderr,
            )
            return EXIT_MISSING_DATA
        column_map = {}
        for pair in (args.map or "").split(","):
            if pair:
                key, _, val = pair.partition("=")
                column_map[key.strip()] = val.strip()
        spec = load_bone_csv(args.data, column_map)
        inputs.append(args.data)
        results = run_benchmark_suite(
            spec, methods, METRIC_AVG_LOGLIK, seeds, grid=grid, jobs=jobs
        )
        bench_path = out / "benchmark.csv"
        _write_csv(bench_path, ["method", "metric", "seed", "value"], _bench_rows(results))
        summary_path = out / "summary.json"
        _write_atomic(summary_path, json.dumps(_summary_json(results), indent=2) + "\n")
        outputs += [bench_path, summary_path]
    elif args.experiment == "structured":
        alphas = [float(a) for a in args.alphas.split(",")]
        for alpha in alphas:
            trials = _pmap(
                _structured_worker,
                [(alpha, s, grid) for s in seeds],
                jobs,
            )
            path = out / f"structured_alpha{alpha:g}.csv"
            rows = []
            for trial in trials:
                for method in ("HB", "B1"):
                    rows.append((method, METRIC_AVG_KL, trial.seed, _fmt(trial.kl[method])))
            _write_csv(path, ["method", "metric", "seed", "value"], rows)
            outputs.append(path)
        summary = {}
        for alpha, path in zip(alphas, outputs):
            rows = list(csv.DictReader(open(path, encoding="utf-8")))
            for method in ("HB", "B1"):
                vals = [float(r["value"]) for r in rows if r["method"] == method]
                summary.setdefault(method, {})[str(alpha)] = float(np.mean(vals))
        summary_path = out / "summary.json"
        _write_atomic(summary_path, json.dumps(summary, indent=2) + "\n")
        outputs.append(summary_path)
    elif args.experiment == "extrapolation":
        trials = _pmap(_extrapolation_worker, [(s, grid) for s in seeds], jobs)
        path = out / "benchmark.csv"
        rows = []
        for trial in trials:
            for method in ("HB", "B1"):
                mean_a, mean_b = trial.sample_mean[method]
                rows.append((method, "sample_mean_za", trial.seed, _fmt(mean_a)))
                rows.append((method, "sample_mean_zb", trial.seed, _fmt(mean_b)))
        _write_csv(path, ["method", "metric", "seed", "value"], rows)
        outputs.append(path)
        za, zb = trials[0].targets
        summary = {"targets": {"za": za, "zb": zb}}
        for method in ("HB", "B1"):
            summary[method] = {
                "mean_za": float(np.mean([t.sample_mean[method][0] for t in trials])),
                "mean_zb": float(np.mean([t.sample_mean[method][1] for t in trials])),
            }
        summary_path = out / "summary.json"
        _write_atomic(summary_path, json.dumps(summary, indent=2) + "\n")
        outputs.append(summary_path)
    elif args.experiment == "hidden":
        trials = _pmap(_hidden_worker, [(s, grid) for s in seeds], jobs)
        path = out / "benchmark.csv"
        rows = []
        for trial in trials:
            for method in ("HB", "B1"):
                stats = trial.modes[method]
                rows.append((method, "n_modes", trial.seed, stats.n_modes))
                if stats.mass_ratio is not None:
                    rows.append((method, "mode_mass_ratio", trial.seed, _fmt(stats.mass_ratio)))
        _write_csv(path, ["method", "metric", "seed", "value"], rows)
        outputs.append(path)
        for trial in trials:
            for method in ("HB", "B1"):
                bary_path = out / f"barycenter_{method}_seed{trial.seed}.csv"
                _write_csv(bary_path, ["y1"], [( _fmt(float(v)),) for v in trial.barycenter[method]])
                outputs.append(bary_path)
        summary = {}
        for method in ("HB", "B1"):
            two = [t for t in trials if t.modes[method].n_modes == 2]
            ratios = [t.modes[method].mass_ratio for t in two if t.modes[method].mass_ratio]
            summary[method] = {
                "seeds_with_two_modes": len(two),
                "total_seeds": len(trials),
                "mean_mass_ratio_when_two": float(np.mean(ratios)) if ratios else None,
            }
        summary_path = out / "summary.json"
        _write_atomic(summary_path, json.dumps(summary, indent=2) + "\n")
        outputs.append(summary_path)
    else:
        raise AssertionError(args.experiment)

    outputs.append(write_manifest(out, "bench", vars(args), args.seed, inputs, outputs, t0))
    print(f"benchmark complete: {len(outputs)} files in {out}")
    return EXIT_OK


def _structured_worker(task):
    alpha, seed, grid = task
    return structured_trial(alpha, seed, grid=grid)


def _extrapolation_worker(task):
    seed, grid = task
    return extrapolation_trial(seed, grid=grid)


def _hidden_worker(task):
    seed, grid = task
    return hidden_factor_trial(seed, grid=grid)


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hbary",
        description="Hierarchical optimal-transport barycenters for conditional density simulation",
    )
    parser.add_argument("--version", action="version", version=f"hbary {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    seed_kwargs = dict(type=int, default=_default_seed(), help="random seed (env HBARY_SEED)")

    p = sub.add_parser("generate", help="write a synthetic dataset with its truth descriptor")
    p.add_argument("--test", required=True, choices=GENERATE_TESTS)
    p.add_argument("--n1", type=int, default=None)
    p.add_argument("--n2", type=int, default=None)
    p.add_argument("--n3", type=int, default=20)
    p.add_argument("--n-val", type=int, default=20, dest="n_val")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--seed", **seed_kwargs)
    p.add_argument("--out", required=True)

    p = sub.add_parser("fit", help="fit a barycenter solution")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--lambda", dest="lambda_scale", type=float, default=None)
    p.add_argument("--hy-mult", dest="hy_mult", type=float, default=1.0)
    p.add_argument("--lmax", type=int, default=DEFAULT_L_MAX)
    p.add_argument("--nmin", type=int, default=DEFAULT_N_MIN)
    p.add_argument("--tune", action="store_true", help="cross-validate instead of fixing --lambda")
    p.add_argument("--val", default=None, help="validation CSV (required with --tune)")
    p.add_argument("--lambda-grid", default=None, help="comma list of lambda values")
    p.add_argument("--hy-mult-grid", default=None, help="comma list of bandwidth multipliers")
    p.add_argument("--seed", **seed_kwargs)
    p.add_argument("--out", required=True)

    p = sub.add_parser("tune", help="cross-validate hyperparameters")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--val", required=True)
    p.add_argument("--lambda-grid", default=None)
    p.add_argument("--hy-mult-grid", default=None)
    p.add_argument("--lmax", type=int, default=DEFAULT_L_MAX)
    p.add_argument("--nmin", type=int, default=DEFAULT_N_MIN)
    p.add_argument("--seed", **seed_kwargs)
    p.add_argument("--out", required=True)

    p = sub.add_parser("simulate", help="pull the barycenter back to a covariate target")
    p.add_argument("--solution", required=True)
    p.add_argument("--z", action="append", metavar="NAME=VALUE")
    p.add_argument("--bins", type=int, default=30)
    p.add_argument("--seed", **seed_kwargs)
    p.add_argument("--out", required=True)

    p = sub.add_parser("bench", help="run a benchmark experiment")
    p.add_argument("--experiment", required=True, choices=BENCH_EXPERIMENTS)
    p.add_argument("--methods", default=",".join(METHODS))
    p.add_argument("--seeds", type=int, default=10, help="number of seeds/repetitions")
    p.add_argument("--alphas", default="0,0.25,0.5,1,2", help="structured experiment alphas")
    p.add_argument("--data", default=None, help="bone experiment: path to the bone CSV")
    p.add_argument("--map", default=None, help="bone column mapping age=..,gender=..,spnbmd=..")
    p.add_argument("--lambda-grid", default=None)
    p.add_argument("--hy-mult-grid", default=None)
    p.add_argument("--jobs", type=int, default=0, help="worker processes (0 = all cores)")
    p.add_argument("--seed", **seed_kwargs)
    p.add_argument("--out", required=True)

    p = sub.add_parser("export-barycenter", help="write the barycenter sample set")
    p.add_argument("--solution", required=True)
    p.add_argument("--seed", **seed_kwargs)
    p.add_argument("--out", required=True)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "generate":
            if args.n1 is None:
                args.n1 = {"structured": 40, "extrapolation": 40, "hidden": 40}.get(args.test, 80)
            if args.n2 is None:
                args.n2 = {"structured": 100, "extrapolation": 100, "hidden": 50}.get(args.test, 80)
            return cmd_generate(args)
        if args.command == "fit":
            return cmd_fit(args, parser)
        if args.command == "tune":
            return cmd_tune(args)
        if args.command == "simulate":
            return cmd_simulate(args, parser)
        if args.command == "bench":
            return cmd_bench(args, parser)
        if args.command == "export-barycenter":
            return cmd_export_barycenter(args)
        parser.error(f"unknown command {args.command}")
    except NonConvergenceError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except UnsupportedTargetError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_UNSUPPORTED_TARGET
    except (DataError, FileNotFoundError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CORRUPT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
