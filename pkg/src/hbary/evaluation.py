"""Metrics and benchmark procedures.

The benchmarked methods are HB (hierarchical fit on all rows), B1 (regular
barycenter on the fully observed rows only), B2 (nearest-neighbor imputation
then a regular fit), and B3 (oracle fit on the unhidden data). Every method
tunes its own hyperparameters on the same validation set.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dataset import (
    CATEGORICAL,
    CONTINUOUS,
    Covariate,
    CovariateSchema,
    DataError,
    HeterogeneousDataset,
    fully_observed_indices,
    restrict_rows,
    split,
)
from .kernels import silverman_bandwidth
from .pipeline import DEFAULT_L_MAX, DEFAULT_N_MIN, tune_and_fit
from .solver import BarycenterSolution, SolverConfig
from .synthgen import (
    MissingTestData,
    SyntheticTruth,
    gen_extrapolation,
    gen_hidden_factor,
    gen_missing_test,
    gen_structured,
)
from .transport import log_kde_density, simulate_conditional_many
from .tuning import TuningGrid, mean_validation_loglik

METHODS = ("HB", "B1", "B2", "B3")
METRIC_AVG_KL = "avg_KL"
METRIC_AVG_LOGLIK = "avg_loglik"

BONE_SIZES = (218, 218, 24, 25)


def gaussian_kl(mu_hat: float, sigma_hat: float, mu: float, sigma: float) -> float:
    """KL(N(mu_hat, sigma_hat^2) || N(mu, sigma^2)) in closed form."""
    if not (sigma_hat > 0 and sigma > 0):
        raise ValueError(f"standard deviations must be positive, got {sigma_hat}, {sigma}")
    return (
        math.log(sigma / sigma_hat)
        + (sigma_hat**2 + (mu - mu_hat) ** 2) / (2.0 * sigma**2)
        - 0.5
    )


def kl_from_samples(samples: np.ndarray, truth: SyntheticTruth, record: dict) -> float:
    """Moment-match the samples to a Gaussian and compare to the truth at z."""
    samples = np.asarray(samples, dtype=float).reshape(-1)
    mu_hat = float(samples.mean())
    sigma_hat = float(samples.std(ddof=1))
    if not sigma_hat > 0:
        raise ValueError(f"degenerate simulated samples (zero spread) at z={record}")
    return gaussian_kl(mu_hat, sigma_hat, truth.f(record), truth.g(record))


def truth_grid(truth: SyntheticTruth, resolution: int) -> list[dict]:
    """Uniform midpoint lattice over the truth's covariate support."""
    if resolution < 1:
        raise ValueError("grid resolution must be >= 1")
    names = list(truth.z_support)
    axes = []
    for name in names:
        lo, hi = truth.z_support[name]
        step = (hi - lo) / resolution
        axes.append(lo + step * (np.arange(resolution) + 0.5))
    grids = np.meshgrid(*axes, indexing="ij")
    return [
        {name: float(grids[j].ravel()[i]) for j, name in enumerate(names)}
        for i in range(grids[0].size)
    ]


def average_kl(sol: BarycenterSolution, truth: SyntheticTruth, grid_resolution: int = 10) -> float:
    """Average Gaussian KL between simulated and true conditionals over a
    uniform grid of covariate targets."""
    if sol.x.shape[1] != 1:
        raise ValueError("the closed-form KL metric applies to scalar responses")
    records = truth_grid(truth, grid_resolution)
    sample_sets = simulate_conditional_many(sol, records)
    values = [kl_from_samples(ss.samples, truth, rec) for ss, rec in zip(sample_sets, records)]
    return float(np.mean(values))


def avg_loglik(sol: BarycenterSolution, validation: HeterogeneousDataset) -> float:
    """Mean held-out log-likelihood of simulated conditionals (Silverman KDE)."""
    return mean_validation_loglik(sol, validation)


def impute_nearest_neighbor(d: HeterogeneousDataset) -> HeterogeneousDataset:
    """Fill each absent covariate from the nearest row (Euclidean distance in
    x) that observes it; ties break toward the lowest row index."""
    if d.extended:
        raise ValueError("impute before covariate extension, not after")
    new_z = [dict(rec) for rec in d.z]
    for cov in d.schema.covariates:
        donors = np.array([i for i in range(d.n) if cov.name in d.z[i]], dtype=int)
        if donors.size == 0:
            raise DataError(f"covariate {cov.name} is observed nowhere, cannot impute")
        donor_x = d.x[donors]
        for i in range(d.n):
            if cov.name in d.z[i]:
                continue
            dist = np.sum((donor_x - d.x[i]) ** 2, axis=1)
            new_z[i][cov.name] = d.z[donors[int(np.argmin(dist))]][cov.name]
    return HeterogeneousDataset(schema=d.schema, x=d.x.copy(), z=new_z)


# ---------------------------------------------------------------------------
# Benchmark harness


@dataclass
class BenchmarkResult:
    method: str
    metric: str
    value: float
    seeds: list[int]
    per_seed: list[float]

    def __post_init__(self):
        if len(self.seeds) != len(self.per_seed):
            raise ValueError("one value per seed required")
        if self.per_seed and not math.isclose(
            self.value, float(np.mean(self.per_seed)), rel_tol=1e-12, abs_tol=1e-12
        ):
            raise ValueError("value must be the mean of the per-seed values")


@dataclass
class MissingTestSpec:
    test_id: int
    n1: int = 80
    n2: int = 80
    n3: int = 20
    n_val: int = 20


@dataclass
class BoneSpec:
    """User-supplied measurements for the hide-and-score protocol."""

    x: np.ndarray
    gender: np.ndarray
    age: np.ndarray
    sizes: tuple[int, int, int, int] = BONE_SIZES

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float).reshape(-1)
        self.gender = np.asarray(self.gender, dtype=object).reshape(-1)
        self.age = np.asarray(self.age, dtype=float).reshape(-1)
        n = self.x.size
        if self.gender.size != n or self.age.size != n:
            raise DataError("bone columns must have equal lengths")
        if n < sum(self.sizes):
            raise DataError(
                f"bone protocol needs at least {sum(self.sizes)} rows, got {n}"
            )


def load_bone_csv(path, column_map: dict | None = None) -> BoneSpec:
    """Read a user-supplied bone-density CSV; the column map adapts to the
    header names of the copy at hand."""
    cols = {"age": "age", "gender": "gender", "spnbmd": "spnbmd"}
    cols.update(column_map or {})
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError("bone CSV has no header")
        missing = [c for c in cols.values() if c not in reader.fieldnames]
        if missing:
            raise DataError(f"bone CSV lacks columns {missing}; use a column map")
        xs, genders, ages = [], [], []
        for lineno, row in enumerate(reader, start=2):
            try:
                xs.append(float(row[cols["spnbmd"]]))
                ages.append(float(row[cols["age"]]))
            except (TypeError, ValueError):
                raise DataError(f"bone CSV row {lineno}: non-numeric value") from None
            genders.append(str(row[cols["gender"]]).strip())
    if not xs:
        raise DataError("bone CSV has no data rows")
    return BoneSpec(x=np.array(xs), gender=np.array(genders, dtype=object), age=np.array(ages))


_BONE_SCHEMA = CovariateSchema(
    covariates=(Covariate("gender", CATEGORICAL), Covariate("age", CONTINUOUS)),
    response_dim=1,
)


def _bone_bundle(spec: BoneSpec, seed: int) -> MissingTestData:
    """One hide-repetition: shuffle, then hide age on the first group, gender
    on the second, nothing on the third; the last rows form the validation."""
    n1, n2, n3, n_val = spec.sizes
    rng = np.random.default_rng(seed)
    perm = rng.permutation(spec.x.size)[: n1 + n2 + n3 + n_val]
    records = [
        {"gender": str(spec.gender[i]), "age": float(spec.age[i])} for i in perm
    ]
    x = spec.x[perm][:, None]
    hidden = []
    for i in range(n1 + n2 + n3):
        rec = dict(records[i])
        if i < n1:
            del rec["age"]
        elif i < n1 + n2:
            del rec["gender"]
        hidden.append(rec)
    n_train = n1 + n2 + n3
    return MissingTestData(
        train=HeterogeneousDataset(schema=_BONE_SCHEMA, x=x[:n_train], z=hidden),
        validation=HeterogeneousDataset(
            schema=_BONE_SCHEMA, x=x[n_train:], z=[dict(r) for r in records[n_train:]]
        ),
        complete=HeterogeneousDataset(
            schema=_BONE_SCHEMA, x=x[:n_train].copy(), z=[dict(r) for r in records[:n_train]]
        ),
        truth=None,
    )


def _make_bundle(spec, seed: int) -> MissingTestData:
    if isinstance(spec, MissingTestSpec):
        return gen_missing_test(spec.test_id, spec.n1, spec.n2, spec.n3, spec.n_val, seed)
    if isinstance(spec, BoneSpec):
        return _bone_bundle(spec, seed)
    raise TypeError(f"unsupported benchmark spec {type(spec).__name__}")


def method_training_set(bundle: MissingTestData, method: str) -> HeterogeneousDataset:
    if method == "HB":
        return bundle.train
    if method == "B1":
        observed = fully_observed_indices(bundle.train)
        if observed.size == 0:
            raise ValueError("B1 requires at least one fully observed row")
        return restrict_rows(bundle.train, observed)
    if method == "B2":
        return impute_nearest_neighbor(bundle.train)
    if method == "B3":
        if bundle.complete is None:
            raise ValueError("B3 requires the unhidden data")
        return bundle.complete
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


@dataclass
class _BenchTask:
    spec: object
    method: str
    metric: str
    seed: int
    grid: TuningGrid | None
    l_max: int
    n_min: int
    config: SolverConfig | None
    grid_resolution: int = 10


def _bench_worker(task: _BenchTask) -> float:
    bundle = _make_bundle(task.spec, task.seed)
    train = method_training_set(bundle, task.method)
    sol, _ = tune_and_fit(
        train,
        bundle.validation,
        grid=task.grid,
        l_max=task.l_max,
        n_min=task.n_min,
        config=task.config,
    )
    if task.metric == METRIC_AVG_KL:
        if bundle.truth is None:
            raise ValueError("avg_KL needs a synthetic truth")
        return average_kl(sol, bundle.truth, task.grid_resolution)
    if task.metric == METRIC_AVG_LOGLIK:
        return avg_loglik(sol, bundle.validation)
    raise ValueError(f"unknown metric {task.metric!r}")


def _pmap(fn, tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
        return list(pool.map(fn, tasks))


def run_benchmark(
    spec,
    method: str,
    metric: str,
    seeds,
    grid: TuningGrid | None = None,
    l_max: int = DEFAULT_L_MAX,
    n_min: int = DEFAULT_N_MIN,
    config: SolverConfig | None = None,
    jobs: int = 1,
) -> BenchmarkResult:
    """Run one method over the given seeds and average the metric."""
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ValueError("at least one seed required")
    tasks = [_BenchTask(spec, method, metric, s, grid, l_max, n_min, config) for s in seeds]
    per_seed = _pmap(_bench_worker, tasks, jobs)
    return BenchmarkResult(
        method=method,
        metric=metric,
        value=float(np.mean(per_seed)),
        seeds=seeds,
        per_seed=[float(v) for v in per_seed],
    )


def run_benchmark_suite(
    spec,
    methods,
    metric: str,
    seeds,
    grid: TuningGrid | None = None,
    l_max: int = DEFAULT_L_MAX,
    n_min: int = DEFAULT_N_MIN,
    config: SolverConfig | None = None,
    jobs: int = 1,
) -> list[BenchmarkResult]:
    """All methods over shared seeds, parallelized across (method, seed)."""
    seeds = [int(s) for s in seeds]
    methods = list(methods)
    tasks = [
        _BenchTask(spec, m, metric, s, grid, l_max, n_min, config)
        for m in methods
        for s in seeds
    ]
    flat = _pmap(_bench_worker, tasks, jobs)
    out = []
    for j, m in enumerate(methods):
        vals = flat[j * len(seeds) : (j + 1) * len(seeds)]
        out.append(
            BenchmarkResult(
                method=m,
                metric=metric,
                value=float(np.mean(vals)),
                seeds=seeds,
                per_seed=[float(v) for v in vals],
            )
        )
    return out


# ---------------------------------------------------------------------------
# Experiment protocols beyond the missing-data tables


@dataclass
class StructuredTrial:
    alpha: float
    seed: int
    kl: dict[str, float] = field(default_factory=dict)


def structured_trial(
    alpha: float,
    seed: int,
    n1: int = 40,
    n2: int = 100,
    n_val: int = 10,
    grid: TuningGrid | None = None,
    config: SolverConfig | None = None,
    grid_resolution: int = 10,
) -> StructuredTrial:
    """Shared-information experiment: KL of the hierarchical fit on both
    groups versus the regular barycenter on the fully observed group alone.

    ``n_val`` extra fully observed rows are generated on top of ``n1`` and
    held out, so the training group sizes match the protocol exactly.
    """
    data, truth = gen_structured(alpha, n1 + n_val, n2, seed)
    train, validation = split(data, n_val, seed)
    trial = StructuredTrial(alpha=alpha, seed=seed)
    for method in ("HB", "B1"):
        train_m = (
            train
            if method == "HB"
            else restrict_rows(train, fully_observed_indices(train))
        )
        sol, _ = tune_and_fit(train_m, validation, grid=grid, config=config)
        trial.kl[method] = average_kl(sol, truth, grid_resolution)
    return trial


@dataclass
class ExtrapolationTrial:
    seed: int
    targets: tuple[dict, dict]
    sample_mean: dict[str, tuple[float, float]] = field(default_factory=dict)


def extrapolation_trial(
    seed: int,
    n1: int = 40,
    n2: int = 100,
    n_val: int = 10,
    grid: TuningGrid | None = None,
    config: SolverConfig | None = None,
) -> ExtrapolationTrial:
    """Simulated sample means at the extrapolation and interpolation targets
    for the hierarchical fit and the first-group-only barycenter."""
    data, truth, targets = gen_extrapolation(n1 + n_val, n2, seed)
    train, validation = split(data, n_val, seed)
    trial = ExtrapolationTrial(seed=seed, targets=targets)
    for method in ("HB", "B1"):
        train_m = (
            train
            if method == "HB"
            else restrict_rows(train, fully_observed_indices(train))
        )
        sol, _ = tune_and_fit(train_m, validation, grid=grid, config=config)
        sets = simulate_conditional_many(sol, list(targets))
        trial.sample_mean[method] = tuple(float(s.samples.mean()) for s in sets)
    return trial


@dataclass
class ModeStats:
    n_modes: int
    mass_ratio: float | None


def mode_stats(samples, grid_size: int = 512) -> ModeStats:
    """Count KDE modes of a scalar sample at the Silverman bandwidth; when
    exactly two, report the mass ratio split at the valley between them."""
    values = np.asarray(samples, dtype=float).reshape(-1)
    sd = values.std(ddof=1)
    if not sd > 0:
        return ModeStats(n_modes=1, mass_ratio=None)
    zs = (values - values.mean()) / sd
    h = silverman_bandwidth(zs, d=1)
    grid = np.linspace(zs.min() - 3 * h, zs.max() + 3 * h, grid_size)
    pdf = np.exp(log_kde_density(zs[:, None], np.array([h]), grid[:, None]))
    interior = (pdf[1:-1] > pdf[:-2]) & (pdf[1:-1] > pdf[2:])
    peaks = np.flatnonzero(interior) + 1
    if peaks.size != 2:
        return ModeStats(n_modes=int(peaks.size), mass_ratio=None)
    valley = peaks[0] + int(np.argmin(pdf[peaks[0] : peaks[1] + 1]))
    below = float(np.mean(zs <= grid[valley]))
    above = 1.0 - below
    if min(below, above) == 0.0:
        return ModeStats(n_modes=2, mass_ratio=None)
    return ModeStats(n_modes=2, mass_ratio=max(below, above) / min(below, above))


@dataclass
class HiddenFactorTrial:
    seed: int
    modes: dict[str, ModeStats] = field(default_factory=dict)
    barycenter: dict[str, np.ndarray] = field(default_factory=dict)


def hidden_factor_trial(
    seed: int,
    n1: int = 40,
    n2: int = 50,
    n_val: int = 10,
    grid: TuningGrid | None = None,
    config: SolverConfig | None = None,
) -> HiddenFactorTrial:
    """Fit the hidden-factor data and report barycenter mode statistics for
    the hierarchical fit and the first-group-only barycenter."""
    data, _, _ = gen_hidden_factor(n1 + n_val, n2, seed)
    train, validation = split(data, n_val, seed)
    trial = HiddenFactorTrial(seed=seed)
    for method in ("HB", "B1"):
        train_m = (
            train
            if method == "HB"
            else restrict_rows(train, fully_observed_indices(train))
        )
        sol, _ = tune_and_fit(train_m, validation, grid=grid, config=config)
        bary = sol.y[:, 0]
        trial.barycenter[method] = bary.copy()
        trial.modes[method] = mode_stats(bary)
    return trial
