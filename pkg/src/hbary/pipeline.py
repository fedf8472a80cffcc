"""End-to-end fitting: extension, subset enumeration, weighting, solving."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .dataset import HeterogeneousDataset, enumerate_subsets, extend_covariates
from .solver import BarycenterSolution, SolverConfig, solve
from .tuning import TuningGrid, TuningReport, base_h_y, cross_validate, default_grid, lambda_weights

DEFAULT_L_MAX = 2
DEFAULT_N_MIN = 5


@dataclass
class PreparedFit:
    """Extended training data with enumerated subsets and fixed weights."""

    train: HeterogeneousDataset
    subsets: list
    h0: np.ndarray
    r: np.ndarray


def prepare(
    train: HeterogeneousDataset, l_max: int = DEFAULT_L_MAX, n_min: int = DEFAULT_N_MIN
) -> PreparedFit:
    extended = extend_covariates(train)
    subsets = enumerate_subsets(extended, l_max=l_max, n_min=n_min)
    h0 = base_h_y(extended)
    r = lambda_weights(extended, subsets, h0)
    return PreparedFit(train=extended, subsets=subsets, h0=h0, r=r)


def fit_prepared(
    prep: PreparedFit,
    lambda_scale: float,
    h_y_multiplier: float = 1.0,
    config: SolverConfig | None = None,
) -> BarycenterSolution:
    cfg = config if config is not None else SolverConfig()
    cfg = replace(cfg, lambda_scale=lambda_scale, h_y=h_y_multiplier * prep.h0)
    weighted = [replace(s, penalty_weight=lambda_scale * rk) for s, rk in zip(prep.subsets, prep.r)]
    return solve(prep.train, weighted, cfg)


def fit(
    train: HeterogeneousDataset,
    lambda_scale: float,
    h_y_multiplier: float = 1.0,
    l_max: int = DEFAULT_L_MAX,
    n_min: int = DEFAULT_N_MIN,
    config: SolverConfig | None = None,
) -> BarycenterSolution:
    """Fit at explicit hyperparameters."""
    return fit_prepared(prepare(train, l_max, n_min), lambda_scale, h_y_multiplier, config)


def tune_and_fit(
    train: HeterogeneousDataset,
    validation: HeterogeneousDataset,
    grid: TuningGrid | None = None,
    l_max: int = DEFAULT_L_MAX,
    n_min: int = DEFAULT_N_MIN,
    config: SolverConfig | None = None,
) -> tuple[BarycenterSolution, TuningReport]:
    """Cross-validate (lambda, bandwidth multiplier) then refit at the best."""
    prep = prepare(train, l_max, n_min)
    cfg = config if config is not None else SolverConfig()
    report = cross_validate(prep.train, validation, prep.subsets, grid or default_grid(), cfg)
    sol = fit_prepared(prep, report.best.lambda_scale, report.best.h_y_multiplier, cfg)
    return sol, report
