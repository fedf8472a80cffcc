"""Penalty-weight profiles and cross-validated hyperparameter selection.

Each subset's penalty weight is lambda * r_k with r_k = |I_k| * MI(X, Z_k)
estimated once on the standardized, untransported responses. The single scale
lambda and the y-kernel bandwidth multiplier are selected by maximizing the
held-out log-likelihood of simulated conditionals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .dataset import (
    HeterogeneousDataset,
    fully_observed_indices,
    subset_bandwidth_vector,
    subset_z_arrays,
)
from .kernels import (
    log_categorical_matrix,
    log_gaussian_matrix,
    mi_from_log_matrices,
    silverman_bandwidth,
)
from .solver import NonConvergenceError, SolverConfig, solve, standardization
from .transport import log_kde_density, simulate_conditional_many


@dataclass
class TuningGrid:
    lambda_values: tuple[float, ...]
    h_y_multipliers: tuple[float, ...]

    def __post_init__(self):
        self.lambda_values = tuple(float(v) for v in self.lambda_values)
        self.h_y_multipliers = tuple(float(v) for v in self.h_y_multipliers)
        if not self.lambda_values or not self.h_y_multipliers:
            raise ValueError("tuning grid must be nonempty")
        if any(v < 0 for v in self.lambda_values) or any(m <= 0 for m in self.h_y_multipliers):
            raise ValueError("lambda values must be >= 0 and multipliers > 0")
        if list(self.lambda_values) != sorted(self.lambda_values) or list(
            self.h_y_multipliers
        ) != sorted(self.h_y_multipliers):
            raise ValueError("grid axes must be sorted ascending")


def default_grid() -> TuningGrid:
    """Seven log-spaced lambda values around 1 and bandwidth multipliers
    spanning under- and over-smoothing of the Silverman rule."""
    return TuningGrid(
        lambda_values=tuple(np.logspace(-2.0, 1.0, 7)),
        h_y_multipliers=(0.5, 1.0, 2.0),
    )


@dataclass
class TuningEntry:
    lambda_scale: float
    h_y_multiplier: float
    score: float


@dataclass
class TuningReport:
    entries: list[TuningEntry]
    best: TuningEntry

    def __post_init__(self):
        finite = [e.score for e in self.entries if math.isfinite(e.score)]
        if finite and self.best.score < max(finite):
            raise ValueError("best entry does not attain the table maximum")


def base_h_y(d: HeterogeneousDataset) -> np.ndarray:
    """Per-dimension Silverman bandwidth of the standardized responses."""
    mean, scale = standardization(d.x)
    x_std = (d.x - mean) / scale
    dim = x_std.shape[1]
    return np.array(
        [silverman_bandwidth(x_std[:, j], d=dim, n=x_std.shape[0]) for j in range(dim)]
    )


def lambda_weights(d: HeterogeneousDataset, subsets, h_y0) -> np.ndarray:
    """Subset weights r_k = |I_k| * max(0, MI(X, Z_k)) on standardized x.

    Slightly negative kernel-MI estimates are clipped so the resulting
    penalty weights stay nonnegative.
    """
    mean, scale = standardization(d.x)
    x_std = (d.x - mean) / scale
    out = np.empty(len(subsets))
    for k, subset in enumerate(subsets):
        xk = x_std[subset.support]
        log_ky = log_gaussian_matrix(xk, xk, h_y0)
        cont, cat, cont_names, _ = subset_z_arrays(d, subset)
        log_kz = np.zeros((subset.cardinality, subset.cardinality))
        if cont_names:
            log_kz += log_gaussian_matrix(cont, cont, subset_bandwidth_vector(subset, cont_names))
        if cat.shape[1]:
            log_kz += log_categorical_matrix(cat, cat)
        mi = mi_from_log_matrices(log_ky, log_kz)
        out[k] = subset.cardinality * max(0.0, mi)
    return out


def mean_validation_loglik(sol, validation: HeterogeneousDataset) -> float:
    """Held-out score: mean log KDE of each validation response under the
    conditional sample set simulated at its covariates."""
    if fully_observed_indices(validation).size != validation.n:
        raise ValueError("validation rows must have all covariates present")
    original = {c.name for c in validation.original_covariates()}
    targets = [{k: v for k, v in rec.items() if k in original} for rec in validation.z]
    sample_sets = simulate_conditional_many(sol, targets)
    dim = validation.x.shape[1]
    total = 0.0
    for i, sample_set in enumerate(sample_sets):
        samples = sample_set.samples
        h = np.array(
            [silverman_bandwidth(samples[:, j], d=dim, n=samples.shape[0]) for j in range(dim)]
        )
        total += float(log_kde_density(samples, h, validation.x[i][None, :])[0])
    return total / validation.n


def cross_validate(
    train: HeterogeneousDataset,
    validation: HeterogeneousDataset,
    subsets,
    grid: TuningGrid,
    config: SolverConfig,
) -> TuningReport:
    """Score every (lambda, bandwidth multiplier) grid point by held-out
    log-likelihood; grid points that fail to converge score -inf.

    Ties break toward smaller lambda, then smaller multiplier, by scanning
    the grid in ascending order with a strict improvement test.
    """
    if fully_observed_indices(validation).size != validation.n:
        raise ValueError("validation rows must have all covariates present")
    h0 = base_h_y(train)
    r = lambda_weights(train, subsets, h0)
    entries: list[TuningEntry] = []
    best: TuningEntry | None = None
    for lam in grid.lambda_values:
        weighted = [replace(s, penalty_weight=lam * rk) for s, rk in zip(subsets, r)]
        for mult in grid.h_y_multipliers:
            cfg = replace(config, lambda_scale=lam, h_y=mult * h0)
            try:
                sol = solve(train, weighted, cfg)
                if not sol.diagnostics.converged:
                    score = -math.inf
                else:
                    score = mean_validation_loglik(sol, validation)
                    if not math.isfinite(score):
                        score = -math.inf
            except NonConvergenceError:
                score = -math.inf
            entry = TuningEntry(lambda_scale=lam, h_y_multiplier=mult, score=score)
            entries.append(entry)
            if best is None or entry.score > best.score:
                best = entry
    return TuningReport(entries=entries, best=best)
