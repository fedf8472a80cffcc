"""Closed-form inversion of the fitted map and conditional simulation.

The inverse map adds to each barycenter point the analytic derivative of the
penalty terms that apply to the target covariate record, using the same
frozen-center kernels the solver differentiated. At a stationary solution this
reproduces the training responses exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import (
    CONTINUOUS,
    MISSINGNESS_COVARIATE,
    HeterogeneousDataset,
    pattern_label,
    subset_bandwidth_vector,
    subset_z_arrays,
)
from .kernels import as_bandwidth, log_gaussian_matrix, logsumexp_rows
from .solver import BarycenterSolution


class UnsupportedTargetError(ValueError):
    """The target covariates match no penalized subset of the solution."""


@dataclass
class ConditionalSampleSet:
    """All barycenter points pulled back to a covariate target."""

    target: dict
    samples: np.ndarray
    source_solution: BarycenterSolution

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.shape[0] != self.source_solution.n:
            raise ValueError("one pulled-back sample per barycenter point required")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("pulled-back samples contain non-finite values")


def effective_target(sol: BarycenterSolution, z_target: dict) -> dict:
    """Validate a target record and synthesize its missingness-factor value.

    The factor is set to the pattern of the covariates actually supplied, so
    partial targets condition on the matching training pattern.
    """
    original = {c.name: c.kind for c in sol.schema.covariates}
    if sol.extended:
        original.pop(MISSINGNESS_COVARIATE, None)
    record = {}
    for key, value in z_target.items():
        if sol.extended and key == MISSINGNESS_COVARIATE:
            raise ValueError(
                f"{MISSINGNESS_COVARIATE!r} is derived from the supplied covariates "
                "and cannot be set directly"
            )
        if key not in original:
            raise ValueError(f"unknown covariate {key!r}; valid names: {sorted(original)}")
        if original[key] == CONTINUOUS:
            value = float(value)
            if not math.isfinite(value):
                raise ValueError(f"covariate {key!r} must be finite")
            record[key] = value
        else:
            record[key] = str(value)
    if sol.extended:
        record[MISSINGNESS_COVARIATE] = pattern_label(record.keys())
    return record


class _Pullback:
    """Reusable inverse-map evaluator for a fixed set of evaluation points.

    Caches, per subset, the support covariate arrays and the y-kernel between
    the evaluation points and the subset's barycenter positions; only the
    target-dependent z weights change between calls.
    """

    def __init__(self, sol: BarycenterSolution, y_eval: np.ndarray):
        self.sol = sol
        self.y_eval = np.atleast_2d(np.asarray(y_eval, dtype=float))
        self.h = as_bandwidth(sol.h_y)
        self.inv_h2 = 1.0 / self.h**2
        data = HeterogeneousDataset(schema=sol.schema, x=sol.x, z=sol.z, extended=sol.extended)
        self._z_parts = [subset_z_arrays(data, s) for s in sol.subsets]
        self._y_parts: dict[int, tuple] = {}

    def _y_part(self, k: int):
        part = self._y_parts.get(k)
        if part is None:
            subset = self.sol.subsets[k]
            yk = self.sol.y[subset.support]
            log_ky = log_gaussian_matrix(self.y_eval, yk, self.h)
            lse_y = logsumexp_rows(log_ky)
            w2 = np.exp(log_ky - lse_y[:, None])
            part = (yk, log_ky, w2)
            self._y_parts[k] = part
        return part

    def _target_log_kz(self, k: int, record: dict) -> np.ndarray:
        subset = self.sol.subsets[k]
        cont, cat, cont_names, cat_names = self._z_parts[k]
        out = np.zeros(subset.cardinality)
        if cont_names:
            target = np.array([[record[name] for name in cont_names]], dtype=float)
            out += log_gaussian_matrix(target, cont, subset_bandwidth_vector(subset, cont_names))[0]
        for c, name in enumerate(cat_names):
            out += np.where(cat[:, c] == record[name], 0.0, -np.inf)
        return out

    def applicable(self, record: dict) -> list[tuple[int, np.ndarray]]:
        """Indices of penalized subsets contained in the record, with their
        target log z-kernels. Zero-penalty subsets are no-ops and skipped; a
        penalized categorical subset with no matching training row means the
        pattern or category was never observed, surfaced as unsupported."""
        matched = []
        any_match = False
        for k, subset in enumerate(self.sol.subsets):
            if not set(subset.covariate_ids) <= record.keys():
                continue
            any_match = True
            if not subset.penalty_weight:
                continue
            log_kz = self._target_log_kz(k, record)
            if not np.any(np.isfinite(log_kz)):
                raise UnsupportedTargetError(
                    f"target covariates unsupported: no training row of subset "
                    f"{subset.label()} matches the categorical value(s) in {record}"
                )
            matched.append((k, log_kz))
        if not any_match:
            raise UnsupportedTargetError(
                f"target covariates unsupported: none of the fitted subsets is "
                f"contained in {sorted(record)}"
            )
        return matched

    def evaluate(self, record: dict) -> np.ndarray:
        matched = self.applicable(record)
        x = self.y_eval.copy()
        n = self.sol.n
        for k, log_kz in matched:
            subset = self.sol.subsets[k]
            yk, log_ky, w2 = self._y_part(k)
            joint = log_ky + log_kz[None, :]
            lse_joint = logsumexp_rows(joint)
            w1 = np.exp(joint - lse_joint[:, None])
            coef = subset.penalty_weight * n / subset.cardinality
            delta = w1 - w2
            for dim in range(x.shape[1]):
                x[:, dim] += coef * (delta @ yk[:, dim]) * self.inv_h2[dim]
        return x


def pullback_standardized(sol: BarycenterSolution, y_eval: np.ndarray, z_target: dict) -> np.ndarray:
    """Inverse map on the standardized scale at arbitrary evaluation points."""
    record = effective_target(sol, z_target)
    return _Pullback(sol, y_eval).evaluate(record)


def invert_map(sol: BarycenterSolution, y, z_target: dict) -> np.ndarray:
    """Map one standardized barycenter position back to response space."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.shape != (sol.y.shape[1],):
        raise ValueError(f"y must have shape ({sol.y.shape[1]},)")
    x_std = pullback_standardized(sol, y[None, :], z_target)[0]
    return sol.destandardize(x_std)


def simulate_conditional(sol: BarycenterSolution, z_target: dict) -> ConditionalSampleSet:
    """Pull every barycenter point back to the target covariates."""
    return simulate_conditional_many(sol, [z_target])[0]


def simulate_conditional_many(sol: BarycenterSolution, z_targets) -> list[ConditionalSampleSet]:
    """Simulate several targets against one solution, sharing kernel work."""
    pullback = _Pullback(sol, sol.y)
    out = []
    for z_target in z_targets:
        record = effective_target(sol, z_target)
        x_std = pullback.evaluate(record)
        out.append(
            ConditionalSampleSet(
                target=record, samples=sol.destandardize(x_std), source_solution=sol
            )
        )
    return out


def log_kde_density(samples: np.ndarray, h, x: np.ndarray) -> np.ndarray:
    """Log KDE of row set ``samples`` evaluated at rows ``x`` (stable)."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    x = np.atleast_2d(np.asarray(x, dtype=float))
    log_k = log_gaussian_matrix(x, samples, h)
    return logsumexp_rows(log_k) - math.log(samples.shape[0])


def kde_density(samples, h, x) -> float:
    """Gaussian kernel density estimate (a normalized density in x)."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[0] < 2:
        raise ValueError("KDE needs at least 2 samples")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return float(np.exp(log_kde_density(samples, h, x[None, :]))[0])
