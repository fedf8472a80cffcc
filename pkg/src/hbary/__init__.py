"""Hierarchical optimal-transport barycenters for heterogeneous covariates.

The package fits a transport map that removes from the responses all the
variability explainable by covariate subsets (each observed on its own part
of the data), and inverts that map in closed form to simulate conditional
densities at arbitrary, possibly partial, covariate targets.
"""

__version__ = "0.1.0"

from .dataset import (
    Covariate,
    CovariateSchema,
    CovariateSubset,
    HeterogeneousDataset,
    enumerate_subsets,
    extend_covariates,
    load_dataset,
    split,
)
from .kernels import categorical_kernel, gaussian_kernel, mi_estimate, silverman_bandwidth
from .solver import (
    BarycenterSolution,
    GradientReport,
    NonConvergenceError,
    SolverConfig,
    descent_step,
    gradient_and_hessian,
    objective,
    solve,
)
from .transport import (
    ConditionalSampleSet,
    UnsupportedTargetError,
    invert_map,
    kde_density,
    simulate_conditional,
)
from .tuning import TuningGrid, TuningReport, cross_validate, default_grid, lambda_weights

__all__ = [
    "BarycenterSolution",
    "ConditionalSampleSet",
    "Covariate",
    "CovariateSchema",
    "CovariateSubset",
    "GradientReport",
    "HeterogeneousDataset",
    "NonConvergenceError",
    "SolverConfig",
    "TuningGrid",
    "TuningReport",
    "UnsupportedTargetError",
    "categorical_kernel",
    "cross_validate",
    "default_grid",
    "descent_step",
    "enumerate_subsets",
    "extend_covariates",
    "gaussian_kernel",
    "gradient_and_hessian",
    "invert_map",
    "kde_density",
    "lambda_weights",
    "load_dataset",
    "mi_estimate",
    "objective",
    "silverman_bandwidth",
    "simulate_conditional",
    "solve",
    "split",
]
