"""Shared independent oracles for the test suite.

Everything here is deliberately written as plain loops over the defining
formulas, independent of the package's vectorized implementations.
"""

import math

import numpy as np

from hbary.solver import standardization


def gauss(u, v, h):
    return math.exp(-((u - v) ** 2) / (2 * h * h)) / (math.sqrt(2 * math.pi) * h)


def record_kernel(d, subset, i, j):
    val = 1.0
    for name in subset.covariate_ids:
        a, b = d.z[i][name], d.z[j][name]
        if d.schema.kind_of(name) == "continuous":
            val *= gauss(a, b, subset.z_bandwidths[name])
        else:
            val *= 1.0 if a == b else 0.0
    return val


def frozen_objective_bruteforce(y_eval, y_centers, d, subsets, h_y, with_zterm=True):
    """Centers-frozen objective; only the first kernel argument moves."""
    mean, scale = standardization(d.x)
    x_std = (d.x - mean) / scale
    n = x_std.shape[0]
    obj = sum(0.5 * float(np.sum((y_eval[i] - x_std[i]) ** 2)) for i in range(n)) / n
    for s in subsets:
        if not s.penalty_weight:
            continue
        nk = s.cardinality
        acc = 0.0
        for i in s.support:
            ky = [
                np.prod(
                    [gauss(y_eval[i][dd], y_centers[j][dd], h_y[dd]) for dd in range(y_eval.shape[1])]
                )
                for j in s.support
            ]
            kz = [record_kernel(d, s, i, j) for j in s.support]
            s1 = sum(a * b for a, b in zip(ky, kz))
            acc += math.log(s1 / nk) - math.log(sum(ky) / nk)
            if with_zterm:
                acc -= math.log(sum(kz) / nk)
        obj += s.penalty_weight * acc / nk
    return obj


def center_derivative_term(samples, h, target_index):
    """The dropped center-derivative of the marginal KDE log-likelihood:
    (1/n) * sum_{i != l} d/dy_l log((1/n) sum_j K(y_i, y_j)), whose mean
    vanishes as the sample grows."""
    y = np.asarray(samples, dtype=float).reshape(-1)
    n = y.size
    l = target_index
    total = 0.0
    for i in range(n):
        if i == l:
            continue
        dens = sum(gauss(y[i], y[j], h) for j in range(n)) / n
        dker = gauss(y[i], y[l], h) * (y[i] - y[l]) / (h * h) / n
        total += dker / dens
    return total / n
