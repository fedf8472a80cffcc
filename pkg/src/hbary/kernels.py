"""Kernels, bandwidth selection, and the kernel mutual-information estimator.

All kernels are normalized densities. The MI estimator works on log-kernel
matrices through log-sum-exp, so rescaling a kernel by a positive constant
cancels exactly between its log terms.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

LOG_2PI = math.log(2.0 * math.pi)

CONTINUOUS = "continuous"
CATEGORICAL = "categorical"


def as_bandwidth(h) -> np.ndarray:
    """Validate a per-dimension bandwidth vector (positive, finite)."""
    arr = np.atleast_1d(np.asarray(h, dtype=float))
    if arr.ndim != 1:
        raise ValueError("bandwidth must be one value per dimension")
    if arr.size == 0 or not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise ValueError(f"bandwidth entries must be positive and finite, got {arr}")
    return arr


def gaussian_kernel(u, v, h) -> float:
    """Product of normalized 1-D Gaussians, one factor per dimension."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    hv = as_bandwidth(h)
    if u.shape != v.shape or u.shape != hv.shape:
        raise ValueError(f"dimension mismatch: u{u.shape}, v{v.shape}, h{hv.shape}")
    quad = float(np.sum((u - v) ** 2 / (2.0 * hv**2)))
    log_norm = float(np.sum(0.5 * LOG_2PI + np.log(hv)))
    return math.exp(-quad - log_norm)


def categorical_kernel(a, b) -> float:
    """Indicator kernel on category labels."""
    return 1.0 if a == b else 0.0


def silverman_bandwidth(values, d: int, n: int | None = None) -> float:
    """Rule-of-thumb bandwidth sigma * (4/(d+2))^(1/(d+4)) * n^(-1/(d+4)).

    ``d`` is the dimension of the kernel the bandwidth feeds; ``n`` defaults
    to ``len(values)``. Constant samples fall back to a small floor so that
    downstream kernel matrices stay well defined.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    if n is None:
        n = arr.size
    if n < 2 or arr.size < 2:
        raise ValueError(f"need at least 2 samples for a bandwidth, got n={n}")
    if d < 1:
        raise ValueError(f"kernel dimension must be >= 1, got {d}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("bandwidth input contains non-finite values")
    sigma = float(arr.std(ddof=1))
    if sigma <= 0.0:
        floor = 1e-3 * (1.0 + abs(float(arr.mean())))
        warnings.warn(
            f"constant sample, falling back to bandwidth floor {floor:.3e}",
            RuntimeWarning,
            stacklevel=2,
        )
        return floor
    return sigma * (4.0 / (d + 2.0)) ** (1.0 / (d + 4.0)) * float(n) ** (-1.0 / (d + 4.0))


def log_gaussian_matrix(a: np.ndarray, b: np.ndarray, h) -> np.ndarray:
    """Log of the normalized product-Gaussian kernel between row sets a and b."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    hv = as_bandwidth(h)
    if a.shape[1] != b.shape[1] or a.shape[1] != hv.size:
        raise ValueError(
            f"dimension mismatch: a has {a.shape[1]} columns, b has {b.shape[1]}, h has {hv.size}"
        )
    out = np.zeros((a.shape[0], b.shape[0]))
    for dim in range(hv.size):
        diff = np.subtract.outer(a[:, dim], b[:, dim])
        out -= diff**2 / (2.0 * hv[dim] ** 2)
    out -= np.sum(0.5 * LOG_2PI + np.log(hv))
    return out


def log_categorical_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Log indicator kernel (0 on full match, -inf otherwise), column-wise product."""
    a = np.atleast_2d(np.asarray(a, dtype=object))
    b = np.atleast_2d(np.asarray(b, dtype=object))
    if a.shape[1] != b.shape[1]:
        raise ValueError("categorical dimension mismatch")
    match = np.ones((a.shape[0], b.shape[0]), dtype=bool)
    for col in range(a.shape[1]):
        match &= np.equal.outer(a[:, col], b[:, col])
    return np.where(match, 0.0, -np.inf)


def logsumexp_rows(m: np.ndarray) -> np.ndarray:
    """Row-wise log-sum-exp; -inf entries are allowed, all--inf rows yield -inf."""
    peak = np.max(m, axis=1)
    safe = np.where(np.isfinite(peak), peak, 0.0)
    with np.errstate(invalid="ignore"):
        out = safe + np.log(np.sum(np.exp(m - safe[:, None]), axis=1))
    return np.where(np.isfinite(peak), out, -np.inf)


def mi_from_log_matrices(log_ky: np.ndarray, log_kz: np.ndarray) -> float:
    """Kernel MI from precomputed log-kernel matrices (self terms included).

    Each of the three terms is log((1/n) sum_j K.. ) evaluated through
    log-sum-exp; the 1/n factors combine into the trailing +log(n).
    """
    n = log_ky.shape[0]
    if log_ky.shape != (n, n) or log_kz.shape != (n, n):
        raise ValueError("log-kernel matrices must be square and equal-sized")
    lse_joint = logsumexp_rows(log_ky + log_kz)
    lse_y = logsumexp_rows(log_ky)
    lse_z = logsumexp_rows(log_kz)
    terms = lse_joint - lse_y - lse_z
    if not np.all(np.isfinite(terms)):
        raise RuntimeError(
            "kernel sum vanished inside the MI estimator; the self term should "
            "make every sum positive, so this indicates a bug upstream"
        )
    return float(np.mean(terms) + math.log(n))


def _split_columns(z: np.ndarray, kinds) -> tuple[np.ndarray, np.ndarray]:
    cont_cols = [j for j, k in enumerate(kinds) if k == CONTINUOUS]
    cat_cols = [j for j, k in enumerate(kinds) if k == CATEGORICAL]
    if len(cont_cols) + len(cat_cols) != len(kinds):
        bad = sorted(set(kinds) - {CONTINUOUS, CATEGORICAL})
        raise ValueError(f"unknown covariate kinds {bad}")
    cont = np.asarray(z[:, cont_cols], dtype=float) if cont_cols else np.empty((z.shape[0], 0))
    cat = z[:, cat_cols] if cat_cols else np.empty((z.shape[0], 0), dtype=object)
    return cont, cat


def log_z_matrix(z: np.ndarray, kinds, h_z) -> np.ndarray:
    """Log mixed-record kernel matrix: Gaussian over continuous columns times
    indicator over categorical columns."""
    z = np.atleast_2d(np.asarray(z, dtype=object))
    cont, cat = _split_columns(z, kinds)
    out = np.zeros((z.shape[0], z.shape[0]))
    if cont.shape[1]:
        out += log_gaussian_matrix(cont, cont, h_z)
    if cat.shape[1]:
        out += log_categorical_matrix(cat, cat)
    return out


def mi_estimate(y, z, h_y, h_z=None, kinds=None) -> float:
    """Kernel mutual-information estimate between samples y and records z.

    y: (n, dy) responses. z: (n, dz) covariate values; columns flagged
    categorical in ``kinds`` use the indicator kernel, the rest the Gaussian
    kernel with bandwidths ``h_z`` (one per continuous column).
    """
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    z = np.asarray(z, dtype=object)
    if z.ndim == 1:
        z = z[:, None]
    n = y.shape[0]
    if z.shape[0] != n:
        raise ValueError(f"sample count mismatch: {n} responses vs {z.shape[0]} records")
    if n < 2:
        raise ValueError("MI estimation needs at least 2 samples")
    if kinds is None:
        kinds = [CONTINUOUS] * z.shape[1]
    if len(kinds) != z.shape[1]:
        raise ValueError("one kind per z column required")
    if any(k == CONTINUOUS for k in kinds) and h_z is None:
        raise ValueError("h_z required when z has continuous columns")
    log_ky = log_gaussian_matrix(y, y, h_y)
    log_kz = log_z_matrix(z, kinds, h_z)
    return mi_from_log_matrices(log_ky, log_kz)
