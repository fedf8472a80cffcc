"""Seeded generators for the synthetic experiments, each with its closed-form
truth.

Every generator consumes one `numpy` Generator stream in a documented order
(covariates first, then noise, then any auxiliary draws), so identical
arguments and seed reproduce bit-identical datasets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dataset import CONTINUOUS, Covariate, CovariateSchema, HeterogeneousDataset

HIDDEN_MODE_WEIGHTS = (1.0 / 3.0, 2.0 / 3.0)
HIDDEN_MODE_VALUES = (-1.0, 1.0)
HIDDEN_NOISE_STD = 0.25


@dataclass
class SyntheticTruth:
    """Closed-form conditional mean/std of the generating law."""

    f: Callable[[dict], float]
    g: Callable[[dict], float]
    z_support: dict[str, tuple[float, float]]
    noise_kind: str = "gaussian"
    descriptor: dict = field(default_factory=dict)


@dataclass
class MissingTestData:
    """One synthetic missing-data instance: hidden training rows, a fully
    observed validation set, and the oracle-complete training rows."""

    train: HeterogeneousDataset
    validation: HeterogeneousDataset
    complete: HeterogeneousDataset
    truth: SyntheticTruth


def _schema_z1z2() -> CovariateSchema:
    return CovariateSchema(
        covariates=(Covariate("z1", CONTINUOUS), Covariate("z2", CONTINUOUS)),
        response_dim=1,
    )


def _missing_truth(test_id: int) -> SyntheticTruth:
    if test_id == 1:
        f = lambda z: 4.0 * z["z1"] * (1.0 - z["z1"]) + 0.5 * z["z2"]  # noqa: E731
        g = lambda z: 0.2  # noqa: E731
    elif test_id == 2:
        f = lambda z: 4.0 * z["z1"] * (1.0 - z["z1"]) + 0.5 * z["z1"] * z["z2"]  # noqa: E731
        g = lambda z: 0.2  # noqa: E731
    elif test_id == 3:
        f = lambda z: 4.0 * z["z1"] * (1.0 - z["z1"]) + 0.5 * z["z2"]  # noqa: E731
        g = lambda z: 0.25 * (math.sqrt(z["z1"]) + math.sqrt(z["z2"]))  # noqa: E731
    else:
        raise ValueError(f"test_id must be 1, 2 or 3, got {test_id}")
    return SyntheticTruth(
        f=f,
        g=g,
        z_support={"z1": (0.0, 1.0), "z2": (0.0, 1.0)},
        noise_kind="gaussian",
        descriptor={"experiment": f"missing{test_id}"},
    )


def gen_missing_test(
    test_id: int,
    n1: int = 80,
    n2: int = 80,
    n3: int = 20,
    n_val: int = 20,
    seed: int = 0,
) -> MissingTestData:
    """Missing-at-random benchmark data: rows ordered as the n1 rows hiding
    z2, the n2 rows hiding z1, the n3 complete rows, then n_val fully
    observed validation rows.

    Draw order: all z pairs, then all noise values.
    """
    if min(n1, n2, n3, n_val) < 1:
        raise ValueError("all group sizes must be >= 1")
    truth = _missing_truth(test_id)
    schema = _schema_z1z2()
    rng = np.random.default_rng(seed)
    n_total = n1 + n2 + n3 + n_val
    z = rng.uniform(size=(n_total, 2))
    eps = rng.standard_normal(n_total)
    records = [{"z1": float(z[i, 0]), "z2": float(z[i, 1])} for i in range(n_total)]
    x = np.array([truth.f(r) + truth.g(r) * eps[i] for i, r in enumerate(records)])

    hidden: list[dict] = []
    for i in range(n1 + n2 + n3):
        rec = dict(records[i])
        if i < n1:
            del rec["z2"]
        elif i < n1 + n2:
            del rec["z1"]
        hidden.append(rec)

    n_train = n1 + n2 + n3
    truth.descriptor.update(
        {"test_id": test_id, "n1": n1, "n2": n2, "n3": n3, "n_val": n_val, "seed": seed}
    )
    return MissingTestData(
        train=HeterogeneousDataset(schema=schema, x=x[:n_train], z=hidden),
        validation=HeterogeneousDataset(
            schema=schema, x=x[n_train:], z=[dict(r) for r in records[n_train:]]
        ),
        complete=HeterogeneousDataset(
            schema=schema, x=x[:n_train].copy(), z=[dict(r) for r in records[:n_train]]
        ),
        truth=truth,
    )


def _structured_truth(alpha: float) -> SyntheticTruth:
    f = lambda z: 4.0 * z["z1"] * (1.0 - z["z1"]) + alpha * (z["z2"] - 0.5)  # noqa: E731
    g = lambda z: 0.2  # noqa: E731
    return SyntheticTruth(
        f=f,
        g=g,
        z_support={"z1": (0.0, 1.0), "z2": (0.0, 1.0)},
        noise_kind="gaussian",
        descriptor={"experiment": "structured", "alpha": alpha},
    )


def gen_structured(
    alpha: float, n1: int = 40, n2: int = 100, seed: int = 0
) -> tuple[HeterogeneousDataset, SyntheticTruth]:
    """Two groups with different cofactors: the first n1 rows carry (z1, z2),
    the remaining n2 rows carry z1 only (z2 undefined, not hidden). The truth
    describes the first group's law.

    Draw order: z1 for all rows, z2 for the first group, then all noise.
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if min(n1, n2) < 1:
        raise ValueError("group sizes must be >= 1")
    truth = _structured_truth(alpha)
    truth.descriptor.update({"n1": n1, "n2": n2, "seed": seed})
    rng = np.random.default_rng(seed)
    n = n1 + n2
    z1 = rng.uniform(size=n)
    z2 = rng.uniform(size=n1)
    eps = rng.standard_normal(n)
    records: list[dict] = []
    x = np.empty(n)
    for i in range(n):
        if i < n1:
            rec = {"z1": float(z1[i]), "z2": float(z2[i])}
            x[i] = truth.f(rec) + 0.2 * eps[i]
        else:
            rec = {"z1": float(z1[i])}
            x[i] = 4.0 * z1[i] * (1.0 - z1[i]) + 0.2 * eps[i]
        records.append(rec)
    return HeterogeneousDataset(schema=_schema_z1z2(), x=x, z=records), truth


EXTRAPOLATION_TARGETS = ({"z1": 0.85, "z2": 0.25}, {"z1": 0.25, "z2": 0.25})


def gen_extrapolation(
    n1: int = 40, n2: int = 100, seed: int = 0
) -> tuple[HeterogeneousDataset, SyntheticTruth, tuple[dict, dict]]:
    """Structured setup at alpha=1 with the first group's z1 restricted to
    [0, 0.5]; the second group spans the full range and supplies the
    information needed to extrapolate. Returns the two evaluation targets.

    Draw order: z1 for all rows, z2 for the first group, then all noise.
    """
    if min(n1, n2) < 1:
        raise ValueError("group sizes must be >= 1")
    truth = _structured_truth(1.0)
    truth.descriptor.update(
        {"experiment": "extrapolation", "n1": n1, "n2": n2, "seed": seed}
    )
    truth.z_support = {"z1": (0.0, 0.5), "z2": (0.0, 1.0)}
    rng = np.random.default_rng(seed)
    n = n1 + n2
    z1 = rng.uniform(size=n)
    z1[:n1] *= 0.5
    z2 = rng.uniform(size=n1)
    eps = rng.standard_normal(n)
    records: list[dict] = []
    x = np.empty(n)
    for i in range(n):
        if i < n1:
            rec = {"z1": float(z1[i]), "z2": float(z2[i])}
            x[i] = truth.f(rec) + 0.2 * eps[i]
        else:
            rec = {"z1": float(z1[i])}
            x[i] = 4.0 * z1[i] * (1.0 - z1[i]) + 0.2 * eps[i]
        records.append(rec)
    data = HeterogeneousDataset(schema=_schema_z1z2(), x=x, z=records)
    return data, truth, EXTRAPOLATION_TARGETS


def gen_hidden_factor(
    n1: int = 40, n2: int = 50, seed: int = 0
) -> tuple[HeterogeneousDataset, SyntheticTruth, np.ndarray]:
    """Structured setup whose noise carries a latent two-mode factor; the
    returned labels (+-1, for evaluation only) never enter the dataset.

    Draw order: z1 for all rows, z2 for the first group, hidden labels, then
    Gaussian noise.
    """
    if min(n1, n2) < 1:
        raise ValueError("group sizes must be >= 1")
    rng = np.random.default_rng(seed)
    n = n1 + n2
    z1 = rng.uniform(size=n)
    z2 = rng.uniform(size=n1)
    labels = rng.choice(HIDDEN_MODE_VALUES, size=n, p=HIDDEN_MODE_WEIGHTS)
    eps = labels + HIDDEN_NOISE_STD * rng.standard_normal(n)

    mean_eps = float(np.dot(HIDDEN_MODE_WEIGHTS, HIDDEN_MODE_VALUES))
    var_eps = (
        float(np.dot(HIDDEN_MODE_WEIGHTS, np.square(HIDDEN_MODE_VALUES)))
        - mean_eps**2
        + HIDDEN_NOISE_STD**2
    )
    f = lambda z: 4.0 * z["z1"] * (1.0 - z["z1"]) + (z["z2"] - 0.5) + 0.2 * mean_eps  # noqa: E731
    g = lambda z: 0.2 * math.sqrt(var_eps)  # noqa: E731
    truth = SyntheticTruth(
        f=f,
        g=g,
        z_support={"z1": (0.0, 1.0), "z2": (0.0, 1.0)},
        noise_kind="bimodal",
        descriptor={
            "experiment": "hidden",
            "n1": n1,
            "n2": n2,
            "seed": seed,
            "mode_values": list(HIDDEN_MODE_VALUES),
            "mode_weights": list(HIDDEN_MODE_WEIGHTS),
            "noise_std": HIDDEN_NOISE_STD,
        },
    )

    records: list[dict] = []
    x = np.empty(n)
    for i in range(n):
        if i < n1:
            rec = {"z1": float(z1[i]), "z2": float(z2[i])}
            x[i] = 4.0 * z1[i] * (1.0 - z1[i]) + (z2[i] - 0.5) + 0.2 * eps[i]
        else:
            rec = {"z1": float(z1[i])}
            x[i] = 4.0 * z1[i] * (1.0 - z1[i]) + 0.2 * eps[i]
        records.append(rec)
    data = HeterogeneousDataset(schema=_schema_z1z2(), x=x, z=records)
    return data, truth, labels
