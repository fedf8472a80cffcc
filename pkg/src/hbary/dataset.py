"""Heterogeneous datasets: ingestion, covariate extension, subset enumeration.

A dataset holds fully observed responses ``x`` and per-row covariate records
in which any covariate may be absent. Covariate extension appends the
categorical factor ``w`` encoding each row's missingness pattern, so that the
availability of covariates is itself a covariate.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .kernels import CATEGORICAL, CONTINUOUS, silverman_bandwidth

MISSINGNESS_COVARIATE = "w"
EMPTY_PATTERN_LABEL = "(none)"


class DataError(ValueError):
    """Malformed or inconsistent input data."""


class ConfigurationError(ValueError):
    """A configuration that leaves nothing to solve."""


@dataclass(frozen=True)
class Covariate:
    name: str
    kind: str

    def __post_init__(self):
        if self.kind not in (CONTINUOUS, CATEGORICAL):
            raise ValueError(f"covariate kind must be continuous or categorical, got {self.kind!r}")
        if not self.name:
            raise ValueError("covariate name must be nonempty")


@dataclass(frozen=True)
class CovariateSchema:
    covariates: tuple[Covariate, ...]
    response_dim: int

    def __post_init__(self):
        names = [c.name for c in self.covariates]
        if len(set(names)) != len(names):
            raise ValueError(f"covariate names must be unique, got {names}")
        if self.response_dim < 1:
            raise ValueError("response_dim must be >= 1")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.covariates)

    def kind_of(self, name: str) -> str:
        for c in self.covariates:
            if c.name == name:
                return c.kind
        raise KeyError(name)

    def to_json_dict(self) -> dict:
        return {
            "response_dim": self.response_dim,
            "covariates": [{"name": c.name, "kind": c.kind} for c in self.covariates],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "CovariateSchema":
        try:
            covs = tuple(Covariate(c["name"], c["kind"]) for c in doc["covariates"])
            return cls(covariates=covs, response_dim=int(doc["response_dim"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"invalid schema document: {exc}") from exc


@dataclass
class HeterogeneousDataset:
    """Responses plus partially observed covariate records.

    ``z[i]`` maps covariate name to value; absent covariates are simply not
    present as keys. Treat instances as immutable values.
    """

    schema: CovariateSchema
    x: np.ndarray
    z: list[dict]
    extended: bool = False

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        if self.x.ndim == 1:
            self.x = self.x[:, None]
        if self.x.shape[1] != self.schema.response_dim:
            raise DataError(
                f"x has {self.x.shape[1]} columns, schema says {self.schema.response_dim}"
            )
        if self.x.shape[0] != len(self.z):
            raise DataError("row count mismatch between x and z")
        if not np.all(np.isfinite(self.x)):
            raise DataError("x must be fully observed and finite")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    def original_covariates(self) -> tuple[Covariate, ...]:
        """Covariates excluding the appended missingness factor."""
        if not self.extended:
            return self.schema.covariates
        return tuple(c for c in self.schema.covariates if c.name != MISSINGNESS_COVARIATE)

    def pattern_of(self, i: int) -> frozenset:
        names = {c.name for c in self.original_covariates()}
        return frozenset(k for k in self.z[i] if k in names)


@dataclass
class CovariateSubset:
    """One covariate subset Z_k with its support rows and kernel parameters."""

    covariate_ids: tuple[str, ...]
    support: np.ndarray
    z_bandwidths: dict[str, float] = field(default_factory=dict)
    penalty_weight: float | None = None

    def __post_init__(self):
        if not self.covariate_ids:
            raise ValueError("covariate subset must name at least one covariate")
        self.covariate_ids = tuple(self.covariate_ids)
        self.support = np.asarray(self.support, dtype=int)
        if self.support.size < 1:
            raise ValueError("subset support must be nonempty")
        for name, h in self.z_bandwidths.items():
            if not (h > 0 and np.isfinite(h)):
                raise ValueError(f"bandwidth for {name} must be positive, got {h}")
        if self.penalty_weight is not None and self.penalty_weight < 0:
            raise ValueError("penalty weight must be nonnegative")

    @property
    def cardinality(self) -> int:
        return int(self.support.size)

    def label(self) -> str:
        return "(" + ",".join(self.covariate_ids) + ")"


def pattern_label(present) -> str:
    """Stable category label for a missingness pattern (sorted name join)."""
    names = sorted(present)
    return "|".join(names) if names else EMPTY_PATTERN_LABEL


def _parse_header(header: list[str], schema: CovariateSchema) -> None:
    expected = [f"x{j + 1}" for j in range(schema.response_dim)] + list(schema.names)
    if [h.strip() for h in header] != expected:
        raise DataError(f"header {header} does not match schema columns {expected}")


def load_dataset(source, schema: CovariateSchema) -> HeterogeneousDataset:
    """Read the CSV interchange format: columns x1..xd then covariates,
    absent covariate values as empty cells."""
    if hasattr(source, "read"):
        stream = source
        close = False
    else:
        stream = open(source, "r", encoding="utf-8", newline="")
        close = True
    try:
        reader = csv.reader(stream)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError("no data rows") from None
        _parse_header(header, schema)
        d = schema.response_dim
        ncols = d + len(schema.names)
        xs: list[list[float]] = []
        zs: list[dict] = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != ncols:
                raise DataError(f"row {lineno}: expected {ncols} fields, got {len(rec)}")
            row_x = []
            for j in range(d):
                cell = rec[j].strip()
                if not cell:
                    raise DataError(f"row {lineno}: missing response value x{j + 1}")
                try:
                    val = float(cell)
                except ValueError:
                    raise DataError(f"row {lineno}: non-numeric response x{j + 1}={cell!r}") from None
                if not np.isfinite(val):
                    raise DataError(f"row {lineno}: non-finite response x{j + 1}")
                row_x.append(val)
            record: dict = {}
            for cov, cell in zip(schema.covariates, rec[d:]):
                cell = cell.strip()
                if not cell:
                    continue
                if cov.kind == CONTINUOUS:
                    try:
                        record[cov.name] = float(cell)
                    except ValueError:
                        raise DataError(
                            f"row {lineno}: non-numeric value {cell!r} for covariate {cov.name}"
                        ) from None
                    if not np.isfinite(record[cov.name]):
                        raise DataError(f"row {lineno}: non-finite value for covariate {cov.name}")
                else:
                    record[cov.name] = cell
            xs.append(row_x)
            zs.append(record)
        if not xs:
            raise DataError("no data rows")
        return HeterogeneousDataset(schema=schema, x=np.asarray(xs), z=zs)
    finally:
        if close:
            stream.close()


def format_float(v: float) -> str:
    """Full-precision decimal formatting that round-trips through float()."""
    return repr(float(v))


def write_dataset(d: HeterogeneousDataset, target) -> None:
    """Write the CSV interchange format (inverse of load_dataset)."""
    if hasattr(target, "write"):
        stream, close = target, False
    else:
        stream = open(target, "w", encoding="utf-8", newline="")
        close = True
    try:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow([f"x{j + 1}" for j in range(d.schema.response_dim)] + list(d.schema.names))
        for i in range(d.n):
            row = [format_float(v) for v in d.x[i]]
            for cov in d.schema.covariates:
                if cov.name in d.z[i]:
                    val = d.z[i][cov.name]
                    row.append(format_float(val) if cov.kind == CONTINUOUS else str(val))
                else:
                    row.append("")
            writer.writerow(row)
    finally:
        if close:
            stream.close()


def dataset_to_csv(d: HeterogeneousDataset) -> str:
    buf = io.StringIO()
    write_dataset(d, buf)
    return buf.getvalue()


def extend_covariates(d: HeterogeneousDataset) -> HeterogeneousDataset:
    """Append the categorical missingness factor ``w``; idempotent."""
    if d.extended:
        return d
    if MISSINGNESS_COVARIATE in d.schema.names:
        raise DataError(
            f"covariate name {MISSINGNESS_COVARIATE!r} is reserved for the missingness factor"
        )
    schema = CovariateSchema(
        covariates=d.schema.covariates + (Covariate(MISSINGNESS_COVARIATE, CATEGORICAL),),
        response_dim=d.schema.response_dim,
    )
    new_z = []
    for rec in d.z:
        out = dict(rec)
        out[MISSINGNESS_COVARIATE] = pattern_label(rec.keys())
        new_z.append(out)
    return HeterogeneousDataset(schema=schema, x=d.x.copy(), z=new_z, extended=True)


def support_of(d: HeterogeneousDataset, covariate_ids) -> np.ndarray:
    ids = tuple(covariate_ids)
    return np.array([i for i in range(d.n) if all(c in d.z[i] for c in ids)], dtype=int)


def fully_observed_indices(d: HeterogeneousDataset) -> np.ndarray:
    """Rows observing every original covariate (the missingness factor aside)."""
    names = [c.name for c in d.original_covariates()]
    return np.array([i for i in range(d.n) if all(c in d.z[i] for c in names)], dtype=int)


def restrict_rows(d: HeterogeneousDataset, indices) -> HeterogeneousDataset:
    idx = np.asarray(indices, dtype=int)
    return HeterogeneousDataset(
        schema=d.schema,
        x=d.x[idx].copy(),
        z=[dict(d.z[i]) for i in idx],
        extended=d.extended,
    )


def _subset_bandwidths(d: HeterogeneousDataset, ids: tuple[str, ...], support: np.ndarray) -> dict:
    cont_names = [name for name in ids if d.schema.kind_of(name) == CONTINUOUS]
    bandwidths = {}
    for name in cont_names:
        values = np.array([d.z[i][name] for i in support], dtype=float)
        bandwidths[name] = silverman_bandwidth(values, d=len(cont_names), n=len(support))
    return bandwidths


def enumerate_subsets(
    d: HeterogeneousDataset, l_max: int, n_min: int
) -> list[CovariateSubset]:
    """Covariate subsets to penalize: maximal common subsets over the observed
    missingness patterns plus all singletons (including the missingness
    factor), filtered to at most ``l_max`` covariates and at least ``n_min``
    support rows.
    """
    if not d.extended:
        raise ConfigurationError("apply extend_covariates before enumerating subsets")
    if l_max < 1 or n_min < 1:
        raise ConfigurationError("l_max and n_min must be >= 1")

    patterns = {d.pattern_of(i) for i in range(d.n)}
    candidates: set[frozenset] = set()
    for p in patterns:
        if p:
            candidates.add(p)
    pat_list = sorted(patterns, key=lambda s: (len(s), sorted(s)))
    for a in range(len(pat_list)):
        for b in range(a + 1, len(pat_list)):
            inter = pat_list[a] & pat_list[b]
            if inter:
                candidates.add(inter)
    for cov in d.original_covariates():
        candidates.add(frozenset({cov.name}))
    candidates.add(frozenset({MISSINGNESS_COVARIATE}))

    subsets = []
    for cand in sorted(candidates, key=lambda s: (len(s), sorted(s))):
        if len(cand) > l_max:
            continue
        ids = tuple(sorted(cand))
        support = support_of(d, ids)
        if support.size < n_min:
            continue
        subsets.append(
            CovariateSubset(
                covariate_ids=ids,
                support=support,
                z_bandwidths=_subset_bandwidths(d, ids, support),
            )
        )
    if not subsets:
        raise ConfigurationError(
            f"no covariate subset survives l_max={l_max}, n_min={n_min}"
        )
    return subsets


def subset_z_arrays(
    d: HeterogeneousDataset, subset: CovariateSubset
) -> tuple[np.ndarray, np.ndarray, list[str], list[str]]:
    """Per-subset covariate values over the support, split by kind.

    Returns (continuous (N_k, c) floats, categorical (N_k, m) objects,
    continuous names, categorical names); names follow covariate_ids order.
    """
    cont_names = [n for n in subset.covariate_ids if d.schema.kind_of(n) == CONTINUOUS]
    cat_names = [n for n in subset.covariate_ids if d.schema.kind_of(n) == CATEGORICAL]
    nk = subset.cardinality
    cont = np.empty((nk, len(cont_names)))
    cat = np.empty((nk, len(cat_names)), dtype=object)
    for r, i in enumerate(subset.support):
        rec = d.z[i]
        for c, name in enumerate(cont_names):
            cont[r, c] = rec[name]
        for c, name in enumerate(cat_names):
            cat[r, c] = rec[name]
    return cont, cat, cont_names, cat_names


def subset_bandwidth_vector(subset: CovariateSubset, cont_names: list[str]) -> np.ndarray:
    return np.array([subset.z_bandwidths[name] for name in cont_names], dtype=float)


def split(
    d: HeterogeneousDataset, validation_count: int, seed: int
) -> tuple[HeterogeneousDataset, HeterogeneousDataset]:
    """Hold out ``validation_count`` fully observed rows, uniformly at random."""
    if not 0 < validation_count < d.n:
        raise ValueError(f"validation_count must be in (0, {d.n}), got {validation_count}")
    observed = fully_observed_indices(d)
    if observed.size < validation_count:
        raise ValueError(
            f"only {observed.size} fully observed rows, cannot hold out {validation_count}"
        )
    rng = np.random.default_rng(seed)
    val_idx = np.sort(rng.choice(observed, size=validation_count, replace=False))
    mask = np.ones(d.n, dtype=bool)
    mask[val_idx] = False
    train_idx = np.flatnonzero(mask)
    return restrict_rows(d, train_idx), restrict_rows(d, val_idx)


def schema_to_json(schema: CovariateSchema) -> str:
    return json.dumps(schema.to_json_dict(), indent=2)


def schema_from_json(text: str) -> CovariateSchema:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid schema JSON: {exc}") from exc
    return CovariateSchema.from_json_dict(doc)


def load_schema(path: str | os.PathLike) -> CovariateSchema:
    with open(path, "r", encoding="utf-8") as fh:
        return schema_from_json(fh.read())
