import io

import numpy as np
import pytest

from hbary.dataset import (
    ConfigurationError,
    Covariate,
    CovariateSchema,
    DataError,
    dataset_to_csv,
    enumerate_subsets,
    extend_covariates,
    fully_observed_indices,
    load_dataset,
    pattern_label,
    schema_from_json,
    schema_to_json,
    split,
)
from hbary.synthgen import gen_missing_test

SCHEMA = CovariateSchema(
    covariates=(Covariate("z1", "continuous"), Covariate("z2", "continuous")),
    response_dim=1,
)


def _load(text, schema=SCHEMA):
    return load_dataset(io.StringIO(text), schema)


def test_load_basic_with_missing_cell():
    d = _load("x1,z1,z2\n1.0,0.5,\n2.0,0.1,0.2\n3.0,,0.9\n")
    assert d.n == 3
    assert d.z[0] == {"z1": 0.5}
    assert d.z[1] == {"z1": 0.1, "z2": 0.2}
    assert d.z[2] == {"z2": 0.9}
    assert np.allclose(d.x[:, 0], [1.0, 2.0, 3.0])


def test_load_empty_body_errors():
    with pytest.raises(DataError, match="no data rows"):
        _load("x1,z1,z2\n")


def test_load_non_numeric_response_names_row():
    with pytest.raises(DataError, match="row 3"):
        _load("x1,z1,z2\n1.0,0.5,0.5\noops,0.1,0.2\n")


def test_load_missing_response_errors():
    with pytest.raises(DataError, match="row 2"):
        _load("x1,z1,z2\n,0.5,0.5\n")


def test_load_wrong_field_count_names_row():
    with pytest.raises(DataError, match="row 2"):
        _load("x1,z1,z2\n1.0,0.5\n")


def test_load_header_mismatch():
    with pytest.raises(DataError, match="header"):
        _load("x1,a,b\n1.0,0.5,0.5\n")


def test_csv_round_trip():
    d = _load("x1,z1,z2\n1.25,0.5,\n-2.0,,0.25\n")
    text = dataset_to_csv(d)
    d2 = load_dataset(io.StringIO(text), SCHEMA)
    assert d2.z == d.z
    assert np.array_equal(d2.x, d.x)


def test_schema_json_round_trip():
    text = schema_to_json(SCHEMA)
    again = schema_from_json(text)
    assert again == SCHEMA


def test_schema_rejects_duplicate_names():
    with pytest.raises(ValueError):
        CovariateSchema(
            covariates=(Covariate("a", "continuous"), Covariate("a", "categorical")),
            response_dim=1,
        )


def test_extend_single_pattern_constant_factor():
    d = _load("x1,z1,z2\n1.0,0.5,0.5\n2.0,0.1,0.2\n")
    e = extend_covariates(d)
    assert e.extended
    labels = {rec["w"] for rec in e.z}
    assert labels == {"z1|z2"}


def test_extend_three_patterns_matches_group_membership():
    # the pattern groups of the synthetic missing-data setup
    bundle = gen_missing_test(1, n1=4, n2=3, n3=2, n_val=1, seed=0)
    e = extend_covariates(bundle.train)
    labels = [rec["w"] for rec in e.z]
    assert labels == ["z1"] * 4 + ["z2"] * 3 + ["z1|z2"] * 2
    assert len(set(labels)) == 3


def test_extend_four_patterns():
    # enumerate the patterns by brute force over rows
    d = _load("x1,z1,z2\n1.0,0.5,0.5\n2.0,0.1,\n3.0,,0.2\n4.0,,\n")
    expected = {pattern_label(rec.keys()) for rec in d.z}
    assert len(expected) == 4
    e = extend_covariates(d)
    assert {rec["w"] for rec in e.z} == expected


def test_extend_idempotent():
    d = _load("x1,z1,z2\n1.0,0.5,\n2.0,0.1,0.2\n")
    once = extend_covariates(d)
    twice = extend_covariates(once)
    assert twice is once
    assert [c.name for c in twice.schema.covariates].count("w") == 1


def test_enumerate_reference_setup():
    bundle = gen_missing_test(1, seed=0)  # 80/80/20 train split
    e = extend_covariates(bundle.train)
    subs = enumerate_subsets(e, l_max=2, n_min=5)
    by_ids = {s.covariate_ids: s.cardinality for s in subs}
    assert by_ids == {
        ("w",): 180,
        ("z1",): 100,
        ("z2",): 100,
        ("z1", "z2"): 20,
    }


def test_enumerate_fully_observed_single_covariate():
    schema = CovariateSchema(covariates=(Covariate("z1", "continuous"),), response_dim=1)
    d = load_dataset(io.StringIO("x1,z1\n1.0,0.5\n2.0,0.1\n3.0,0.9\n"), schema)
    e = extend_covariates(d)
    subs = enumerate_subsets(e, l_max=2, n_min=1)
    ids = {s.covariate_ids for s in subs}
    assert ids == {("w",), ("z1",)}
    w_subset = next(s for s in subs if s.covariate_ids == ("w",))
    assert len({e.z[i]["w"] for i in w_subset.support}) == 1


def test_enumerate_requires_extension():
    d = _load("x1,z1,z2\n1.0,0.5,0.5\n")
    with pytest.raises(ConfigurationError):
        enumerate_subsets(d, l_max=2, n_min=1)


def test_enumerate_empty_after_filter_errors():
    bundle = gen_missing_test(1, n1=3, n2=3, n3=3, n_val=1, seed=0)
    e = extend_covariates(bundle.train)
    with pytest.raises(ConfigurationError):
        enumerate_subsets(e, l_max=2, n_min=1000)


def test_subset_support_definition():
    bundle = gen_missing_test(2, n1=10, n2=7, n3=5, n_val=2, seed=4)
    e = extend_covariates(bundle.train)
    for s in enumerate_subsets(e, l_max=2, n_min=1):
        members = set(int(i) for i in s.support)
        for i in range(e.n):
            has_all = all(name in e.z[i] for name in s.covariate_ids)
            assert (i in members) == has_all


def test_singleton_supports_cover_rows_with_any_covariate():
    bundle = gen_missing_test(1, n1=6, n2=6, n3=4, n_val=2, seed=5)
    e = extend_covariates(bundle.train)
    subs = enumerate_subsets(e, l_max=1, n_min=1)
    singles = [s for s in subs if len(s.covariate_ids) == 1 and s.covariate_ids != ("w",)]
    covered = set()
    for s in singles:
        covered.update(int(i) for i in s.support)
    expect = {i for i in range(e.n) if any(k != "w" for k in e.z[i])}
    assert covered == expect


def test_split_sizes_and_full_observation():
    bundle = gen_missing_test(1, seed=0)
    # rebuild the paper-sized 200-row pool: train rows plus validation rows
    from hbary.dataset import HeterogeneousDataset

    pool = HeterogeneousDataset(
        schema=bundle.train.schema,
        x=np.vstack([bundle.train.x, bundle.validation.x]),
        z=list(bundle.train.z) + list(bundle.validation.z),
    )
    train, val = split(pool, validation_count=20, seed=11)
    assert train.n == 180 and val.n == 20
    assert fully_observed_indices(val).size == 20


def test_split_zero_count_errors():
    bundle = gen_missing_test(1, n1=5, n2=5, n3=5, n_val=1, seed=0)
    with pytest.raises(ValueError):
        split(bundle.train, validation_count=0, seed=0)


def test_split_not_enough_observed_rows():
    bundle = gen_missing_test(1, n1=8, n2=8, n3=2, n_val=1, seed=0)
    with pytest.raises(ValueError, match="fully observed"):
        split(bundle.train, validation_count=10, seed=0)


def test_split_deterministic():
    bundle = gen_missing_test(1, seed=0)
    a_train, a_val = split(bundle.train, validation_count=5, seed=42)
    b_train, b_val = split(bundle.train, validation_count=5, seed=42)
    assert np.array_equal(a_val.x, b_val.x)
    assert a_val.z == b_val.z
    assert np.array_equal(a_train.x, b_train.x)
