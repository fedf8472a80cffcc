import numpy as np
import pytest

from hbary.dataset import fully_observed_indices
from hbary.synthgen import (
    gen_extrapolation,
    gen_hidden_factor,
    gen_missing_test,
    gen_structured,
)


def test_missing_default_sizes():
    bundle = gen_missing_test(1, seed=7)
    assert bundle.train.n == 180
    assert bundle.validation.n == 20
    assert bundle.complete.n == 180


def test_missing_pattern_partition_sizes_exact():
    bundle = gen_missing_test(2, n1=9, n2=7, n3=4, n_val=3, seed=1)
    patterns = [frozenset(rec.keys()) for rec in bundle.train.z]
    assert patterns.count(frozenset({"z1"})) == 9
    assert patterns.count(frozenset({"z2"})) == 7
    assert patterns.count(frozenset({"z1", "z2"})) == 4
    assert fully_observed_indices(bundle.validation).size == 3


def test_missing_truth_values():
    t1 = gen_missing_test(1, n1=2, n2=2, n3=2, n_val=1, seed=0).truth
    assert t1.f({"z1": 0.5, "z2": 1.0}) == pytest.approx(1.5)
    assert t1.f({"z1": 0.5, "z2": 0.5}) == pytest.approx(1.25)
    assert t1.g({"z1": 0.3, "z2": 0.9}) == pytest.approx(0.2)
    t2 = gen_missing_test(2, n1=2, n2=2, n3=2, n_val=1, seed=0).truth
    assert t2.f({"z1": 0.5, "z2": 1.0}) == pytest.approx(1.0 + 0.25)
    t3 = gen_missing_test(3, n1=2, n2=2, n3=2, n_val=1, seed=0).truth
    assert t3.g({"z1": 1.0, "z2": 1.0}) == pytest.approx(0.5)


def test_missing_rejects_unknown_test():
    with pytest.raises(ValueError):
        gen_missing_test(4, seed=0)


def test_missing_deterministic_bit_identical():
    a = gen_missing_test(3, seed=123)
    b = gen_missing_test(3, seed=123)
    assert np.array_equal(a.train.x, b.train.x)
    assert a.train.z == b.train.z
    assert np.array_equal(a.validation.x, b.validation.x)
    c = gen_missing_test(3, seed=124)
    assert not np.array_equal(a.train.x, c.train.x)


def test_missing_complete_matches_hidden_rows():
    bundle = gen_missing_test(1, n1=5, n2=5, n3=5, n_val=2, seed=9)
    assert np.array_equal(bundle.train.x, bundle.complete.x)
    for hidden_rec, full_rec in zip(bundle.train.z, bundle.complete.z):
        assert set(full_rec) == {"z1", "z2"}
        for key, value in hidden_rec.items():
            assert full_rec[key] == value


def test_covariates_within_support():
    bundle = gen_missing_test(1, seed=3)
    for rec in bundle.train.z:
        for v in rec.values():
            assert 0.0 <= v <= 1.0
    assert np.all(np.isfinite(bundle.train.x))


def test_structured_defaults_and_group_schemas():
    data, truth = gen_structured(alpha=1.0, seed=0)
    assert data.n == 140
    assert [set(rec) for rec in data.z[:40]] == [{"z1", "z2"}] * 40
    assert [set(rec) for rec in data.z[40:]] == [{"z1"}] * 100
    assert truth.f({"z1": 0.5, "z2": 1.0}) == pytest.approx(1.5)


def test_structured_alpha_zero_shares_one_law():
    _, truth = gen_structured(alpha=0.0, seed=0)
    base = truth.f({"z1": 0.3, "z2": 0.1})
    assert truth.f({"z1": 0.3, "z2": 0.9}) == pytest.approx(base)


def test_extrapolation_support_and_targets():
    data, truth, targets = gen_extrapolation(seed=5)
    z1_first_group = [rec["z1"] for rec in data.z[:40]]
    assert max(z1_first_group) <= 0.5
    assert targets[0] == {"z1": 0.85, "z2": 0.25}
    assert targets[1] == {"z1": 0.25, "z2": 0.25}
    assert truth.f(targets[0]) == pytest.approx(0.26)
    assert truth.f(targets[1]) == pytest.approx(0.5)


def test_hidden_defaults_and_labels():
    data, truth, labels = gen_hidden_factor(seed=2)
    assert data.n == 90
    assert labels.shape == (90,)
    assert set(np.unique(labels)) <= {-1.0, 1.0}
    assert truth.noise_kind == "bimodal"


def test_hidden_label_mean_matches_mixture():
    rng_draws = []
    for seed in range(100):
        _, _, labels = gen_hidden_factor(n1=500, n2=500, seed=seed)
        rng_draws.append(labels)
    mean = float(np.mean(np.concatenate(rng_draws)))
    assert abs(mean - 1.0 / 3.0) < 0.01


def test_hidden_deterministic():
    a = gen_hidden_factor(seed=11)
    b = gen_hidden_factor(seed=11)
    assert np.array_equal(a[0].x, b[0].x)
    assert np.array_equal(a[2], b[2])
