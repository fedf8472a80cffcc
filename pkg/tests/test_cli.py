import json
import os
from pathlib import Path

import numpy as np
import pytest

from hbary.cli import main


def run_cli(*argv):
    return main([str(a) for a in argv])


def read(path):
    return Path(path).read_text(encoding="utf-8")


@pytest.fixture(scope="module")
def generated(tmp_path_factory):
    out = tmp_path_factory.mktemp("gen")
    code = run_cli(
        "generate", "--test", "missing1", "--seed", "7",
        "--n1", "20", "--n2", "20", "--n3", "8", "--n-val", "6", "--out", out,
    )
    assert code == 0
    return out


@pytest.fixture(scope="module")
def fitted(generated, tmp_path_factory):
    out = tmp_path_factory.mktemp("fit")
    code = run_cli(
        "fit", "--data", generated / "data.csv", "--schema", generated / "schema.json",
        "--lambda", "0.1", "--seed", "7", "--out", out,
    )
    assert code == 0
    return out


def test_generate_writes_expected_files(generated):
    names = {p.name for p in generated.iterdir()}
    assert {"data.csv", "val.csv", "complete.csv", "schema.json", "truth.json", "manifest.json"} <= names
    assert len(read(generated / "data.csv").strip().splitlines()) == 49  # header + 48 rows
    assert len(read(generated / "val.csv").strip().splitlines()) == 7


def test_generate_default_sizes(tmp_path):
    out = tmp_path / "full"
    assert run_cli("generate", "--test", "missing1", "--seed", "7", "--out", out) == 0
    assert len(read(out / "data.csv").strip().splitlines()) == 181
    assert len(read(out / "val.csv").strip().splitlines()) == 21


def test_generate_unknown_test_usage_error(tmp_path):
    with pytest.raises(SystemExit) as err:
        run_cli("generate", "--test", "foo", "--out", tmp_path)
    assert err.value.code == 2


def test_generate_hidden_writes_labels(tmp_path):
    out = tmp_path / "hidden"
    assert run_cli("generate", "--test", "hidden", "--seed", "1", "--out", out) == 0
    labels = read(out / "hidden_labels.csv").strip().splitlines()
    assert labels[0] == "row,label"
    assert len(labels) == 91
    values = {float(line.split(",")[1]) for line in labels[1:]}
    assert values <= {-1.0, 1.0}


def test_generate_deterministic_bytes(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    for out in (out_a, out_b):
        assert run_cli(
            "generate", "--test", "missing2", "--seed", "3",
            "--n1", "10", "--n2", "10", "--n3", "5", "--n-val", "4", "--out", out,
        ) == 0
    for name in ("data.csv", "val.csv", "complete.csv", "schema.json", "truth.json"):
        assert read(out_a / name) == read(out_b / name), name


def test_fit_writes_solution_and_log(fitted):
    sol = json.loads(read(fitted / "solution.json"))
    assert sol["format"] == "hbary-solution-v1"
    assert len(sol["rows"]) == 48
    log_lines = read(fitted / "convergence.csv").strip().splitlines()
    assert log_lines[0] == "iteration,objective,eta,grad_norm"
    assert len(log_lines) >= 2
    manifest = json.loads(read(fitted / "manifest.json"))
    assert manifest["command"] == "fit"
    assert manifest["tool_version"]


def test_fit_lambda_zero_identity(generated, tmp_path):
    out = tmp_path / "fit0"
    assert run_cli(
        "fit", "--data", generated / "data.csv", "--schema", generated / "schema.json",
        "--lambda", "0", "--out", out,
    ) == 0
    sol = json.loads(read(out / "solution.json"))
    mean = np.array(sol["standardization"]["mean"])
    scale = np.array(sol["standardization"]["scale"])
    for row in sol["rows"]:
        assert np.allclose(row["y"], (np.array(row["x"]) - mean) / scale)


def test_fit_lambda_conflicts_with_tune(generated, tmp_path):
    with pytest.raises(SystemExit) as err:
        run_cli(
            "fit", "--data", generated / "data.csv", "--schema", generated / "schema.json",
            "--lambda", "0.1", "--tune", "--val", generated / "val.csv", "--out", tmp_path,
        )
    assert err.value.code == 2


def test_fit_requires_lambda_or_tune(generated, tmp_path):
    with pytest.raises(SystemExit) as err:
        run_cli(
            "fit", "--data", generated / "data.csv", "--schema", generated / "schema.json",
            "--out", tmp_path,
        )
    assert err.value.code == 2


def test_tune_single_point_grid(generated, tmp_path):
    out = tmp_path / "tune"
    code = run_cli(
        "tune", "--data", generated / "data.csv", "--schema", generated / "schema.json",
        "--val", generated / "val.csv", "--lambda-grid", "0.1", "--hy-mult-grid", "1.0",
        "--out", out,
    )
    assert code == 0
    lines = read(out / "tuning.csv").strip().splitlines()
    assert lines[0] == "lambda,h_y_multiplier,score"
    assert len(lines) == 2
    best = json.loads(read(out / "best.json"))
    assert best["lambda"] == 0.1
    assert best["h_y_multiplier"] == 1.0


def test_tune_missing_val_usage_error(generated, tmp_path):
    with pytest.raises(SystemExit) as err:
        run_cli(
            "tune", "--data", generated / "data.csv", "--schema", generated / "schema.json",
            "--out", tmp_path,
        )
    assert err.value.code == 2


def test_simulate_writes_samples_and_histogram(fitted, tmp_path):
    out = tmp_path / "sim"
    code = run_cli(
        "simulate", "--solution", fitted / "solution.json",
        "--z", "z1=0.5", "--z", "z2=0.5", "--out", out,
    )
    assert code == 0
    lines = read(out / "samples.csv").strip().splitlines()
    assert lines[0] == "x1"
    assert len(lines) == 49
    hist = read(out / "histogram.csv").strip().splitlines()
    assert hist[0] == "dimension,bin_left,bin_right,count"
    assert len(hist) == 31
    counts = sum(int(line.split(",")[-1]) for line in hist[1:])
    assert counts == 48
    target = json.loads(read(out / "target.json"))
    assert target["z_target"] == {"z1": 0.5, "z2": 0.5, "w": "z1|z2"}


def test_simulate_lambda_zero_returns_training_x(generated, tmp_path):
    fit_out = tmp_path / "fit0"
    assert run_cli(
        "fit", "--data", generated / "data.csv", "--schema", generated / "schema.json",
        "--lambda", "0", "--out", fit_out,
    ) == 0
    sim_out = tmp_path / "sim0"
    assert run_cli(
        "simulate", "--solution", fit_out / "solution.json", "--z", "z1=0.3", "--out", sim_out,
    ) == 0
    samples = [float(v) for v in read(sim_out / "samples.csv").strip().splitlines()[1:]]
    data_rows = read(generated / "data.csv").strip().splitlines()[1:]
    xs = [float(line.split(",")[0]) for line in data_rows]
    assert np.allclose(samples, xs)


def test_simulate_bogus_covariate_usage_error(fitted, tmp_path):
    with pytest.raises(SystemExit) as err:
        run_cli(
            "simulate", "--solution", fitted / "solution.json",
            "--z", "bogus=1", "--out", tmp_path,
        )
    assert err.value.code == 2


def test_simulate_corrupt_solution_exit_6(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    assert run_cli("simulate", "--solution", bad, "--z", "z1=0.5", "--out", tmp_path) == 6


def test_export_barycenter_lambda_zero(generated, tmp_path):
    fit_out = tmp_path / "fitexp"
    assert run_cli(
        "fit", "--data", generated / "data.csv", "--schema", generated / "schema.json",
        "--lambda", "0", "--out", fit_out,
    ) == 0
    exp_out = tmp_path / "exp"
    assert run_cli("export-barycenter", "--solution", fit_out / "solution.json", "--out", exp_out) == 0
    ys = [float(v) for v in read(exp_out / "barycenter.csv").strip().splitlines()[1:]]
    sol = json.loads(read(fit_out / "solution.json"))
    expect = [row["y"][0] for row in sol["rows"]]
    assert ys == expect
    sidecar = json.loads(read(exp_out / "barycenter.json"))
    assert sidecar["standardized_scale"] is True


def test_export_barycenter_corrupt_solution(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("[]", encoding="utf-8")
    assert run_cli("export-barycenter", "--solution", bad, "--out", tmp_path) == 6


def test_bench_bone_missing_data_exit_5(tmp_path):
    assert run_cli("bench", "--experiment", "bone", "--seeds", "1", "--out", tmp_path) == 5


def test_bench_zero_seeds_usage_error(tmp_path):
    with pytest.raises(SystemExit) as err:
        run_cli("bench", "--experiment", "missing1", "--seeds", "0", "--out", tmp_path)
    assert err.value.code == 2


def test_bench_unknown_method_usage_error(tmp_path):
    with pytest.raises(SystemExit) as err:
        run_cli(
            "bench", "--experiment", "missing1", "--methods", "HB,XX", "--seeds", "1",
            "--out", tmp_path,
        )
    assert err.value.code == 2


def test_fit_deterministic_outputs(generated, tmp_path):
    out_a, out_b = tmp_path / "fa", tmp_path / "fb"
    for out in (out_a, out_b):
        assert run_cli(
            "fit", "--data", generated / "data.csv", "--schema", generated / "schema.json",
            "--lambda", "0.05", "--seed", "7", "--out", out,
        ) == 0
    assert read(out_a / "solution.json") == read(out_b / "solution.json")
    assert read(out_a / "convergence.csv") == read(out_b / "convergence.csv")


def test_seed_env_var_default(generated, tmp_path, monkeypatch):
    monkeypatch.setenv("HBARY_SEED", "99")
    out = tmp_path / "env"
    assert run_cli("generate", "--test", "missing1", "--n1", "5", "--n2", "5", "--n3", "3",
                   "--n-val", "2", "--out", out) == 0
    manifest = json.loads(read(out / "manifest.json"))
    assert manifest["seed"] == 99


def test_version_flag():
    with pytest.raises(SystemExit) as err:
        run_cli("--version")
    assert err.value.code == 0
