import json

import pytest

from nutricast.cli import run_command
from nutricast.synth import write_synthetic_external_csv, write_synthetic_hydro_csv

FAST_CONFIG = {
    "seed": 4242,
    "split": {"test_fraction": 0.1, "k": 10},
    "model": {"hidden_units": 8, "activation": "relu", "dropout_p": 0.2},
    "train": {"learning_rate": 1e-2, "batch_size": 128, "max_epochs": 12, "patience": 6},
    "predict": {"n_samples": 25},
    "grid": {"cell": 5.0},
}


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("pipeline")
    hydro = root / "hydro.csv"
    external = root / "esm.csv"
    write_synthetic_hydro_csv(hydro, n=400, seed=1)
    write_synthetic_external_csv(external, n=150, seed=2)
    config = root / "config.json"
    config.write_text(json.dumps(FAST_CONFIG))
    return root, hydro, external, config


def run_pipeline(out, hydro, external, config):
    base = ["--config", str(config), "--out", str(out)]
    assert run_command(["preprocess", "--input", str(hydro), *base]) == 0
    features = str(out / "features.csv")
    assert run_command(["train", "--features", features, *base]) == 0
    assert run_command(["evaluate", "--features", features, "--models", str(out), *base]) == 0
    assert run_command([
        "predict", "--model", str(out / "model_phosphate.json"),
        "--features", features, "--rows", "test", *base,
    ]) == 0
    assert run_command([
        "predict", "--model", str(out / "model_phosphate.json"),
        "--external", str(external), "--standardizer", features, "--source", "esm", *base,
    ]) == 0
    assert run_command([
        "grid", "--predictions", str(out / "predictions_phosphate_esm.csv"), *base,
    ]) == 0
    assert run_command(["report", "--dir", str(out), *base]) == 0


def test_full_pipeline(workspace, tmp_path):
    root, hydro, external, config = workspace
    out = tmp_path / "run"
    run_pipeline(out, hydro, external, config)

    for name in (
        "features.csv",
        "features.sidecar.json",
        "dropped_rows.log",
        "model_phosphate.json",
        "model_phosphate_linear.json",
        "model_silicate.json",
        "cvreport_phosphate.json",
        "cvreport_silicate_linear.json",
        "mse_table.csv",
        "predictions_phosphate_test.csv",
        "predictions_phosphate_esm.csv",
        "grid_phosphate_mean.csv",
        "grid_phosphate_std.csv",
        "grid_phosphate_ref.csv",
        "grid_phosphate_diff.csv",
        "report.txt",
    ):
        assert (out / name).exists(), name

    report = json.loads((out / "cvreport_phosphate.json").read_text())
    assert len(report["fold_val_mse"]) == 10
    assert "wall_clock" not in json.dumps(report)
    assert (out / "report.txt").read_text().count("provenance OK") == 1


def test_pipeline_determinism(workspace, tmp_path):
    # two end-to-end runs with one master seed must be byte-identical
    root, hydro, external, config = workspace
    a = tmp_path / "a"
    b = tmp_path / "b"
    run_pipeline(a, hydro, external, config)
    run_pipeline(b, hydro, external, config)
    compared = 0
    for name in sorted(p.name for p in a.iterdir()):
        if name == "report.txt":
            continue  # embeds the directory path by design
        left = (a / name).read_bytes()
        right = (b / name).read_bytes()
        assert left == right, f"{name} differs between identical runs"
        compared += 1
    assert compared >= 15


def test_different_seed_changes_models(workspace, tmp_path):
    root, hydro, external, config = workspace
    out1 = tmp_path / "s1"
    out2 = tmp_path / "s2"
    base = ["--config", str(config)]
    for out, seed in ((out1, "1"), (out2, "2")):
        assert run_command(["preprocess", "--input", str(hydro), *base,
                            "--seed", seed, "--out", str(out)]) == 0
        assert run_command(["train", "--features", str(out / "features.csv"), *base,
                            "--seed", seed, "--out", str(out)]) == 0
    m1 = (out1 / "model_phosphate.json").read_bytes()
    m2 = (out2 / "model_phosphate.json").read_bytes()
    assert m1 != m2


def test_missing_seed_is_usage_error(tmp_path, workspace):
    root, hydro, _, _ = workspace
    code = run_command(["preprocess", "--input", str(hydro), "--out", str(tmp_path)])
    assert code == 1


def test_unknown_flag_is_usage_error():
    assert run_command(["train", "--bogus"]) == 1


def test_missing_input_file_is_usage_error(tmp_path):
    code = run_command([
        "preprocess", "--input", str(tmp_path / "nope.csv"), "--seed", "1",
        "--out", str(tmp_path),
    ])
    assert code == 1


def test_standardizer_mismatch_exits_2(workspace, tmp_path):
    root, hydro, external, config = workspace
    out = tmp_path / "m1"
    other = tmp_path / "m2"
    other_hydro = tmp_path / "hydro2.csv"
    write_synthetic_hydro_csv(other_hydro, n=400, seed=31)
    base = ["--config", str(config)]
    assert run_command(["preprocess", "--input", str(hydro), *base, "--out", str(out)]) == 0
    assert run_command(["train", "--features", str(out / "features.csv"), *base,
                        "--out", str(out)]) == 0
    # same seed but different source rows: a different fitted
    # standardizer, so the hash recorded on the model no longer matches
    assert run_command(["preprocess", "--input", str(other_hydro), *base,
                        "--out", str(other)]) == 0
    code = run_command(["evaluate", "--features", str(other / "features.csv"),
                        "--models", str(out), *base, "--out", str(other)])
    assert code == 2


def test_seed_mismatch_is_usage_error(workspace, tmp_path):
    root, hydro, external, config = workspace
    out = tmp_path / "seeded"
    base = ["--config", str(config)]
    assert run_command(["preprocess", "--input", str(hydro), *base, "--out", str(out)]) == 0
    code = run_command(["train", "--features", str(out / "features.csv"), *base,
                        "--seed", "999", "--out", str(out)])
    assert code == 1


def test_predict_defaults_to_100_samples(workspace, tmp_path):
    root, hydro, external, config = workspace
    out = tmp_path / "default_n"
    minimal = tmp_path / "minimal.json"
    cfg = dict(FAST_CONFIG)
    cfg.pop("predict")  # fall back to the built-in defaults
    minimal.write_text(json.dumps(cfg))
    base = ["--config", str(minimal), "--out", str(out)]
    assert run_command(["preprocess", "--input", str(hydro), *base]) == 0
    assert run_command(["train", "--features", str(out / "features.csv"), *base]) == 0
    assert run_command(["predict", "--model", str(out / "model_phosphate.json"),
                        "--features", str(out / "features.csv"), *base]) == 0
    from nutricast import io

    meta, header, rows = io.read_table(out / "predictions_phosphate_test.csv")
    n_col = header.index("n_samples")
    assert {r[n_col] for r in rows} == {"100"}
