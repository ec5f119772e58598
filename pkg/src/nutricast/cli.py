"""Command-line pipeline driver.

Subcommands: preprocess, train, evaluate, predict, grid, report. Runs
are config-driven (JSON config file, flags win on conflict) and fully
seeded: every artifact embeds the resolved config hash and the master
seed, and a `report` run audits that all artifacts in a directory came
from one configuration. Environment variables are never consulted.

Exit codes: 0 success, 1 validation/usage error, 2 runtime error.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .errors import NutricastError, UsageError
from .external import parse_external_table, predict_external_table, grid_bin_mean, diff_grids
from .features import (
    POSITION_SCALE,
    SplitSpec,
    apply_standardizer,
    build_feature_matrix,
    fit_standardizer,
    split_train_test,
)
from .ingest import (
    QcPolicy,
    TableSchema,
    apply_qc_filter,
    filter_southern_ocean,
    parse_hydro_table,
)
from .network import MlpConfig, TrainParams
from .projection import inverse_many
from .training import cross_validate_train, evaluate_mse, train_linear_baseline
from .uncertainty import mc_dropout_predict

DEFAULT_CONFIG = {
    "seed": None,
    "threads": 1,
    "columns": {},
    "flag_columns": {},
    "qc": {"accepted_flags": [2], "missing_sentinels": [-999, -9999]},
    "lat_cut": -45.0,
    "split": {"test_fraction": 0.1, "k": 10},
    "model": {"hidden_units": 64, "activation": "relu", "dropout_p": 0.2},
    "train": {"learning_rate": 1e-3, "batch_size": 256, "max_epochs": 200, "patience": 20},
    "targets": ["phosphate", "silicate"],
    "baseline": True,
    "predict": {"n_samples": 100},
    "grid": {"cell": 1.0},
    "defaults": {"surface_pressure": 5.0},
}


def _deep_update(base, overlay):
    for key, value in overlay.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _deep_update(base[key], value)
        else:
            base[key] = value
    return base


def load_run_config(args):
    cfg = json.loads(json.dumps(DEFAULT_CONFIG))  # deep copy
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise UsageError(f"--config {path}: no such file")
        try:
            _deep_update(cfg, json.loads(path.read_text(encoding="utf-8")))
        except json.JSONDecodeError as exc:
            raise UsageError(f"--config {path}: invalid JSON ({exc})")
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.threads is not None:
        cfg["threads"] = args.threads
    for name in ("n_samples",):
        if getattr(args, name, None) is not None:
            cfg["predict"]["n_samples"] = args.n_samples
    if getattr(args, "cell", None) is not None:
        cfg["grid"]["cell"] = args.cell
    if cfg["seed"] is None:
        raise UsageError("a master seed is required: pass --seed or set seed in the config")
    cfg["seed"] = int(cfg["seed"])
    return cfg


def resolved_hash(cfg):
    semantic = {k: v for k, v in cfg.items() if k != "threads"}
    return io.config_hash(semantic)


def _outdir(args):
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _require(path, flag):
    if not Path(path).exists():
        raise UsageError(f"{flag} {path}: no such file")
    return Path(path)


def _spec(cfg):
    return SplitSpec(
        test_fraction=cfg["split"]["test_fraction"], k=cfg["split"]["k"], seed=cfg["seed"]
    )


def _model_config(cfg):
    return MlpConfig(
        hidden_units=cfg["model"]["hidden_units"],
        activation=cfg["model"]["activation"],
        dropout_p=cfg["model"]["dropout_p"],
    )


def _train_params(cfg):
    return TrainParams(
        learning_rate=cfg["train"]["learning_rate"],
        batch_size=cfg["train"]["batch_size"],
        max_epochs=cfg["train"]["max_epochs"],
        patience=cfg["train"]["patience"],
    )


def _check_seed_matches(cfg, sidecar, what):
    # the train/test split is a pure function of (n, seed), so mixing a
    # matrix from one seed with commands run under another would silently
    # evaluate on rows the model trained on
    if sidecar.get("seed") != cfg["seed"]:
        raise UsageError(
            f"{what}: feature matrix was preprocessed with seed {sidecar.get('seed')}, "
            f"but this run uses seed {cfg['seed']}"
        )


def cmd_preprocess(args):
    cfg = load_run_config(args)
    out = _outdir(args)
    src = _require(args.input, "--input")
    schema = TableSchema.from_config(cfg["columns"], cfg["flag_columns"])
    policy = QcPolicy(
        accepted_flags=frozenset(cfg["qc"]["accepted_flags"]),
        missing_sentinels=frozenset(float(s) for s in cfg["qc"]["missing_sentinels"]),
    )

    samples = parse_hydro_table(src, schema, sentinels=policy.missing_sentinels)
    kept_qc, dropped_qc = apply_qc_filter(samples, policy)
    qc_positions = sorted(set(range(len(samples))) - {d.index for d in dropped_qc})
    kept_region, dropped_region = filter_southern_ocean(kept_qc, cfg["lat_cut"])
    region_positions = sorted(
        set(range(len(kept_qc))) - {d.index for d in dropped_region}
    )

    log_entries = [(d.index, d.reason) for d in dropped_qc]
    log_entries += [(qc_positions[d.index], d.reason) for d in dropped_region]

    eligible, orig_ids = [], []
    for local, s in enumerate(kept_region):
        orig = qc_positions[region_positions[local]]
        if s.has_labels():
            eligible.append(s)
            orig_ids.append(orig)
        else:
            log_entries.append((orig, "no label measured (kept out of the training set)"))

    matrix = build_feature_matrix(eligible)
    matrix.row_ids = np.asarray(orig_ids, dtype=np.int64)
    spec = _spec(cfg)
    train_idx, _ = split_train_test(matrix.n_rows, spec)
    standardizer = fit_standardizer(matrix, rows=train_idx)
    std_matrix = apply_standardizer(standardizer, matrix)

    cfg_hash = resolved_hash(cfg)
    io.save_matrix(
        out / "features.csv",
        std_matrix,
        standardizer=standardizer,
        seed=cfg["seed"],
        cfg_hash=cfg_hash,
        source_checksum=io.sha256_file(src),
    )
    log_lines = [f"row {i}: {reason}" for i, reason in sorted(log_entries)]
    (out / "dropped_rows.log").write_text(
        "\n".join(log_lines) + ("\n" if log_lines else ""), encoding="utf-8"
    )
    print(
        f"preprocess: {len(samples)} rows in, {matrix.n_rows} retained "
        f"({len(dropped_qc)} failed QC, {len(dropped_region)} outside region, "
        f"{len(kept_region) - matrix.n_rows} without labels)"
    )
    print(f"wrote {out / 'features.csv'} (+ sidecar), {out / 'dropped_rows.log'}")
    return 0


def _train_one(matrix, target, cfg, spec, params, n_workers):
    sub = matrix.subset(matrix.labeled_rows(target))
    return cross_validate_train(
        sub, target, _model_config(cfg), spec, params=params, n_workers=n_workers
    )


def _print_report(report, kind):
    print(f"[{report.target} {kind}] fold validation MSEs:")
    for i, v in enumerate(report.fold_val_mse):
        marker = " <- selected" if i == report.selected_fold else ""
        print(f"  fold {i}: {v:.6g}{marker}")
    print(
        f"  test MSE {report.test_mse:.6g} on {report.n_test} held-out rows "
        f"({report.wall_clock_seconds:.1f}s)"
    )


def cmd_train(args):
    cfg = load_run_config(args)
    out = _outdir(args)
    matrix_path = _require(args.features, "--features")
    matrix, standardizer, sidecar = io.load_matrix(matrix_path)
    if standardizer is None:
        raise UsageError("feature matrix sidecar lacks standardizer statistics")
    _check_seed_matches(cfg, sidecar, "train")
    spec = _spec(cfg)
    params = _train_params(cfg)
    cfg_hash = resolved_hash(cfg)

    for target in cfg["targets"]:
        model, report = _train_one(matrix, target, cfg, spec, params, cfg["threads"])
        model.standardizer_hash = standardizer.state_hash()
        io.save_model(
            out / f"model_{target}.json", model, seed=cfg["seed"], cfg_hash=cfg_hash,
            target=target,
        )
        io.save_cv_report(out / f"cvreport_{target}.json", report, cfg_hash=cfg_hash)
        _print_report(report, "nn")
        if cfg["baseline"]:
            lin_model, lin_report = train_linear_baseline(
                matrix.subset(matrix.labeled_rows(target)), target, spec, params=params
            )
            lin_model.standardizer_hash = standardizer.state_hash()
            io.save_model(
                out / f"model_{target}_linear.json",
                lin_model,
                seed=cfg["seed"],
                cfg_hash=cfg_hash,
                target=target,
            )
            io.save_cv_report(
                out / f"cvreport_{target}_linear.json", lin_report, cfg_hash=cfg_hash
            )
            _print_report(lin_report, "linear")
    return 0


def cmd_evaluate(args):
    cfg = load_run_config(args)
    out = _outdir(args)
    matrix, standardizer, sidecar = io.load_matrix(_require(args.features, "--features"))
    _check_seed_matches(cfg, sidecar, "evaluate")
    models_dir = _require(args.models, "--models")
    spec = _spec(cfg)
    rows = []
    for path in sorted(models_dir.glob("model_*.json")):
        model, meta = io.load_model(path)
        io.check_standardizer_hash(standardizer, model.standardizer_hash)
        target = meta.get("target")
        sub = matrix.subset(matrix.labeled_rows(target))
        _, test_idx = split_train_test(sub.n_rows, spec)
        mse = evaluate_mse(model, sub, target, rows=test_idx)
        kind = "linear" if model.config.hidden_units == 0 else "nn"
        rows.append((path.name, target, kind, int(test_idx.size), float(mse)))
        print(f"{path.name}: target={target} kind={kind} test MSE {mse:.6g}")
    io.write_table(
        out / "mse_table.csv",
        ("model_file", "target", "kind", "n_test", "test_mse"),
        rows,
        seed=cfg["seed"],
        cfg_hash=resolved_hash(cfg),
    )
    print(f"wrote {out / 'mse_table.csv'}")
    return 0


def _prediction_rows(matrix, summaries, truth):
    lats, lons = inverse_many(
        matrix.values[:, 0] * POSITION_SCALE, matrix.values[:, 1] * POSITION_SCALE
    )
    rows = []
    for i, s in enumerate(summaries):
        rows.append(
            (
                int(matrix.row_ids[i]),
                float(lats[i]),
                float(lons[i]),
                s.mean,
                s.std,
                s.ci_low,
                s.ci_high,
                s.n_samples,
                float(truth[i]) if truth is not None and not np.isnan(truth[i]) else None,
            )
        )
    return rows


def cmd_predict(args):
    cfg = load_run_config(args)
    out = _outdir(args)
    model, meta = io.load_model(_require(args.model, "--model"))
    target = meta.get("target") or "phosphate"
    n_samples = cfg["predict"]["n_samples"]
    cfg_hash = resolved_hash(cfg)

    if bool(args.features) == bool(args.external):
        raise UsageError("predict needs exactly one of --features or --external")

    if args.features:
        matrix, standardizer, sidecar = io.load_matrix(_require(args.features, "--features"))
        _check_seed_matches(cfg, sidecar, "predict")
        io.check_standardizer_hash(standardizer, model.standardizer_hash)
        sub = matrix.subset(matrix.labeled_rows(target))
        if args.rows == "test":
            _, test_idx = split_train_test(sub.n_rows, _spec(cfg))
            sub = sub.subset(test_idx)
        summaries = mc_dropout_predict(
            model, sub.values, n_samples=n_samples, seed=cfg["seed"], row_ids=sub.row_ids
        )
        name = f"predictions_{target}_{args.rows}.csv"
        io.write_table(
            out / name,
            ("row_id", "lat", "lon", "mean", "std", "ci_low", "ci_high", "n_samples", "truth"),
            _prediction_rows(sub, summaries, sub.label(target)),
            seed=cfg["seed"],
            cfg_hash=cfg_hash,
            extra_meta={"target": target, "source": "features", "rows": args.rows},
        )
        print(f"predicted {sub.n_rows} rows -> {out / name}")
        return 0

    ext_rows = parse_external_table(
        _require(args.external, "--external"),
        columns=cfg["columns"],
        source_tag=args.source,
        sentinels=frozenset(float(s) for s in cfg["qc"]["missing_sentinels"]),
    )
    matrix_path = args.standardizer or args.features
    if not matrix_path:
        raise UsageError("--external predictions need --standardizer FEATURES.csv")
    _, standardizer, _ = io.load_matrix(_require(matrix_path, "--standardizer"))
    result = predict_external_table(
        model,
        standardizer,
        ext_rows,
        surface_pressure=cfg["defaults"]["surface_pressure"],
        n_samples=n_samples,
        seed=cfg["seed"],
        lat_cut=cfg["lat_cut"],
    )
    name = f"predictions_{target}_{args.source}.csv"
    ref_field = "phosphate_ref" if target == "phosphate" else "silicate_ref"
    table_rows = []
    for r, s in zip(result.rows, result.summaries):
        ref = getattr(r, ref_field)
        table_rows.append(
            (r.row_id, r.latitude, r.longitude, s.mean, s.std, s.ci_low, s.ci_high,
             s.n_samples, ref, r.source)
        )
    io.write_table(
        out / name,
        ("row_id", "lat", "lon", "mean", "std", "ci_low", "ci_high", "n_samples",
         "reference", "source"),
        table_rows,
        seed=cfg["seed"],
        cfg_hash=cfg_hash,
        extra_meta={"target": target, "source": args.source, "n_dropped": result.n_dropped},
    )
    drop_log = out / f"predictions_{target}_{args.source}.dropped.log"
    drop_log.write_text(
        "\n".join(f"row {d.index}: {d.reason}" for d in result.dropped)
        + ("\n" if result.dropped else ""),
        encoding="utf-8",
    )
    print(
        f"predicted {len(result.rows)} rows ({result.n_dropped} dropped) -> {out / name}"
    )
    return 0


def cmd_grid(args):
    cfg = load_run_config(args)
    out = _outdir(args)
    pred_path = _require(args.predictions, "--predictions")
    meta, header, str_rows = io.read_table(pred_path)
    target = meta.get("target", "value")
    idx = {name: i for i, name in enumerate(header)}
    for needed in ("lat", "lon", "mean", "std"):
        if needed not in idx:
            raise UsageError(f"prediction table lacks column {needed!r}")

    def points(col):
        pts = []
        for r in str_rows:
            if r[idx[col]] == "":
                continue
            pts.append((float(r[idx["lat"]]), float(r[idx["lon"]]), float(r[idx[col]])))
        return pts

    cell = cfg["grid"]["cell"]
    cfg_hash = resolved_hash(cfg)
    nn_grid = grid_bin_mean(points("mean"), cell, variable=f"{target}_nn_mean")
    io.save_grid(out / f"grid_{target}_mean.csv", nn_grid, seed=cfg["seed"], cfg_hash=cfg_hash)
    std_grid = grid_bin_mean(points("std"), cell, variable=f"{target}_nn_std")
    io.save_grid(out / f"grid_{target}_std.csv", std_grid, seed=cfg["seed"], cfg_hash=cfg_hash)
    written = [f"grid_{target}_mean.csv", f"grid_{target}_std.csv"]
    if "reference" in idx and any(r[idx["reference"]] != "" for r in str_rows):
        ref_grid = grid_bin_mean(points("reference"), cell, variable=f"{target}_reference")
        io.save_grid(
            out / f"grid_{target}_ref.csv", ref_grid, seed=cfg["seed"], cfg_hash=cfg_hash
        )
        diff = diff_grids(ref_grid, nn_grid)  # reference minus model, "ESM - NN"
        io.save_grid(
            out / f"grid_{target}_diff.csv", diff, seed=cfg["seed"], cfg_hash=cfg_hash
        )
        written += [f"grid_{target}_ref.csv", f"grid_{target}_diff.csv"]
    print(f"wrote {', '.join(written)} in {out}")
    return 0


def cmd_report(args):
    cfg = load_run_config(args)
    out = _outdir(args)
    target_dir = Path(args.dir or out)
    if not target_dir.exists():
        raise UsageError(f"--dir {target_dir}: no such directory")

    artifacts = []
    for path in sorted(target_dir.iterdir()):
        if path.suffix == ".json" and path.name.endswith(".sidecar.json"):
            doc = json.loads(path.read_text(encoding="utf-8"))
            artifacts.append((path.name, doc.get("config_hash"), doc.get("seed")))
        elif path.suffix == ".json" and (
            path.name.startswith("model_") or path.name.startswith("cvreport_")
        ):
            doc = json.loads(path.read_text(encoding="utf-8"))
            artifacts.append((path.name, doc.get("config_hash"), doc.get("seed")))
        elif path.suffix == ".csv":
            meta, _, _ = io.read_table(path)
            if "config_hash" in meta:
                artifacts.append((path.name, meta["config_hash"], int(meta["seed"])))
    if not artifacts:
        raise UsageError(f"no pipeline artifacts found in {target_dir}")

    hashes = {h for _, h, _ in artifacts}
    seeds = {s for _, _, s in artifacts}
    lines = [f"pipeline report for {target_dir}", ""]
    lines += [f"  {name}  config_hash={h} seed={s}" for name, h, s in artifacts]
    lines.append("")
    ok = len(hashes) == 1 and len(seeds) == 1
    lines.append(
        "provenance OK: all artifacts share one config hash and seed"
        if ok
        else f"provenance MISMATCH: hashes={sorted(hashes)} seeds={sorted(seeds)}"
    )
    for path in sorted(target_dir.glob("cvreport_*.json")):
        doc = json.loads(path.read_text(encoding="utf-8"))
        lines.append("")
        lines.append(
            f"{path.name}: target={doc['target']} k={doc['k']} "
            f"selected fold {doc['selected_fold']} test MSE {doc['test_mse']:.6g}"
        )
        lines += [
            f"  fold {i}: {v:.6g}" for i, v in enumerate(doc["fold_val_mse"])
        ]
    text = "\n".join(lines) + "\n"
    (out / "report.txt").write_text(text, encoding="utf-8")
    print(text, end="")
    if not ok:
        raise NutricastError("provenance mismatch across artifacts")
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="master seed (required here or in config)")
    common.add_argument("--threads", type=int, help="max worker threads for fold training")
    common.add_argument("--out", help="output directory (default: current)")

    parser = _Parser(prog="nutricast", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", parents=[common], help="ingest, QC and standardize")
    p.add_argument("--input", required=True, help="hydrographic table (csv/tsv)")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", parents=[common], help="cross-validated training")
    p.add_argument("--features", required=True, help="features.csv from preprocess")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[common], help="test MSE table for saved models")
    p.add_argument("--features", required=True)
    p.add_argument("--models", required=True, help="directory holding model_*.json")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", parents=[common], help="MC-dropout prediction tables")
    p.add_argument("--model", required=True)
    p.add_argument("--features", help="predict rows of a preprocessed matrix")
    p.add_argument("--rows", choices=("test", "all"), default="test")
    p.add_argument("--external", help="predict an external (ESM/float) table")
    p.add_argument("--standardizer", help="features.csv supplying the fitted standardizer")
    p.add_argument("--source", choices=("esm", "argo"), default="esm")
    p.add_argument("--n-samples", dest="n_samples", type=int, help="MC dropout iterations")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("grid", parents=[common], help="bin predictions onto a lat/lon grid")
    p.add_argument("--predictions", required=True)
    p.add_argument("--cell", type=float, help="grid cell size in degrees")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("report", parents=[common], help="provenance audit and summary")
    p.add_argument("--dir", help="artifact directory (default --out)")
    p.set_defaults(func=cmd_report)
    return parser


def run_command(argv):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NutricastError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
