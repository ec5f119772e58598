"""File formats: model documents, feature-matrix sidecars, output tables.

All artifacts embed the run's config hash and master seed so a report
run can audit provenance. Floats are serialized with repr (shortest
round-trip form), which both keeps files byte-stable across runs and
makes parse -> write -> parse bit-identical.

Formats:
* model:   JSON with config, seeds, flattened row-major weight arrays
           (decimal text) and the standardizer reference hash;
* matrix:  delimited text plus a JSON sidecar (column order + hash,
           standardizer statistics, seed, source checksum);
* tables:  delimited text with '#'-prefixed metadata lines.
"""

import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import ShapeMismatch, StandardizerMismatch
from .features import COLUMNS, FeatureMatrix, Standardizer, column_hash
from .network import MlpConfig, MlpModel

FORMAT_VERSION = 1


def sha256_file(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]


def canonical_json(obj):
    """Sorted-key, repr-float JSON used for hashing and artifacts."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(resolved):
    return hashlib.sha256(canonical_json(resolved).encode()).hexdigest()[:16]


def _float_list(arr):
    return [repr(float(v)) for v in np.asarray(arr).reshape(-1)]


def _from_float_list(values, shape):
    return np.array([float(v) for v in values]).reshape(shape)


def save_model(path, model, seed=0, cfg_hash="", target=None):
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": "dense-regressor",
        "target": target,
        "config": model.config.to_dict(),
        "init_seed": model.init_seed,
        "seed": seed,
        "config_hash": cfg_hash,
        "standardizer_hash": model.standardizer_hash,
        "weights": {
            name: {"shape": list(p.shape), "data": _float_list(p)}
            for name, p in model.parameters()
        },
    }
    doc["weights_sha256"] = hashlib.sha256(
        canonical_json(doc["weights"]).encode()
    ).hexdigest()[:16]
    Path(path).write_text(canonical_json(doc) + "\n", encoding="utf-8")
    return path


def load_model(path):
    """Load and validate a model document; returns (model, metadata)."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    stored = doc.get("weights_sha256")
    actual = hashlib.sha256(canonical_json(doc["weights"]).encode()).hexdigest()[:16]
    if stored != actual:
        raise ShapeMismatch(f"weights checksum mismatch in {path}")
    config = MlpConfig(**doc["config"])
    w = doc["weights"]
    d, h = config.input_dim, config.hidden_units
    if h == 0:
        expected = {"W1": (d, 1), "b1": (1,)}
    else:
        expected = {"W1": (d, h), "b1": (h,), "W2": (h, 1), "b2": (1,)}
    arrays = {}
    for name, spec in expected.items():
        if name not in w:
            raise ShapeMismatch(f"model file lacks weight block {name!r}")
        if tuple(w[name]["shape"]) != spec:
            raise ShapeMismatch(
                f"block {name!r} has shape {w[name]['shape']}, expected {list(spec)}"
            )
        arrays[name] = _from_float_list(w[name]["data"], spec)
    model = MlpModel(
        config=config,
        init_seed=doc["init_seed"],
        W1=arrays["W1"],
        b1=arrays["b1"],
        W2=arrays.get("W2"),
        b2=arrays.get("b2"),
        standardizer_hash=doc.get("standardizer_hash"),
    )
    meta = {k: doc.get(k) for k in ("seed", "config_hash", "standardizer_hash", "target")}
    return model, meta


def save_matrix(path, matrix, standardizer=None, seed=0, cfg_hash="", source_checksum=""):
    """Write matrix.csv plus its .sidecar.json descriptor."""
    path = Path(path)
    lines = [",".join(COLUMNS + ("phosphate", "silicate", "row_id"))]
    for i in range(matrix.n_rows):
        cells = [repr(float(v)) for v in matrix.values[i]]
        for lab in (matrix.phosphate[i], matrix.silicate[i]):
            cells.append("" if np.isnan(lab) else repr(float(lab)))
        cells.append(str(int(matrix.row_ids[i])))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    sidecar = {
        "format_version": FORMAT_VERSION,
        "columns": list(COLUMNS),
        "column_hash": column_hash(),
        "standardized": matrix.standardized,
        "standardizer": standardizer.to_dict() if standardizer is not None else None,
        "seed": seed,
        "config_hash": cfg_hash,
        "source_checksum": source_checksum,
        "n_rows": matrix.n_rows,
    }
    sidecar_path(path).write_text(canonical_json(sidecar) + "\n", encoding="utf-8")
    return path


def sidecar_path(matrix_path):
    return Path(matrix_path).with_suffix(".sidecar.json")


def load_matrix(path):
    """Read matrix.csv + sidecar; returns (matrix, standardizer|None, sidecar)."""
    path = Path(path)
    sidecar = json.loads(sidecar_path(path).read_text(encoding="utf-8"))
    if sidecar["column_hash"] != column_hash():
        raise ShapeMismatch(
            f"column order hash {sidecar['column_hash']} does not match this build"
        )
    lines = path.read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    if header[: len(COLUMNS)] != list(COLUMNS):
        raise ShapeMismatch("matrix header does not match the fixed column order")
    n = len(lines) - 1
    values = np.empty((n, len(COLUMNS)))
    phosphate = np.empty(n)
    silicate = np.empty(n)
    row_ids = np.empty(n, dtype=np.int64)
    for i, line in enumerate(lines[1:]):
        cells = line.split(",")
        values[i] = [float(c) for c in cells[: len(COLUMNS)]]
        phosphate[i] = float(cells[len(COLUMNS)]) if cells[len(COLUMNS)] else np.nan
        silicate[i] = float(cells[len(COLUMNS) + 1]) if cells[len(COLUMNS) + 1] else np.nan
        row_ids[i] = int(cells[len(COLUMNS) + 2])
    matrix = FeatureMatrix(
        values=values,
        phosphate=phosphate,
        silicate=silicate,
        standardized=sidecar["standardized"],
        row_ids=row_ids,
    )
    standardizer = (
        Standardizer.from_dict(sidecar["standardizer"]) if sidecar["standardizer"] else None
    )
    return matrix, standardizer, sidecar


def check_standardizer_hash(standardizer, expected):
    if expected is not None and standardizer.state_hash() != expected:
        raise StandardizerMismatch(
            f"standardizer hash {standardizer.state_hash()} != expected {expected}"
        )


def write_table(path, header, rows, seed=0, cfg_hash="", extra_meta=None):
    """Delimited table with '#' metadata lines; floats via repr."""
    lines = [f"# config_hash={cfg_hash}", f"# seed={seed}"]
    for key, value in (extra_meta or {}).items():
        lines.append(f"# {key}={value}")
    lines.append(",".join(header))
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, float):
                cells.append(repr(v))
            elif v is None:
                cells.append("")
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_table(path):
    """Read a '#'-annotated table; returns (metadata, header, str rows)."""
    meta = {}
    header = None
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, value = body.split("=", 1)
                meta[key.strip()] = value.strip()
            continue
        if not line.strip():
            continue
        if header is None:
            header = line.split(",")
        else:
            rows.append(line.split(","))
    return meta, header or [], rows


def grid_rows(field):
    """GridField -> sorted (lat_center, lon_center, value, count) rows."""
    rows = []
    for key in sorted(field.cells):
        lat_c, lon_c = field.center(key)
        mean, count = field.cells[key]
        rows.append((lat_c, lon_c, float(mean), count))
    return rows


def save_grid(path, field, seed=0, cfg_hash=""):
    return write_table(
        path,
        ("lat_center", "lon_center", "value", "count"),
        grid_rows(field),
        seed=seed,
        cfg_hash=cfg_hash,
        extra_meta={
            "variable": field.variable,
            "units": field.units,
            "cell_lat": repr(field.cell[0]),
            "cell_lon": repr(field.cell[1]),
        },
    )


def save_cv_report(path, report, cfg_hash=""):
    doc = {"format_version": FORMAT_VERSION, "config_hash": cfg_hash}
    doc.update(report.to_dict())
    Path(path).write_text(canonical_json(doc) + "\n", encoding="utf-8")
    return path
