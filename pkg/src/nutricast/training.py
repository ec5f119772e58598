"""Cross-validated training, model selection and baseline comparison.

Protocol: shuffle the rows 9:1 into train/test, build 10 folds over the
train side, fit one model per fold on the fold complement, keep the fold
with the lowest validation MSE (ties break to the lowest fold index) and
evaluate that single model once on the held-out test rows. The selected
model is not retrained on train+validation. All MSEs are in physical
(umol/kg)^2 units because labels are never standardized.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import EmptySubset, NoLabel
from .features import kfold_split, split_train_test
from .network import MlpConfig, TrainParams, _forward_arrays, fit_mlp, init_mlp, loss_mse
from .rng import derive_seed


@dataclass
class CvReport:
    """Everything needed to reproduce and audit one CV run.

    wall_clock_seconds is informational only and is excluded from the
    serialized report so that repeated runs with one seed are
    byte-identical.
    """

    target: str
    fold_val_mse: list
    selected_fold: int
    test_mse: float
    config: dict
    train_params: dict
    k: int
    test_fraction: float
    seed: int
    n_rows: int
    n_train: int
    n_test: int
    train_indices: np.ndarray
    test_indices: np.ndarray
    wall_clock_seconds: float

    def to_dict(self):
        """Deterministic serializable form (timing deliberately omitted)."""
        return {
            "target": self.target,
            "fold_val_mse": [float(v) for v in self.fold_val_mse],
            "selected_fold": int(self.selected_fold),
            "test_mse": float(self.test_mse),
            "config": self.config,
            "train_params": self.train_params,
            "k": self.k,
            "test_fraction": self.test_fraction,
            "seed": self.seed,
            "n_rows": self.n_rows,
            "n_train": self.n_train,
            "n_test": self.n_test,
        }


def evaluate_mse(model, matrix, target, rows=None):
    """Eval-mode MSE of a model on (a subset of) a labeled matrix."""
    sub = matrix if rows is None else matrix.subset(rows)
    if sub.n_rows == 0:
        raise EmptySubset("cannot evaluate on an empty subset")
    y = sub.label(target)
    if np.isnan(y).any():
        raise NoLabel(f"{int(np.isnan(y).sum())} rows lack the {target!r} label")
    return loss_mse(_forward_arrays(model, sub.values), y)


def cross_validate_train(matrix, target, config, spec, params=None, n_workers=1):
    """k-fold CV on the train split; returns (selected model, CvReport).

    Every row of `matrix` must carry the target label (filter with
    matrix.labeled_rows first if needed). The data split comes from
    spec.seed; per-fold initialization and batch shuffling draw from
    seeds derived from (spec.seed, target, fold), so one master seed
    reproduces the whole run bit-for-bit. Folds are independent and may
    train on up to n_workers threads; results are assembled in fold
    order, so the report does not depend on scheduling.
    """
    params = params or TrainParams()
    t0 = time.perf_counter()
    y_all = matrix.label(target)
    if np.isnan(y_all).any():
        raise NoLabel(f"{int(np.isnan(y_all).sum())} rows lack the {target!r} label")

    train_idx, test_idx = split_train_test(matrix.n_rows, spec)
    folds = kfold_split(train_idx, spec.k, derive_seed(spec.seed, "fold-assignment"))
    X = matrix.values

    def run_fold(i):
        tr, va = folds[i]
        model = init_mlp(config, derive_seed(spec.seed, f"{target}:fold{i}:init"))
        model, _ = fit_mlp(
            model,
            X[tr],
            y_all[tr],
            X_val=X[va],
            y_val=y_all[va],
            params=params,
            seed=derive_seed(spec.seed, f"{target}:fold{i}:train"),
        )
        return model, loss_mse(_forward_arrays(model, X[va]), y_all[va])

    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=min(n_workers, spec.k)) as pool:
            results = list(pool.map(run_fold, range(spec.k)))
    else:
        results = [run_fold(i) for i in range(spec.k)]
    models = [m for m, _ in results]
    fold_val_mse = [v for _, v in results]

    selected = int(np.argmin(fold_val_mse))  # argmin takes the lowest index on ties
    best = models[selected]
    test_mse = evaluate_mse(best, matrix, target, rows=test_idx)

    report = CvReport(
        target=target,
        fold_val_mse=fold_val_mse,
        selected_fold=selected,
        test_mse=test_mse,
        config=config.to_dict(),
        train_params=params.to_dict(),
        k=spec.k,
        test_fraction=spec.test_fraction,
        seed=spec.seed,
        n_rows=matrix.n_rows,
        n_train=int(train_idx.size),
        n_test=int(test_idx.size),
        train_indices=train_idx,
        test_indices=test_idx,
        wall_clock_seconds=time.perf_counter() - t0,
    )
    return best, report


def train_linear_baseline(matrix, target, spec, params=None):
    """Same CV protocol with the 0-hidden-unit (linear) configuration."""
    config = MlpConfig.linear(input_dim=matrix.values.shape[1])
    return cross_validate_train(matrix, target, config, spec, params=params)
