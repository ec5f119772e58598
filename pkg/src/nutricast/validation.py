"""Small input-validation helpers shared by the estimators."""

import numpy as np

from .errors import NonFiniteInput, ShapeMismatch


def as_float_matrix(X, n_columns=None, name="X"):
    """Coerce to a 2-D float64 array, checking width and finiteness."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise ShapeMismatch(f"{name} must be 2-D, got shape {X.shape}")
    if n_columns is not None and X.shape[1] != n_columns:
        raise ShapeMismatch(f"{name} must have {n_columns} columns, got {X.shape[1]}")
    if not np.all(np.isfinite(X)):
        raise NonFiniteInput(f"{name} contains non-finite values")
    return X


def as_float_vector(v, name="y"):
    v = np.asarray(v, dtype=float).ravel()
    if not np.all(np.isfinite(v)):
        raise NonFiniteInput(f"{name} contains non-finite values")
    return v
