"""Feature matrix construction, standardization and data partitioning.

The model consumes a fixed 7-column layout:

    [x_proj, y_proj, pressure, temperature, salinity, oxygen, nitrate]

Positions are projected to the Antarctic polar stereographic plane and
divided by a fixed 1e6 m scale; the five physical columns are
standardized with means and population standard deviations fitted on
training rows only. Labels (phosphate, silicate) ride alongside in
physical umol/kg units and are never standardized, so reported MSEs stay
in physical units. Rows where a label was not measured carry NaN there.
"""

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import (
    DegenerateColumn,
    MissingInput,
    NoLabel,
    NotFitted,
    TooFewRows,
)
from .projection import project_many
from .rng import rng_for
from .validation import as_float_matrix

COLUMNS = ("x_proj", "y_proj", "pressure", "temperature", "salinity", "oxygen", "nitrate")
PHYSICAL_COLUMNS = COLUMNS[2:]
POSITION_SCALE = 1.0e6  # metres; fixed divisor for x_proj/y_proj
TARGETS = ("phosphate", "silicate")


def column_hash(columns=COLUMNS):
    """Short digest of the column order, embedded in file headers."""
    return hashlib.sha256(",".join(columns).encode()).hexdigest()[:16]


@dataclass
class FeatureMatrix:
    """Row-major feature table plus parallel label vectors.

    values is (n, 7) float64; phosphate/silicate are (n,) with NaN where
    the label is absent. row_ids preserve the identity of each row across
    subsetting so per-row random substreams stay stable.
    """

    values: np.ndarray
    phosphate: np.ndarray
    silicate: np.ndarray
    standardized: bool = False
    row_ids: np.ndarray = field(default=None)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(-1, len(COLUMNS))
        n = self.values.shape[0]
        self.phosphate = np.asarray(self.phosphate, dtype=float).reshape(n)
        self.silicate = np.asarray(self.silicate, dtype=float).reshape(n)
        if self.row_ids is None:
            self.row_ids = np.arange(n, dtype=np.int64)
        else:
            self.row_ids = np.asarray(self.row_ids, dtype=np.int64).reshape(n)

    @property
    def n_rows(self):
        return self.values.shape[0]

    def label(self, target):
        if target not in TARGETS:
            raise NoLabel(f"unknown target {target!r}; expected one of {TARGETS}")
        return getattr(self, target)

    def labeled_rows(self, target):
        """Indices of rows where the target was measured."""
        return np.flatnonzero(~np.isnan(self.label(target)))

    def subset(self, indices):
        idx = np.asarray(indices, dtype=np.int64)
        return FeatureMatrix(
            values=self.values[idx],
            phosphate=self.phosphate[idx],
            silicate=self.silicate[idx],
            standardized=self.standardized,
            row_ids=self.row_ids[idx],
        )


def build_feature_matrix(samples):
    """Project positions and assemble the raw (unstandardized) matrix.

    Every sample must carry all seven inputs; a gap here means an
    upstream filter was bypassed and raises MissingInput.
    """
    for i, s in enumerate(samples):
        missing = s.missing_inputs()
        if missing:
            raise MissingInput(f"sample {i} lacks input {missing[0]!r}")
    n = len(samples)
    values = np.empty((n, len(COLUMNS)), dtype=float)
    if n:
        lats = np.array([s.latitude for s in samples])
        lons = np.array([s.longitude for s in samples])
        values[:, 0], values[:, 1] = project_many(lats, lons)
        for j, name in enumerate(PHYSICAL_COLUMNS, start=2):
            values[:, j] = [s.value(name) for s in samples]
    phosphate = np.array([np.nan if s.phosphate is None else s.phosphate for s in samples])
    silicate = np.array([np.nan if s.silicate is None else s.silicate for s in samples])
    return FeatureMatrix(values=values, phosphate=phosphate, silicate=silicate)


class Standardizer(BaseEstimator, TransformerMixin):
    """Per-feature location/scale transform for the 7-column layout.

    The five physical columns are centred on the training mean and scaled
    by the training population standard deviation. The two projected
    position columns are divided by the fixed position_scale instead of
    fitted statistics: a constant divisor keeps them O(1) without tying
    the position encoding to one cruise collection's spatial footprint.
    """

    def __init__(self, position_scale=POSITION_SCALE):
        self.position_scale = position_scale

    def fit(self, X, y=None):
        X = as_float_matrix(X, n_columns=len(COLUMNS))
        if X.shape[0] < 2:
            raise TooFewRows("standardizer needs at least 2 rows")
        phys = X[:, 2:]
        self.means_ = phys.mean(axis=0)
        self.scales_ = phys.std(axis=0)  # population std (divisor n)
        for j, scale in enumerate(self.scales_):
            if scale == 0.0:
                raise DegenerateColumn(f"column {PHYSICAL_COLUMNS[j]!r} has zero variance")
        return self

    def _check_fitted(self):
        if not hasattr(self, "means_"):
            raise NotFitted("Standardizer.fit must run before transform")

    def transform(self, X):
        self._check_fitted()
        X = as_float_matrix(X, n_columns=len(COLUMNS))
        out = np.empty_like(X)
        out[:, :2] = X[:, :2] / self.position_scale
        out[:, 2:] = (X[:, 2:] - self.means_) / self.scales_
        return out

    def inverse_transform(self, X):
        self._check_fitted()
        X = as_float_matrix(X, n_columns=len(COLUMNS))
        out = np.empty_like(X)
        out[:, :2] = X[:, :2] * self.position_scale
        out[:, 2:] = X[:, 2:] * self.scales_ + self.means_
        return out

    def state_hash(self):
        """Digest of the fitted statistics, recorded with trained models."""
        self._check_fitted()
        payload = json.dumps(
            {
                "columns": list(COLUMNS),
                "means": [repr(v) for v in self.means_],
                "scales": [repr(v) for v in self.scales_],
                "position_scale": repr(float(self.position_scale)),
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def to_dict(self):
        self._check_fitted()
        return {
            "position_scale": float(self.position_scale),
            "means": self.means_.tolist(),
            "scales": self.scales_.tolist(),
            "columns": list(COLUMNS),
            "hash": self.state_hash(),
        }

    @classmethod
    def from_dict(cls, d):
        s = cls(position_scale=d["position_scale"])
        s.means_ = np.asarray(d["means"], dtype=float)
        s.scales_ = np.asarray(d["scales"], dtype=float)
        return s


def fit_standardizer(matrix, rows=None):
    """Fit a Standardizer on (a training subset of) a raw FeatureMatrix."""
    X = matrix.values if rows is None else matrix.values[np.asarray(rows, dtype=np.int64)]
    return Standardizer().fit(X)


def apply_standardizer(standardizer, matrix):
    """Standardize a raw matrix; labels pass through untouched."""
    return FeatureMatrix(
        values=standardizer.transform(matrix.values),
        phosphate=matrix.phosphate.copy(),
        silicate=matrix.silicate.copy(),
        standardized=True,
        row_ids=matrix.row_ids.copy(),
    )


@dataclass(frozen=True)
class SplitSpec:
    """Train/test fraction, fold count and the master data-split seed."""

    test_fraction: float = 0.1
    k: int = 10
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError(f"test_fraction {self.test_fraction} outside (0, 1)")
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")


def split_train_test(n, spec):
    """Seeded uniform shuffle into disjoint, covering train/test index sets.

    Test size is round(n * test_fraction) (Python round, i.e. banker's
    rounding at exact halves). Indices are returned sorted; the
    randomness lives entirely in which rows land on each side.
    """
    if n < 10:
        raise TooFewRows(f"need at least 10 rows to split, got {n}")
    n_test = int(round(n * spec.test_fraction))
    perm = rng_for(spec.seed, "train-test-split").permutation(n)
    test = np.sort(perm[:n_test])
    train = np.sort(perm[n_test:])
    return train, test


def kfold_split(train_indices, k, seed):
    """Shuffle train indices into k folds of near-equal size.

    Returns k (train_fold, val_fold) pairs; validation folds are disjoint
    and their union is the whole training set. The first n % k folds get
    the extra row when k does not divide n.
    """
    train_indices = np.asarray(train_indices, dtype=np.int64)
    n = train_indices.size
    if n < k:
        raise TooFewRows(f"need at least k={k} training rows, got {n}")
    perm = rng_for(seed, "kfold").permutation(train_indices)
    base, extra = divmod(n, k)
    folds = []
    start = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        folds.append(np.sort(perm[start : start + size]))
        start += size
    pairs = []
    for i in range(k):
        val = folds[i]
        train = np.sort(np.concatenate([folds[j] for j in range(k) if j != i]))
        pairs.append((train, val))
    return pairs
