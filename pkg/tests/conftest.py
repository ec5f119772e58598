import numpy as np
import pytest

from nutricast.features import apply_standardizer, build_feature_matrix, fit_standardizer
from nutricast.ingest import HydroSample
from nutricast.synth import make_synthetic_samples


def samples_from_columns(cols):
    n = len(cols["latitude"])
    return [
        HydroSample(**{name: float(cols[name][i]) for name in cols}) for i in range(n)
    ]


def synthetic_matrix(n=400, seed=0, **noise):
    """Standardized synthetic FeatureMatrix plus its Standardizer.

    Unit-test convenience: the standardizer is fitted on all rows here;
    the train-rows-only protocol is exercised through the CLI tests.
    """
    cols = make_synthetic_samples(n, seed=seed, **noise)
    matrix = build_feature_matrix(samples_from_columns(cols))
    standardizer = fit_standardizer(matrix)
    return apply_standardizer(standardizer, matrix), standardizer


@pytest.fixture
def small_matrix():
    matrix, _ = synthetic_matrix(n=240, seed=7)
    return matrix


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
