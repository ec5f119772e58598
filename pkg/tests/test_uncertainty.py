import inspect

import numpy as np
import pytest

from nutricast.errors import BadSampleCount, TooFewSamples
from nutricast.network import MlpConfig, forward, init_mlp
from nutricast.uncertainty import mc_dropout_predict, summarize_interval


def test_all_equal_samples():
    s = summarize_interval([2.5] * 10)
    assert s.mean == 2.5 and s.std == 0.0
    assert (s.ci_low, s.ci_high) == (2.5, 2.5)


def test_two_point_interval():
    s = summarize_interval([-1.0, 1.0])
    assert s.mean == 0.0
    assert s.std == 1.0  # population std
    assert s.ci_low == pytest.approx(-1.96)
    assert s.ci_high == pytest.approx(1.96)


def test_interval_on_standard_normal_draws():
    # seeded statistical oracle: 10k N(0,1) draws give ~[-1.96, 1.96]
    draws = np.random.default_rng(2024).standard_normal(10_000)
    s = summarize_interval(draws)
    assert s.ci_low == pytest.approx(-1.96, abs=0.05)
    assert s.ci_high == pytest.approx(1.96, abs=0.05)
    assert s.p2_5 == pytest.approx(-1.96, abs=0.08)
    assert s.p97_5 == pytest.approx(1.96, abs=0.08)


def test_too_few_samples():
    with pytest.raises(TooFewSamples):
        summarize_interval([1.0])


def test_std_invariant_under_reordering():
    rng = np.random.default_rng(5)
    samples = rng.normal(size=500)
    a = summarize_interval(samples)
    b = summarize_interval(samples[::-1].copy())
    assert a.std == b.std


def test_default_sample_count_is_100():
    sig = inspect.signature(mc_dropout_predict)
    assert sig.parameters["n_samples"].default == 100


def test_zero_dropout_is_deterministic():
    model = init_mlp(MlpConfig(dropout_p=0.0), seed=1)
    X = np.random.default_rng(0).normal(size=(5, 7))
    out = mc_dropout_predict(model, X, n_samples=100, seed=3)
    evals = forward(model, X)
    for s, e in zip(out, evals):
        assert s.std == 0.0
        assert s.mean == e
        assert s.ci_low == s.ci_high == s.mean


def test_mean_bounded_by_extreme_samples():
    model = init_mlp(MlpConfig(dropout_p=0.2), seed=2)
    X = np.random.default_rng(1).normal(size=(8, 7))
    from nutricast.rng import rng_for
    from nutricast.uncertainty import mc_sample_row

    for i, summary in enumerate(mc_dropout_predict(model, X, n_samples=50, seed=7)):
        samples = mc_sample_row(model, X[i], 50, rng_for(7, f"mc-row-{i}"))
        assert samples.min() <= summary.mean <= samples.max()
        assert summary.mean == pytest.approx(float(samples.mean()))


def test_bad_sample_count():
    model = init_mlp(MlpConfig(), seed=3)
    with pytest.raises(BadSampleCount):
        mc_dropout_predict(model, np.zeros((1, 7)), n_samples=1)


def test_row_order_invariance():
    # per-row substreams: permuting rows permutes results exactly
    model = init_mlp(MlpConfig(dropout_p=0.2), seed=4)
    X = np.random.default_rng(2).normal(size=(12, 7))
    ids = np.arange(12)
    perm = np.random.default_rng(3).permutation(12)
    direct = mc_dropout_predict(model, X, n_samples=40, seed=9, row_ids=ids)
    shuffled = mc_dropout_predict(model, X[perm], n_samples=40, seed=9, row_ids=ids[perm])
    for j, i in enumerate(perm):
        assert shuffled[j] == direct[i]


def test_prefix_property_and_mean_stabilization():
    # a row's sample stream is extended, not reshuffled, by larger
    # n_samples, so means stabilize at the 1/sqrt(n) rate
    model = init_mlp(MlpConfig(dropout_p=0.2), seed=5)
    X = np.random.default_rng(4).normal(size=(40, 7))
    small = mc_dropout_predict(model, X, n_samples=100, seed=11)
    large = mc_dropout_predict(model, X, n_samples=1000, seed=11)
    ok = 0
    for s, l in zip(small, large):
        if abs(s.mean - l.mean) <= 5.0 * l.std / np.sqrt(100):
            ok += 1
    assert ok >= 0.99 * len(small)


def test_median_std_shrinks_with_p():
    X = np.random.default_rng(6).normal(size=(30, 7))
    medians = []
    for p in (0.2, 0.1, 0.05, 0.01):
        model = init_mlp(MlpConfig(dropout_p=p), seed=6)  # same seed -> same weights
        out = mc_dropout_predict(model, X, n_samples=200, seed=13)
        medians.append(float(np.median([s.std for s in out])))
    assert all(a >= b for a, b in zip(medians, medians[1:]))
