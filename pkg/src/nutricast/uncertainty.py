"""Monte-Carlo-dropout inference: predictive mean, spread and interval.

Each row gets n_samples stochastic forward passes with independent
dropout masks; the predictive mean and population standard deviation are
taken over those samples and the canonical 95% interval is the normal
approximation mean +/- 1.96 std. Empirical 2.5/97.5 percentiles are
recorded alongside for auditability (the two coincide only
asymptotically).

Mask streams are derived per row from (seed, row id), so predictions are
independent of batching, row order and parallel schedule, and drawing
more samples extends (never reshuffles) a row's sample sequence.
"""

from dataclasses import dataclass

import numpy as np

from .errors import BadSampleCount, TooFewSamples
from .network import _forward_arrays, draw_mask
from .rng import rng_for
from .validation import as_float_matrix

Z_95 = 1.96


@dataclass(frozen=True)
class UncertaintySummary:
    """Per-row MC statistics in physical umol/kg units."""

    mean: float
    std: float
    ci_low: float
    ci_high: float
    n_samples: int
    p2_5: float
    p97_5: float


def summarize_interval(samples):
    """Normal-approximation 95% interval over one row's MC samples."""
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size < 2:
        raise TooFewSamples(f"need at least 2 samples, got {samples.size}")
    mean = float(samples.mean())
    std = float(samples.std())  # population std, matching the mean estimator
    lo, hi = np.percentile(samples, [2.5, 97.5])
    return UncertaintySummary(
        mean=mean,
        std=std,
        ci_low=mean - Z_95 * std,
        ci_high=mean + Z_95 * std,
        n_samples=int(samples.size),
        p2_5=float(lo),
        p97_5=float(hi),
    )


def mc_sample_row(model, x, n_samples, rng):
    """n_samples masked forward passes for a single feature vector."""
    x = np.asarray(x, dtype=float)
    cfg = model.config
    z1 = x @ model.W1 + model.b1
    a1 = np.maximum(z1, 0.0) if cfg.activation == "relu" else z1
    masks = draw_mask(cfg, n_samples, rng)
    hidden = a1 * masks / (1.0 - cfg.dropout_p)
    return hidden @ model.W2[:, 0] + model.b2[0]


def mc_dropout_predict(model, rows, n_samples=100, seed=0, row_ids=None):
    """Per-row MC-dropout summaries for an (n, 7) standardized matrix.

    A dropout-free model (p = 0) is deterministic: every summary has
    std = 0 and mean equal to the Eval output. row_ids default to the
    row positions; pass stable ids when rows are a subset of a larger
    table so results do not depend on the subsetting.
    """
    if n_samples < 2:
        raise BadSampleCount(f"n_samples must be >= 2, got {n_samples}")
    X = as_float_matrix(rows, n_columns=model.config.input_dim, name="rows")
    n = X.shape[0]
    if row_ids is None:
        row_ids = np.arange(n)
    row_ids = np.asarray(row_ids).ravel()

    if model.config.dropout_p == 0.0:
        means = _forward_arrays(model, X)
        return [
            UncertaintySummary(
                mean=float(m),
                std=0.0,
                ci_low=float(m),
                ci_high=float(m),
                n_samples=n_samples,
                p2_5=float(m),
                p97_5=float(m),
            )
            for m in means
        ]

    summaries = []
    for i in range(n):
        rng = rng_for(seed, f"mc-row-{int(row_ids[i])}")
        samples = mc_sample_row(model, X[i], n_samples, rng)
        summaries.append(summarize_interval(samples))
    return summaries
