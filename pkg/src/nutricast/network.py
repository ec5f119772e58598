"""Minimal dense-network engine with hand-rolled backpropagation.

Two architectures:

* hidden_units = 0: an affine map y = x.W + b (linear regression trained
  by gradient descent), identity activation, no dropout;
* hidden_units > 0: one hidden layer, ReLU (or identity) activation and
  inverted dropout on the hidden units, y = W2.(mask*relu(W1.x+b1)/(1-p)) + b2.

Inverted dropout scales the surviving units by 1/(1-p) during masked
passes, so for every input row an Eval (no-dropout) pass equals the
expectation of the masked output over masks. The ReLU subgradient at
exactly 0 is taken as 0.

Gradients are analytic (see _backprop) and verified against central
finite differences by gradient_check; the optimizer is Adam with the
conventional (0.9, 0.999, 1e-8) constants.
"""

import copy
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .errors import (
    BadConfig,
    EmptyBatch,
    LengthMismatch,
    NonFiniteGradient,
    NotFitted,
)
from .rng import rng_for
from .validation import as_float_matrix, as_float_vector

ACTIVATIONS = ("identity", "relu")


@dataclass(frozen=True)
class MlpConfig:
    """Architecture of the regressor.

    hidden_units = 0 is the linear model and then requires identity
    activation and zero dropout; the default is the 64-unit ReLU network
    with p = 0.2 dropout.
    """

    input_dim: int = 7
    hidden_units: int = 64
    activation: str = "relu"
    dropout_p: float = 0.2
    output_dim: int = 1

    def __post_init__(self):
        if self.input_dim < 1:
            raise BadConfig(f"input_dim must be >= 1, got {self.input_dim}")
        if self.output_dim != 1:
            raise BadConfig("only single-output models are supported")
        if self.activation not in ACTIVATIONS:
            raise BadConfig(f"activation must be one of {ACTIVATIONS}")
        if not 0.0 <= self.dropout_p < 1.0:
            raise BadConfig(f"dropout_p must lie in [0, 1), got {self.dropout_p}")
        if self.hidden_units < 0:
            raise BadConfig(f"hidden_units must be >= 0, got {self.hidden_units}")
        if self.hidden_units == 0 and self.activation != "identity":
            raise BadConfig("a 0-hidden-unit model must use identity activation")
        if self.hidden_units == 0 and self.dropout_p != 0.0:
            raise BadConfig("a 0-hidden-unit model cannot carry dropout")

    @classmethod
    def linear(cls, input_dim=7):
        return cls(input_dim=input_dim, hidden_units=0, activation="identity", dropout_p=0.0)

    def to_dict(self):
        return {
            "input_dim": self.input_dim,
            "hidden_units": self.hidden_units,
            "activation": self.activation,
            "dropout_p": self.dropout_p,
            "output_dim": self.output_dim,
        }


class ForwardMode(Enum):
    EVAL = "eval"                # deterministic, no dropout
    TRAIN_SAMPLE = "train"      # fresh mask, inverted scaling
    MC_SAMPLE = "mc"            # fresh mask at inference time


@dataclass
class MlpModel:
    """Weights and biases; W2/b2 are None for the linear model.

    standardizer_hash pins the feature standardizer the model was trained
    with, once the pipeline records it.
    """

    config: MlpConfig
    init_seed: int
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray | None = None
    b2: np.ndarray | None = None
    standardizer_hash: str | None = None

    def parameters(self):
        """Named parameter blocks in a fixed order."""
        blocks = [("W1", self.W1), ("b1", self.b1)]
        if self.W2 is not None:
            blocks += [("W2", self.W2), ("b2", self.b2)]
        return blocks

    def copy(self):
        return copy.deepcopy(self)


def init_mlp(config, seed):
    """Seeded weight initialization; biases start at zero.

    Layers feeding ReLU get He-uniform limits sqrt(6/fan_in); identity-
    activated layers (the linear model and the output layer) get
    Xavier-uniform limits sqrt(6/(fan_in+fan_out)). Deterministic per
    seed: the same seed yields a bit-identical model.
    """
    rng = rng_for(seed, "init")
    d = config.input_dim
    h = config.hidden_units
    if h == 0:
        limit = np.sqrt(6.0 / (d + 1))
        W1 = rng.uniform(-limit, limit, size=(d, 1))
        return MlpModel(config=config, init_seed=seed, W1=W1, b1=np.zeros(1))
    if config.activation == "relu":
        limit1 = np.sqrt(6.0 / d)
    else:
        limit1 = np.sqrt(6.0 / (d + h))
    W1 = rng.uniform(-limit1, limit1, size=(d, h))
    limit2 = np.sqrt(6.0 / (h + 1))
    W2 = rng.uniform(-limit2, limit2, size=(h, 1))
    return MlpModel(
        config=config, init_seed=seed, W1=W1, b1=np.zeros(h), W2=W2, b2=np.zeros(1)
    )


def _activate(z, activation):
    return np.maximum(z, 0.0) if activation == "relu" else z


def draw_mask(config, n_rows, rng):
    """Fresh per-sample Bernoulli keep-mask, shape (n_rows, hidden)."""
    return (rng.random((n_rows, config.hidden_units)) >= config.dropout_p).astype(float)


def _forward_arrays(model, X, mask=None):
    """Forward pass on a validated (n, d) batch; mask is (n, h) or None."""
    cfg = model.config
    if cfg.hidden_units == 0:
        return X @ model.W1[:, 0] + model.b1[0]
    Z1 = X @ model.W1 + model.b1
    A1 = _activate(Z1, cfg.activation)
    H = A1 if mask is None else A1 * mask / (1.0 - cfg.dropout_p)
    return H @ model.W2[:, 0] + model.b2[0]


def forward(model, x, mode=ForwardMode.EVAL, rng=None):
    """Run the network on one 7-vector or an (n, 7) batch.

    EVAL is deterministic and ignores rng; TRAIN_SAMPLE and MC_SAMPLE draw
    one fresh dropout mask per sample (a no-op when dropout_p = 0). A
    single input vector returns a float, a batch returns an (n,) array.
    """
    single = np.asarray(x).ndim == 1
    X = as_float_matrix(x, n_columns=model.config.input_dim, name="x")
    mask = None
    if mode is not ForwardMode.EVAL and model.config.dropout_p > 0.0:
        if rng is None:
            raise ValueError(f"mode {mode.value!r} needs an rng when dropout_p > 0")
        mask = draw_mask(model.config, X.shape[0], rng)
    y = _forward_arrays(model, X, mask)
    return float(y[0]) if single else y


def loss_mse(pred, target):
    """Mean squared error between equal-length vectors."""
    pred = as_float_vector(pred, "pred")
    target = as_float_vector(target, "target")
    if pred.size != target.size:
        raise LengthMismatch(f"pred has {pred.size} entries, target {target.size}")
    if pred.size == 0:
        raise EmptyBatch("loss over an empty batch is undefined")
    diff = pred - target
    return float(diff @ diff / diff.size)


def _backprop(model, X, y, mask=None):
    """Analytic gradients of the batch MSE; returns (grads, loss).

    Gradients flow through the frozen mask and the activation; with
    inverted dropout the 1/(1-p) factor appears in both the forward
    hidden values and the backward path.
    """
    cfg = model.config
    n = X.shape[0]
    if cfg.hidden_units == 0:
        yhat = X @ model.W1[:, 0] + model.b1[0]
        g = 2.0 * (yhat - y) / n
        grads = {"W1": (X.T @ g).reshape(-1, 1), "b1": np.array([g.sum()])}
        return grads, float((yhat - y) @ (yhat - y) / n)
    Z1 = X @ model.W1 + model.b1
    A1 = _activate(Z1, cfg.activation)
    scale = 1.0 / (1.0 - cfg.dropout_p)
    H = A1 if mask is None else A1 * mask * scale
    yhat = H @ model.W2[:, 0] + model.b2[0]
    g = 2.0 * (yhat - y) / n
    dW2 = (H.T @ g).reshape(-1, 1)
    db2 = np.array([g.sum()])
    dH = np.outer(g, model.W2[:, 0])
    dA1 = dH if mask is None else dH * mask * scale
    dZ1 = dA1 * (Z1 > 0.0) if cfg.activation == "relu" else dA1
    grads = {"W1": X.T @ dZ1, "b1": dZ1.sum(axis=0), "W2": dW2, "b2": db2}
    return grads, float((yhat - y) @ (yhat - y) / n)


@dataclass
class AdamState:
    """First/second moment accumulators, one pair per parameter block."""

    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    @classmethod
    def for_model(cls, model):
        state = cls()
        for name, p in model.parameters():
            state.m[name] = np.zeros_like(p)
            state.v[name] = np.zeros_like(p)
        return state


def grad_step(model, batch, lr, state, rng=None, beta1=0.9, beta2=0.999, eps=1e-8):
    """One Adam update on a batch; returns (model, pre-update loss).

    Draws one fresh dropout mask per sample when the model carries
    dropout (rng required then). The model's arrays are updated in place.
    """
    X, y = batch
    X = as_float_matrix(X, n_columns=model.config.input_dim, name="X")
    y = as_float_vector(y)
    if X.shape[0] == 0:
        raise EmptyBatch("cannot step on an empty batch")
    if X.shape[0] != y.size:
        raise LengthMismatch(f"batch has {X.shape[0]} rows but {y.size} targets")
    mask = None
    if model.config.dropout_p > 0.0:
        if rng is None:
            raise ValueError("grad_step needs an rng when dropout_p > 0")
        mask = draw_mask(model.config, X.shape[0], rng)
    grads, loss = _backprop(model, X, y, mask)
    state.t += 1
    params = dict(model.parameters())
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient(f"non-finite gradient in block {name!r}")
        state.m[name] = beta1 * state.m[name] + (1.0 - beta1) * g
        state.v[name] = beta2 * state.v[name] + (1.0 - beta2) * g * g
        m_hat = state.m[name] / (1.0 - beta1 ** state.t)
        v_hat = state.v[name] / (1.0 - beta2 ** state.t)
        params[name] -= lr * m_hat / (np.sqrt(v_hat) + eps)
    return model, loss


def gradient_check(model, batch, mask=None, eps=1e-5):
    """Max relative error between analytic and central-difference gradients.

    The dropout mask is frozen across both routes. Relative error per
    parameter is |ga - gn| / max(1e-12, |ga| + |gn|); the max over all
    parameters is returned.
    """
    X, y = batch
    X = as_float_matrix(X, n_columns=model.config.input_dim, name="X")
    y = as_float_vector(y)
    grads, _ = _backprop(model, X, y, mask)

    def batch_loss():
        yhat = _forward_arrays(model, X, mask)
        return float((yhat - y) @ (yhat - y) / y.size)

    worst = 0.0
    for name, p in model.parameters():
        ga = grads[name]
        flat = p.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            up = batch_loss()
            flat[i] = orig - eps
            down = batch_loss()
            flat[i] = orig
            gn = (up - down) / (2.0 * eps)
            g = ga.reshape(-1)[i]
            err = abs(g - gn) / max(1e-12, abs(g) + abs(gn))
            worst = max(worst, err)
    return worst


@dataclass(frozen=True)
class TrainParams:
    """Optimization knobs; the defaults are the pipeline's defaults.

    patience is measured in epochs without validation improvement; None
    disables early stopping (the loop then always runs max_epochs).
    """

    learning_rate: float = 1e-3
    batch_size: int = 256
    max_epochs: int = 200
    patience: int | None = 20

    def to_dict(self):
        return {
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "max_epochs": self.max_epochs,
            "patience": self.patience,
        }


@dataclass
class TrainHistory:
    """Per-epoch validation trace and where early stopping landed."""

    val_mse: list
    best_epoch: int
    epochs_run: int


def fit_mlp(model, X, y, X_val=None, y_val=None, params=None, seed=0):
    """Mini-batch Adam training with optional early stopping.

    Shuffling and dropout masks draw from streams derived from seed, so
    training is bit-reproducible. When validation data is given, the
    epoch with the lowest validation MSE is kept (its weights are
    restored at the end) and training stops after `patience` epochs
    without improvement.
    """
    params = params or TrainParams()
    X = as_float_matrix(X, n_columns=model.config.input_dim, name="X")
    y = as_float_vector(y)
    if X.shape[0] == 0:
        raise EmptyBatch("cannot fit on an empty training set")
    shuffle_rng = rng_for(seed, "epoch-shuffle")
    mask_rng = rng_for(seed, "dropout-masks")
    state = AdamState.for_model(model)

    track = X_val is not None and y_val is not None
    if track:
        X_val = as_float_matrix(X_val, n_columns=model.config.input_dim, name="X_val")
        y_val = as_float_vector(y_val, "y_val")

    best_mse = np.inf
    best_weights = None
    best_epoch = -1
    history = []
    epochs_run = 0
    n = X.shape[0]
    for epoch in range(params.max_epochs):
        epochs_run = epoch + 1
        perm = shuffle_rng.permutation(n)
        for start in range(0, n, params.batch_size):
            idx = perm[start : start + params.batch_size]
            grad_step(model, (X[idx], y[idx]), params.learning_rate, state, mask_rng)
        if not track:
            continue
        val_mse = loss_mse(_forward_arrays(model, X_val), y_val)
        history.append(val_mse)
        if val_mse < best_mse:
            best_mse = val_mse
            best_weights = {name: p.copy() for name, p in model.parameters()}
            best_epoch = epoch
        elif params.patience is not None and epoch - best_epoch >= params.patience:
            break
    if best_weights is not None:
        for name, p in model.parameters():
            p[...] = best_weights[name]
    return model, TrainHistory(val_mse=history, best_epoch=best_epoch, epochs_run=epochs_run)


class MlpRegressor(BaseEstimator, RegressorMixin):
    """sklearn-style front end over the functional engine.

    Parameters mirror MlpConfig and TrainParams; fit accepts an optional
    validation set for early stopping. The fitted network lives in
    model_.
    """

    def __init__(
        self,
        hidden_units=64,
        activation="relu",
        dropout_p=0.2,
        learning_rate=1e-3,
        batch_size=256,
        max_epochs=200,
        patience=20,
        seed=0,
    ):
        self.hidden_units = hidden_units
        self.activation = activation
        self.dropout_p = dropout_p
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.patience = patience
        self.seed = seed

    def _config(self, n_features):
        return MlpConfig(
            input_dim=n_features,
            hidden_units=self.hidden_units,
            activation=self.activation,
            dropout_p=self.dropout_p,
        )

    def _params(self):
        return TrainParams(
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            max_epochs=self.max_epochs,
            patience=self.patience,
        )

    def fit(self, X, y, X_val=None, y_val=None):
        X = as_float_matrix(X, name="X")
        model = init_mlp(self._config(X.shape[1]), self.seed)
        self.model_, self.history_ = fit_mlp(
            model, X, y, X_val=X_val, y_val=y_val, params=self._params(), seed=self.seed
        )
        return self

    def predict(self, X):
        if not hasattr(self, "model_"):
            raise NotFitted("MlpRegressor.fit must run before predict")
        X = as_float_matrix(X, n_columns=self.model_.config.input_dim, name="X")
        return _forward_arrays(self.model_, X)
