"""Fully connected feed-forward networks with hand-written backpropagation.

A network with hidden sizes (k_1, ..., k_p) maps R^(k_0) to R through
affine layers interleaved with a componentwise activation; no activation
follows the final affine map, so the last layer is a plain multilinear
regression on the learned features. Training is mini-batch gradient
descent with momentum, fully determined by the seed in TrainConfig.

Everything here is plain numpy on purpose: the gradients are checked
against central finite differences (:func:`grad_check`) rather than
trusted to a framework.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from ._validation import as_matrix, as_vector, check_same_length
from .errors import DataError, NumericError
from .stats import MetricReport
from .stats import mape as stats_mape
from .stats import mse as stats_mse

__all__ = [
    "Activation",
    "NetworkSpec",
    "Network",
    "TrainConfig",
    "param_count",
    "init_network",
    "forward",
    "forward_batch",
    "predict",
    "loss_mse_batch",
    "backprop",
    "Gradients",
    "grad_check",
    "train",
    "evaluate",
    "network_to_dict",
    "network_from_dict",
    "save_network",
    "load_network",
    "MLPRegressor",
]


class Activation(str, Enum):
    RELU = "relu"
    TANH = "tanh"
    LOGISTIC = "logistic"


def _activate(kind: Activation, z: np.ndarray) -> np.ndarray:
    if kind is Activation.RELU:
        return np.maximum(z, 0.0)
    if kind is Activation.TANH:
        return np.tanh(z)
    # logistic, overflow-safe on both tails
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _activation_grad(kind: Activation, z: np.ndarray) -> np.ndarray:
    # ReLU derivative at exactly 0 is defined as 0; grad_check shares the
    # convention by excluding points near the kink.
    if kind is Activation.RELU:
        return (z > 0).astype(z.dtype)
    if kind is Activation.TANH:
        return 1.0 - np.tanh(z) ** 2
    s = _activate(Activation.LOGISTIC, z)
    return s * (1.0 - s)


@dataclass(frozen=True)
class NetworkSpec:
    """Layer sizes (k_0, ..., k_{p+1}) with scalar output k_{p+1} = 1."""

    layer_sizes: tuple[int, ...]
    activation: Activation = Activation.RELU

    def __post_init__(self) -> None:
        sizes = tuple(int(k) for k in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        if any(k < 1 for k in sizes):
            raise ValueError(f"layer sizes must be positive: {sizes}")
        if sizes[-1] != 1:
            raise ValueError("output layer size must be 1")
        if not isinstance(self.activation, Activation):
            object.__setattr__(self, "activation", Activation(self.activation))

    @property
    def n_hidden_layers(self) -> int:
        return len(self.layer_sizes) - 2


@dataclass
class Network:
    """Weights W_t of shape (k_{t+1}, k_t) and biases b_t of length k_{t+1}.

    x_mean/x_scale hold the input standardization fitted at training time
    (None when training ran on raw inputs); ``predict`` applies them,
    ``forward`` is the raw network function.
    """

    spec: NetworkSpec
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    x_mean: Optional[np.ndarray] = None
    x_scale: Optional[np.ndarray] = None

    def copy(self) -> "Network":
        return Network(
            spec=self.spec,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            x_mean=None if self.x_mean is None else self.x_mean.copy(),
            x_scale=None if self.x_scale is None else self.x_scale.copy(),
        )


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 32
    epochs: int = 400
    momentum: float = 0.9
    seed: int = 0
    input_standardize: bool = True

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be positive")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


def param_count(spec: NetworkSpec) -> tuple[int, int]:
    """(number of weights, number of biases) for the given layer sizes."""
    sizes = spec.layer_sizes
    n_weights = sum(sizes[t] * sizes[t + 1] for t in range(len(sizes) - 1))
    n_biases = sum(sizes[1:])
    return n_weights, n_biases


def init_network(spec: NetworkSpec, seed: int) -> Network:
    """Seeded init: weights uniform on [-s, s] with s = sqrt(6/(fan_in+fan_out)),
    biases zero."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    sizes = spec.layer_sizes
    for t in range(len(sizes) - 1):
        s = np.sqrt(6.0 / (sizes[t] + sizes[t + 1]))
        weights.append(rng.uniform(-s, s, size=(sizes[t + 1], sizes[t])))
        biases.append(np.zeros(sizes[t + 1]))
    return Network(spec=spec, weights=weights, biases=biases)


def _forward_pass(net: Network, X: np.ndarray):
    """All pre-activations Z_t and activations; returns (zs, activations).

    activations[t] is the input to layer t (activations[0] is X itself).
    """
    zs = []
    activations = [X]
    a = X
    last = len(net.weights) - 1
    for t, (W, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ W.T + b
        zs.append(z)
        if t < last:
            a = _activate(net.spec.activation, z)
            activations.append(a)
    return zs, activations


def forward_batch(net: Network, X) -> np.ndarray:
    """Raw network outputs for each row of X (no input standardization)."""
    X = as_matrix(X)
    if X.shape[1] != net.spec.layer_sizes[0]:
        raise ValueError(
            f"input width {X.shape[1]} does not match k_0 = {net.spec.layer_sizes[0]}"
        )
    zs, _ = _forward_pass(net, X)
    return zs[-1][:, 0]


def forward(net: Network, x) -> float:
    """Raw network output for a single input vector."""
    return float(forward_batch(net, np.asarray(x, dtype=float).reshape(1, -1))[0])


def predict(net: Network, X) -> np.ndarray:
    """Network outputs with the stored input standardization applied."""
    X = as_matrix(X)
    if net.x_mean is not None:
        X = (X - net.x_mean) / net.x_scale
    return forward_batch(net, X)


def loss_mse_batch(net: Network, X, y) -> float:
    X, y = as_matrix(X), as_vector(y, "y")
    check_same_length(X, y)
    if len(y) == 0:
        raise DataError("empty batch")
    out = forward_batch(net, X)
    # overflow to inf is fine here; train() turns it into a divergence error
    with np.errstate(over="ignore", invalid="ignore"):
        return float(np.mean((out - y) ** 2))


@dataclass
class Gradients:
    weights: list[np.ndarray]
    biases: list[np.ndarray]


def backprop(net: Network, X, y) -> Gradients:
    """Exact gradient of loss_mse_batch with respect to every weight and bias."""
    X, y = as_matrix(X), as_vector(y, "y")
    check_same_length(X, y)
    n = len(y)
    if n == 0:
        raise DataError("empty batch")
    zs, activations = _forward_pass(net, X)

    delta = 2.0 * (zs[-1] - y[:, None]) / n
    grad_w = [np.empty(0)] * len(net.weights)
    grad_b = [np.empty(0)] * len(net.biases)
    for t in range(len(net.weights) - 1, -1, -1):
        grad_w[t] = delta.T @ activations[t]
        grad_b[t] = delta.sum(axis=0)
        if t > 0:
            da = delta @ net.weights[t]
            delta = da * _activation_grad(net.spec.activation, zs[t - 1])
    return Gradients(weights=grad_w, biases=grad_b)


def grad_check(net: Network, X, y, eps: float = 1e-5) -> float:
    """Max relative deviation between backprop and central finite differences.

    For ReLU networks, rows whose hidden pre-activations come within
    10*eps of the kink at 0 are dropped from the batch first, so both
    sides see a locally smooth loss.
    """
    if not 1e-7 <= eps <= 1e-3:
        raise ValueError("eps must lie in [1e-7, 1e-3]")
    X, y = as_matrix(X), as_vector(y, "y")
    check_same_length(X, y)
    if net.spec.activation is Activation.RELU and net.spec.n_hidden_layers > 0:
        zs, _ = _forward_pass(net, X)
        margin = np.ones(len(y), dtype=bool)
        for z in zs[:-1]:
            margin &= np.all(np.abs(z) > 10.0 * eps, axis=1)
        if not margin.any():
            raise DataError("every row sits within 10*eps of a ReLU kink")
        X, y = X[margin], y[margin]

    analytic = backprop(net, X, y)
    work = net.copy()

    def loss() -> float:
        return loss_mse_batch(work, X, y)

    worst = 0.0
    for params, grads in (
        (work.weights, analytic.weights),
        (work.biases, analytic.biases),
    ):
        for arr, g in zip(params, grads):
            flat, gflat = arr.ravel(), g.ravel()
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + eps
                up = loss()
                flat[i] = orig - eps
                down = loss()
                flat[i] = orig
                numeric = (up - down) / (2.0 * eps)
                denom = max(1e-12, abs(gflat[i]) + abs(numeric))
                worst = max(worst, abs(gflat[i] - numeric) / denom)
    return worst


def train(spec: NetworkSpec, X, y, cfg: TrainConfig = TrainConfig()) -> tuple[Network, list[float]]:
    """Mini-batch gradient descent with momentum; returns (network, loss history).

    loss_history holds the full-training-set MSE after each epoch. The run
    is fully determined by cfg: initialization uses cfg.seed and the
    per-epoch shuffles use a stream derived from it.
    """
    X, y = as_matrix(X), as_vector(y, "y")
    check_same_length(X, y)
    n = len(y)
    if n < cfg.batch_size:
        raise DataError(f"need at least batch_size={cfg.batch_size} rows, got {n}")
    if X.shape[1] != spec.layer_sizes[0]:
        raise ValueError(
            f"input width {X.shape[1]} does not match k_0 = {spec.layer_sizes[0]}"
        )

    net = init_network(spec, cfg.seed)
    if cfg.input_standardize:
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        scale = np.where(std > 1e-12, std, 1.0)
        net.x_mean, net.x_scale = mean, scale
        X = (X - mean) / scale

    vel_w = [np.zeros_like(w) for w in net.weights]
    vel_b = [np.zeros_like(b) for b in net.biases]
    shuffle_rng = np.random.default_rng([cfg.seed, 1])

    history = []
    for epoch in range(cfg.epochs):
        order = shuffle_rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            grads = backprop(net, X[idx], y[idx])
            for t in range(len(net.weights)):
                vel_w[t] = cfg.momentum * vel_w[t] - cfg.learning_rate * grads.weights[t]
                vel_b[t] = cfg.momentum * vel_b[t] - cfg.learning_rate * grads.biases[t]
                net.weights[t] += vel_w[t]
                net.biases[t] += vel_b[t]
        epoch_loss = loss_mse_batch(net, X, y)
        if not np.isfinite(epoch_loss):
            raise NumericError(
                f"training diverged at epoch {epoch + 1} (loss is not finite); "
                "try a smaller learning rate"
            )
        history.append(epoch_loss)
    return net, history


def evaluate(net: Network, X_test, y_test) -> MetricReport:
    """Test MSE and, when no target is zero, test MAPE (percent).

    A zero in the targets makes the MAPE absent rather than an error,
    matching how the result tables degrade.
    """
    X_test, y_test = as_matrix(X_test), as_vector(y_test, "y_test")
    check_same_length(X_test, y_test)
    preds = predict(net, X_test)
    report_mape = None
    if len(y_test) and not np.any(y_test == 0):
        report_mape = stats_mape(preds, y_test)
    return MetricReport(mse=stats_mse(preds, y_test), mape=report_mape)


# ---------------------------------------------------------------------------
# serialization (lossless: json floats round-trip via repr)


def network_to_dict(net: Network) -> dict:
    return {
        "layer_sizes": list(net.spec.layer_sizes),
        "activation": net.spec.activation.value,
        "weights": [w.tolist() for w in net.weights],
        "biases": [b.tolist() for b in net.biases],
        "standardization": None
        if net.x_mean is None
        else {"mean": net.x_mean.tolist(), "scale": net.x_scale.tolist()},
    }


def network_from_dict(obj: dict) -> Network:
    spec = NetworkSpec(tuple(obj["layer_sizes"]), Activation(obj["activation"]))
    net = Network(
        spec=spec,
        weights=[np.asarray(w, dtype=float) for w in obj["weights"]],
        biases=[np.asarray(b, dtype=float) for b in obj["biases"]],
    )
    std = obj.get("standardization")
    if std is not None:
        net.x_mean = np.asarray(std["mean"], dtype=float)
        net.x_scale = np.asarray(std["scale"], dtype=float)
    expected = [(spec.layer_sizes[t + 1], spec.layer_sizes[t]) for t in range(len(net.weights))]
    if [w.shape for w in net.weights] != expected:
        raise ValueError("weight shapes inconsistent with layer_sizes")
    return net


def save_network(net: Network, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(network_to_dict(net), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_network(path) -> Network:
    with open(path, encoding="utf-8") as fh:
        return network_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# sklearn-style front end


class MLPRegressor(BaseEstimator, RegressorMixin):
    """Scalar-output MLP with the estimator interface.

    Thin wrapper over :func:`train`/:func:`predict` so the network slots
    into sklearn pipelines and model selection. All hyperparameters are
    recorded verbatim; the fitted network is exposed as ``network_``.
    """

    def __init__(
        self,
        hidden_layer_sizes=(100, 100),
        activation="relu",
        learning_rate=1e-3,
        batch_size=32,
        epochs=400,
        momentum=0.9,
        seed=0,
        standardize=True,
    ):
        self.hidden_layer_sizes = hidden_layer_sizes
        self.activation = activation
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.momentum = momentum
        self.seed = seed
        self.standardize = standardize

    def _config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            epochs=self.epochs,
            momentum=self.momentum,
            seed=self.seed,
            input_standardize=self.standardize,
        )

    def fit(self, X, y):
        X, y = as_matrix(X), as_vector(y, "y")
        spec = NetworkSpec(
            (X.shape[1], *tuple(int(k) for k in self.hidden_layer_sizes), 1),
            Activation(self.activation),
        )
        self.network_, self.loss_history_ = train(spec, X, y, self._config())
        return self

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "network_"):
            raise RuntimeError("MLPRegressor is not fitted yet; call fit first")
        return predict(self.network_, X)
