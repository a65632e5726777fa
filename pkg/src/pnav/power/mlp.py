"""Learned motor-power predictor: a small MLP trained by full-batch gradient descent.

Architecture: 4 inputs (v, w, v_prev, w_prev) -> two tanh hidden layers ->
1 linear output, with z-score normalization on inputs and target. Predictions
are clamped at 0 W. Training, prediction, and persistence are all
deterministic given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .plant import MotorCommandWindow

MODEL_HEADER = "pnav-motor-model v1"


class TrainingDivergedError(RuntimeError):
    """Raised when the training loss stops being finite."""


@dataclass
class MotorPowerModel:
    weights: list[np.ndarray]   # one (n_in, n_out) matrix per layer
    biases: list[np.ndarray]    # one (n_out,) vector per layer
    x_mean: np.ndarray
    x_std: np.ndarray
    y_mean: float
    y_std: float

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def _forward_normalized(self, Xn: np.ndarray) -> np.ndarray:
        h = Xn
        for W, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.tanh(h @ W + b)
        return (h @ self.weights[-1] + self.biases[-1])[:, 0]

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        """Predicted watts for rows of (v, w, v_prev, w_prev), clamped at 0."""
        X = np.asarray(X, dtype=float)
        Xn = (X - self.x_mean) / self.x_std
        return np.maximum(0.0, self._forward_normalized(Xn) * self.y_std + self.y_mean)

    def predict(self, cmd: MotorCommandWindow) -> float:
        return float(self.predict_batch(np.array([cmd.features()]))[0])


def predict_motor_power(model: MotorPowerModel, cmd: MotorCommandWindow) -> float:
    return model.predict(cmd)


def _init_model(sizes: list[int], X: np.ndarray, y: np.ndarray, seed: int) -> MotorPowerModel:
    rng = np.random.default_rng(seed)
    weights = [
        rng.normal(0.0, np.sqrt(1.0 / sizes[i]), (sizes[i], sizes[i + 1]))
        for i in range(len(sizes) - 1)
    ]
    biases = [np.zeros(sizes[i + 1]) for i in range(len(sizes) - 1)]
    x_mean = X.mean(axis=0)
    x_std = X.std(axis=0)
    x_std[x_std < 1e-12] = 1.0
    y_std = float(y.std())
    if y_std < 1e-12:
        y_std = 1.0
    return MotorPowerModel(weights, biases, x_mean, x_std, float(y.mean()), y_std)


def mse_loss_and_grads(
    model: MotorPowerModel, Xn: np.ndarray, yn: np.ndarray
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """MSE loss in normalized space plus gradients w.r.t. every weight and bias."""
    n = Xn.shape[0]
    acts = [Xn]
    h = Xn
    for W, b in zip(model.weights[:-1], model.biases[:-1]):
        h = np.tanh(h @ W + b)
        acts.append(h)
    out = (h @ model.weights[-1] + model.biases[-1])[:, 0]
    err = out - yn
    loss = float(np.mean(err * err))

    w_grads: list[np.ndarray] = [np.empty(0)] * len(model.weights)
    b_grads: list[np.ndarray] = [np.empty(0)] * len(model.biases)
    delta = (2.0 / n) * err[:, None]
    for layer in range(len(model.weights) - 1, -1, -1):
        w_grads[layer] = acts[layer].T @ delta
        b_grads[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ model.weights[layer].T) * (1.0 - acts[layer] * acts[layer])
    return loss, w_grads, b_grads


def train_motor_model(
    dataset: tuple[np.ndarray, np.ndarray],
    epochs: int = 2000,
    learning_rate: float = 0.2,
    seed: int = 0,
    hidden: int = 16,
    momentum: float = 0.9,
) -> MotorPowerModel:
    """Fit the MLP to (features, watts) pairs by full-batch gradient descent.

    Heavy-ball momentum is on by default; it roughly halves the epochs needed
    for a given accuracy without changing the full-batch scheme.
    """
    X, y = dataset
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[1] != 4:
        raise ValueError("features must be an (n, 4) array of (v, w, v_prev, w_prev)")
    if X.shape[0] == 0:
        raise ValueError("training dataset is empty")
    if y.shape != (X.shape[0],):
        raise ValueError("targets must be an (n,) array matching the features")
    if np.any(y < 0):
        raise ValueError("power targets must be non-negative")

    model = _init_model([4, hidden, hidden, 1], X, y, seed)
    Xn = (X - model.x_mean) / model.x_std
    yn = (y - model.y_mean) / model.y_std
    vel_w = [np.zeros_like(W) for W in model.weights]
    vel_b = [np.zeros_like(b) for b in model.biases]
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(epochs):
            loss, w_grads, b_grads = mse_loss_and_grads(model, Xn, yn)
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"loss became non-finite at epoch {epoch}; lower the learning rate"
                )
            for i in range(len(model.weights)):
                vel_w[i] = momentum * vel_w[i] - learning_rate * w_grads[i]
                vel_b[i] = momentum * vel_b[i] - learning_rate * b_grads[i]
                model.weights[i] += vel_w[i]
                model.biases[i] += vel_b[i]
    return model


def regression_metrics(y_true: np.ndarray, y_pred: np.ndarray) -> dict[str, float]:
    """R^2, MSE, and mean accuracy (1 - mean|err| / mean truth)."""
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    resid = y_pred - y_true
    ss_res = float(np.sum(resid * resid))
    ss_tot = float(np.sum((y_true - y_true.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)
    mse = float(np.mean(resid * resid))
    mean_true = float(np.mean(y_true))
    accuracy = 1.0 - float(np.mean(np.abs(resid))) / mean_true if mean_true > 0 else 0.0
    return {"r2": r2, "mse": mse, "accuracy": accuracy}


# -- persistence --------------------------------------------------------------


def _fmt(values: np.ndarray) -> str:
    return " ".join(repr(float(v)) for v in np.asarray(values).ravel())


def save_motor_model(model: MotorPowerModel, path) -> None:
    lines = [MODEL_HEADER, "layers " + " ".join(str(s) for s in model.layer_sizes)]
    lines.append("x_mean " + _fmt(model.x_mean))
    lines.append("x_std " + _fmt(model.x_std))
    lines.append("y_mean " + repr(model.y_mean))
    lines.append("y_std " + repr(model.y_std))
    for i, (W, b) in enumerate(zip(model.weights, model.biases)):
        lines.append(f"W{i} " + _fmt(W))
        lines.append(f"b{i} " + _fmt(b))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_motor_model(path) -> MotorPowerModel:
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != MODEL_HEADER:
        raise ValueError(f"{path}: not a motor model file (missing '{MODEL_HEADER}' header)")
    fields: dict[str, list[str]] = {}
    for ln in lines[1:]:
        key, *vals = ln.split()
        fields[key] = vals
    sizes = [int(s) for s in fields["layers"]]
    weights, biases = [], []
    for i in range(len(sizes) - 1):
        W = np.array([float(v) for v in fields[f"W{i}"]]).reshape(sizes[i], sizes[i + 1])
        b = np.array([float(v) for v in fields[f"b{i}"]])
        weights.append(W)
        biases.append(b)
    return MotorPowerModel(
        weights=weights,
        biases=biases,
        x_mean=np.array([float(v) for v in fields["x_mean"]]),
        x_std=np.array([float(v) for v in fields["x_std"]]),
        y_mean=float(fields["y_mean"][0]),
        y_std=float(fields["y_std"][0]),
    )
