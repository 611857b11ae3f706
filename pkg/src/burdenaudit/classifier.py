"""Logistic regression trained by gradient descent on binary cross-entropy."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from burdenaudit.errors import TrainingError


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    iterations: int = 2000
    seed: int = 0
    # "zeros" or "uniform"; uniform draws U(-0.01, 0.01) from the seed
    init: str = "zeros"
    # None means full batch
    batch_size: int | None = None

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.iterations <= 0:
            raise ValueError("iterations must be positive")
        if self.init not in ("zeros", "uniform"):
            raise ValueError(f"unknown init {self.init!r}")
        if self.batch_size is not None and self.batch_size <= 0:
            raise ValueError("batch_size must be positive")


@dataclass(frozen=True)
class LinearModel:
    weights: tuple[float, ...]
    bias: float
    feature_names: tuple[str, ...] = ()
    config: TrainConfig = field(default_factory=TrainConfig, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "bias", float(self.bias))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        if not self.weights:
            raise ValueError("model needs at least one weight")
        if not all(map(math.isfinite, self.weights)) or not math.isfinite(self.bias):
            raise ValueError("model parameters must be finite")
        if self.feature_names and len(self.feature_names) != len(self.weights):
            raise ValueError("feature_names length must match weights")

    @property
    def feature_count(self) -> int:
        return len(self.weights)

    @property
    def w(self) -> np.ndarray:
        return np.asarray(self.weights)


def sigmoid(z):
    """Logistic function, evaluated without overflow for large |z|."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out if out.ndim else float(out)


def bce_loss(w: np.ndarray, b: float, features: np.ndarray, labels: np.ndarray) -> float:
    """Mean binary cross-entropy of logistic predictions, via log-sum-exp."""
    z = features @ w + b
    # -[y log s(z) + (1-y) log(1-s(z))] = log(1 + e^z) - y z
    return float(np.mean(np.logaddexp(0.0, z) - labels * z))


def bce_gradient(w: np.ndarray, b: float, features: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, float]:
    residual = sigmoid(features @ w + b) - labels
    n = len(labels)
    return features.T @ residual / n, float(residual.sum() / n)


def _check_x(model: LinearModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (model.feature_count,):
        raise ValueError(f"expected {model.feature_count} features, got shape {x.shape}")
    return x


def score(model: LinearModel, x) -> np.ndarray | float:
    x = _check_x(model, x)
    out = x @ model.w + model.bias
    return out if np.ndim(out) else float(out)


def predict_proba(model: LinearModel, x):
    return sigmoid(score(model, x))


def predict(model: LinearModel, x):
    """1 where ``w.x + b >= 0`` (ties go to the favorable class), else 0."""
    s = score(model, x)
    if np.ndim(s):
        return (s >= 0).astype(int)
    return int(s >= 0)


def accuracy(model: LinearModel, features, labels) -> float:
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValueError("accuracy of an empty set is undefined")
    return float(np.mean(predict(model, np.asarray(features, dtype=float).reshape(len(labels), -1)) == labels))


def signed_boundary_distance(model: LinearModel, x):
    """Euclidean distance from ``x`` to the decision hyperplane, negative on the unfavorable side."""
    norm = float(np.linalg.norm(model.w))
    if norm == 0:
        raise ValueError("zero weight vector has no decision boundary")
    return score(model, x) / norm


def train(features, labels, config: TrainConfig = TrainConfig(), *, feature_names=(),
          loss_log: list[float] | None = None) -> LinearModel:
    """Run ``config.iterations`` gradient steps on the BCE loss.

    If ``loss_log`` is given, the loss before each step is appended to it.
    """
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float)
    if X.ndim != 2 or len(X) == 0:
        raise TrainingError("cannot train on an empty dataset")
    if len(X) != len(y):
        raise TrainingError(f"{len(X)} feature rows but {len(y)} labels")
    if not np.isin(y, (0, 1)).all():
        raise TrainingError("labels must be 0 or 1")
    if y.min() == y.max():
        raise TrainingError(f"labels are all {int(y[0])}; need both classes")

    rng = np.random.Generator(np.random.PCG64(config.seed))
    d = X.shape[1]
    if config.init == "uniform":
        w = rng.uniform(-0.01, 0.01, size=d)
        b = float(rng.uniform(-0.01, 0.01))
    else:
        w = np.zeros(d)
        b = 0.0

    with np.errstate(over="ignore", invalid="ignore"):
        w, b = _descend(X, y, w, b, config, rng, loss_log)
    if not (np.isfinite(w).all() and math.isfinite(b)):
        raise TrainingError("training produced non-finite parameters")
    return LinearModel(tuple(w), b, tuple(feature_names), config)


def _descend(X, y, w, b, config, rng, loss_log):
    n = len(y)
    batch = config.batch_size or n
    order = np.arange(n)
    pos = n
    for step in range(config.iterations):
        if batch >= n:
            Xb, yb = X, y
        else:
            if pos + batch > n:
                order = rng.permutation(n)
                pos = 0
            idx = order[pos:pos + batch]
            pos += batch
            Xb, yb = X[idx], y[idx]
        loss = bce_loss(w, b, Xb, yb)
        if not math.isfinite(loss):
            raise TrainingError(f"non-finite loss {loss} at step {step}; |w|={np.linalg.norm(w):.3g}, b={b:.3g}")
        if loss_log is not None:
            loss_log.append(loss)
        gw, gb = bce_gradient(w, b, Xb, yb)
        w = w - config.learning_rate * gw
        b = b - config.learning_rate * gb
    return w, b


def model_to_dict(model: LinearModel) -> dict:
    return {
        "weights": list(model.weights),
        "bias": model.bias,
        "feature_names": list(model.feature_names),
        "train_config": asdict(model.config),
    }


def model_from_dict(doc: dict) -> LinearModel:
    return LinearModel(
        tuple(doc["weights"]),
        doc["bias"],
        tuple(doc.get("feature_names", ())),
        TrainConfig(**doc.get("train_config", {})),
    )


def save_model(model: LinearModel, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(model_to_dict(model), indent=2) + "\n", encoding="utf-8")
    return path


def load_model(path: str | Path) -> LinearModel:
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
