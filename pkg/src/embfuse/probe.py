"""Shallow downstream classifiers trained by minibatch gradient descent.

A probe is a linear softmax/sigmoid classifier with an optional single tanh
hidden layer. Training is plain gradient descent with a fixed step and a
seeded shuffle, so identical inputs produce bit-identical models. Weights are
float64 throughout; features are cast on entry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .errors import ShapeError, ValidationError
from .validation import check_positive_int

OBJECTIVES = ("softmax_xent", "sigmoid_bce")


@dataclass(frozen=True)
class ProbeConfig:
    hidden_units: int = 0
    objective: str = "softmax_xent"
    learning_rate: float = 0.1
    batch_size: int = 32
    epochs: int = 100
    l2: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ValidationError(f"objective must be one of {OBJECTIVES}")
        if self.hidden_units < 0:
            raise ValidationError("hidden_units must be >= 0")
        if self.learning_rate <= 0.0:
            raise ValidationError("learning_rate must be positive")
        check_positive_int(self.batch_size, "batch_size")
        check_positive_int(self.epochs, "epochs")
        if self.l2 < 0.0:
            raise ValidationError("l2 must be >= 0")


@dataclass(frozen=True, eq=False)
class ProbeModel:
    """Weights and biases per layer; immutable once trained."""

    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    objective: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ValidationError(f"objective must be one of {OBJECTIVES}")
        if len(self.weights) != len(self.biases) or len(self.weights) not in (1, 2):
            raise ShapeError("expected matching weights/biases for 1 or 2 layers")
        ws = []
        bs = []
        dim = None
        for w, b in zip(self.weights, self.biases):
            w = np.array(w, dtype=np.float64)
            b = np.array(b, dtype=np.float64)
            if w.ndim != 2 or b.ndim != 1 or w.shape[1] != b.shape[0]:
                raise ShapeError(f"layer shapes inconsistent: {w.shape} vs {b.shape}")
            if dim is not None and w.shape[0] != dim:
                raise ShapeError(f"layer input {w.shape[0]} does not chain from {dim}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValidationError("model parameters must be finite")
            dim = w.shape[1]
            w.flags.writeable = False
            b.flags.writeable = False
            ws.append(w)
            bs.append(b)
        object.__setattr__(self, "weights", tuple(ws))
        object.__setattr__(self, "biases", tuple(bs))

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[1]

    @property
    def hidden_units(self) -> int:
        return self.weights[0].shape[1] if len(self.weights) == 2 else 0


@dataclass(frozen=True, eq=False)
class ProbeGradient:
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]


def _as_features(X, dim: Optional[int] = None) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeError(f"features must be 2-d, got ndim={X.ndim}")
    if not np.all(np.isfinite(X)):
        raise ValidationError("features contain non-finite values")
    if dim is not None and X.shape[1] != dim:
        raise ShapeError(f"features have width {X.shape[1]}, model expects {dim}")
    return X


def _prepare_targets(y, objective: str, n_classes: Optional[int]) -> tuple[np.ndarray, int]:
    """Return (indicator matrix N x K, K).

    Softmax targets are class ids (a one-hot matrix is also accepted);
    sigmoid targets are an N x K binary matrix.
    """
    y = np.asarray(y)
    if objective == "softmax_xent":
        if y.ndim == 2:
            mat = y.astype(np.float64)
            if not np.all((mat == 0.0) | (mat == 1.0)) or not np.all(mat.sum(axis=1) == 1.0):
                raise ValidationError("softmax_xent matrix targets must be one-hot")
            if n_classes is not None and mat.shape[1] != int(n_classes):
                raise ShapeError(f"targets have {mat.shape[1]} columns, expected {n_classes}")
            return mat, mat.shape[1]
        if y.ndim != 1:
            raise ShapeError("softmax_xent expects a 1-d vector of class ids")
        ids = y.astype(np.int64)
        if np.any(ids < 0):
            raise ValidationError("class ids must be non-negative")
        k = int(n_classes) if n_classes is not None else int(ids.max()) + 1
        if np.any(ids >= k):
            raise ValidationError(f"class id {int(ids.max())} out of range for K={k}")
        onehot = np.zeros((ids.size, k))
        onehot[np.arange(ids.size), ids] = 1.0
        return onehot, k
    if y.ndim != 2:
        raise ShapeError("sigmoid_bce expects an N x K binary matrix")
    mat = y.astype(np.float64)
    if not np.all((mat == 0.0) | (mat == 1.0)):
        raise ValidationError("multilabel targets must be binary")
    k = mat.shape[1]
    if n_classes is not None and int(n_classes) != k:
        raise ShapeError(f"targets have {k} columns, expected {n_classes}")
    return mat, k


def _forward(model: ProbeModel, X: np.ndarray) -> tuple[np.ndarray, Optional[np.ndarray]]:
    """Logits plus the hidden activation when the model has one."""
    if len(model.weights) == 1:
        return X @ model.weights[0] + model.biases[0], None
    hidden = np.tanh(X @ model.weights[0] + model.biases[0])
    return hidden @ model.weights[1] + model.biases[1], hidden


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _sigmoid(logits: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * logits))


def predict_proba(model: ProbeModel, X) -> np.ndarray:
    """Class probabilities, N x K. Softmax rows sum to one; sigmoid entries
    are independent per class."""
    X = _as_features(X, model.input_dim)
    logits, _ = _forward(model, X)
    if model.objective == "softmax_xent":
        return _softmax(logits)
    return _sigmoid(logits)


def predict(model: ProbeModel, X) -> np.ndarray:
    """Argmax class ids."""
    return np.argmax(predict_proba(model, X), axis=1)


def loss(model: ProbeModel, X, y, l2: float = 0.0) -> float:
    """Mean objective over the batch plus (l2 / 2) * sum of squared weights."""
    X = _as_features(X, model.input_dim)
    targets, k = _prepare_targets(y, model.objective, model.output_dim)
    if targets.shape[0] != X.shape[0]:
        raise ShapeError("features and targets disagree on sample count")
    logits, _ = _forward(model, X)
    if model.objective == "softmax_xent":
        lse = np.log(np.exp(logits - logits.max(axis=1, keepdims=True)).sum(axis=1))
        lse = lse + logits.max(axis=1)
        data_term = float(np.mean(lse - (logits * targets).sum(axis=1)))
    else:
        per = np.maximum(logits, 0.0) - logits * targets + np.log1p(np.exp(-np.abs(logits)))
        data_term = float(per.sum(axis=1).mean())
    reg = 0.5 * l2 * sum(float((w**2).sum()) for w in model.weights)
    return data_term + reg


def gradient(model: ProbeModel, X, y, l2: float = 0.0) -> ProbeGradient:
    """Analytic gradient of :func:`loss` with respect to every parameter."""
    X = _as_features(X, model.input_dim)
    targets, _ = _prepare_targets(y, model.objective, model.output_dim)
    if targets.shape[0] != X.shape[0]:
        raise ShapeError("features and targets disagree on sample count")
    n = X.shape[0]
    logits, hidden = _forward(model, X)
    proba = _softmax(logits) if model.objective == "softmax_xent" else _sigmoid(logits)
    delta = (proba - targets) / n
    if hidden is None:
        gw = (X.T @ delta + l2 * model.weights[0],)
        gb = (delta.sum(axis=0),)
        return ProbeGradient(gw, gb)
    d_hidden = (delta @ model.weights[1].T) * (1.0 - hidden**2)
    gw = (
        X.T @ d_hidden + l2 * model.weights[0],
        hidden.T @ delta + l2 * model.weights[1],
    )
    gb = (d_hidden.sum(axis=0), delta.sum(axis=0))
    return ProbeGradient(gw, gb)


def _init_model(cfg: ProbeConfig, dim: int, k: int, rng: np.random.Generator) -> ProbeModel:
    # zeros keep the linear probe convex-deterministic; hidden layers need
    # symmetry breaking
    if cfg.hidden_units == 0:
        return ProbeModel((np.zeros((dim, k)),), (np.zeros(k),), cfg.objective)
    h = cfg.hidden_units
    w1 = rng.uniform(-1.0, 1.0, size=(dim, h)) / np.sqrt(dim)
    w2 = rng.uniform(-1.0, 1.0, size=(h, k)) / np.sqrt(h)
    return ProbeModel((w1, w2), (np.zeros(h), np.zeros(k)), cfg.objective)


def train_probe(X, y, cfg: ProbeConfig, n_classes: Optional[int] = None) -> ProbeModel:
    """Fit a probe by seeded shuffled minibatch gradient descent.

    Deterministic given (X, y, cfg). The returned model's metadata carries
    the full-dataset loss history (one entry before training plus one per
    epoch) and a flag for degenerate single-class labels.
    """
    X = _as_features(X)
    if X.shape[0] < 2:
        raise ValidationError("training needs at least 2 samples")
    targets, k = _prepare_targets(y, cfg.objective, n_classes)
    if targets.shape[0] != X.shape[0]:
        raise ShapeError("features and targets disagree on sample count")
    rng = np.random.default_rng(cfg.seed)
    model = _init_model(cfg, X.shape[1], k, rng)
    weights = [w.copy() for w in model.weights]
    biases = [b.copy() for b in model.biases]
    n = X.shape[0]
    history = []

    def _snapshot(meta=None):
        return ProbeModel(tuple(weights), tuple(biases), cfg.objective, meta or {})

    history.append(loss(_snapshot(), X, targets, cfg.l2))
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            g = gradient(_snapshot(), X[idx], targets[idx], cfg.l2)
            for w, gw in zip(weights, g.weights):
                w -= cfg.learning_rate * gw
            for b, gb in zip(biases, g.biases):
                b -= cfg.learning_rate * gb
        history.append(loss(_snapshot(), X, targets, cfg.l2))
    single_class = bool(np.all(targets == targets[0]))
    meta = {
        "loss_history": tuple(history),
        "single_class": single_class,
        "seed": cfg.seed,
        "epochs": cfg.epochs,
    }
    return ProbeModel(tuple(weights), tuple(biases), cfg.objective, meta)


class ShallowProbe(BaseEstimator, ClassifierMixin):
    """scikit-learn front end over :func:`train_probe` / :func:`predict_proba`."""

    def __init__(
        self,
        hidden_units=0,
        objective="softmax_xent",
        learning_rate=0.1,
        batch_size=32,
        epochs=100,
        l2=0.0,
        seed=0,
        n_classes=None,
    ):
        self.hidden_units = hidden_units
        self.objective = objective
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.l2 = l2
        self.seed = seed
        self.n_classes = n_classes

    def _config(self) -> ProbeConfig:
        return ProbeConfig(
            hidden_units=self.hidden_units,
            objective=self.objective,
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            epochs=self.epochs,
            l2=self.l2,
            seed=self.seed,
        )

    def fit(self, X, y):
        self.model_ = train_probe(X, y, self._config(), n_classes=self.n_classes)
        self.classes_ = np.arange(self.model_.output_dim)
        return self

    def predict_proba(self, X) -> np.ndarray:
        return predict_proba(self.model_, X)

    def predict(self, X) -> np.ndarray:
        return predict(self.model_, X)
