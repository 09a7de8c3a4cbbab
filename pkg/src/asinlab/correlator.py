"""Correlation processor.

Two scorers are provided: a normalised matched filter and a single affine
unit ``score = w . m + b`` trained by full-batch gradient descent (logistic
loss for detection, squared error for regression).  Training standardises
each input component and folds the scaling back into ``(w, b)`` so the
exported model acts on raw measurements.
"""
import enum
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ._rng import substream
from ._validation import check_vector
from .exceptions import (
    ConfigurationError,
    DegenerateDataError,
    DimensionError,
    DivergenceError,
    InsufficientDataError,
)
from .io import fmt


class CorrelatorKind(str, enum.Enum):
    CLASSIFIER = "classifier"
    REGRESSOR = "regressor"


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 500
    learning_rate: float = 0.5
    l2: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise ConfigurationError(f"epochs must be an integer >= 1, got {self.epochs}",
                                     key="epochs")
        if not 0 < self.learning_rate <= 10:
            raise ConfigurationError(
                f"learning_rate must lie in (0, 10], got {self.learning_rate}", key="learning_rate")
        if not self.l2 >= 0:
            raise ConfigurationError(f"l2 must be >= 0, got {self.l2}", key="l2")


@dataclass(frozen=True)
class TrainMeta:
    epochs: int
    learning_rate: float
    final_loss: float
    seed: int


@dataclass(frozen=True)
class CorrelatorModel:
    w: np.ndarray = field(repr=False)
    b: float
    kind: CorrelatorKind
    train_meta: TrainMeta | None = None

    def __post_init__(self):
        w = check_vector(self.w, "w").copy()
        w.flags.writeable = False
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "kind", CorrelatorKind(self.kind))
        if not np.isfinite(self.b):
            raise DegenerateDataError("bias is not finite")

    @property
    def k(self):
        return self.w.shape[0]

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(f"{self.kind.value}\n{self.k}\n{fmt(self.b)}\n")
            for v in self.w:
                fh.write(fmt(v) + "\n")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
        try:
            kind = CorrelatorKind(lines[0])
            k = int(lines[1])
            b = float(lines[2])
            w = np.array([float(v) for v in lines[3:]])
        except (ValueError, IndexError) as exc:
            raise ConfigurationError(f"malformed model file {path}: {exc}") from exc
        if w.shape[0] != k:
            raise ConfigurationError(f"model file {path} declares k={k} but holds {w.shape[0]} weights")
        return cls(w, b, kind)


def correlate(model, m):
    """Raw affine score ``w . m + b``."""
    m = check_vector(m, "measurement")
    if m.shape[0] != model.k:
        raise DimensionError(f"measurement has length {m.shape[0]}, model expects {model.k}")
    return float(model.w @ m + model.b)


def matched_filter(template, m):
    """Normalised inner product of ``template`` and ``m``, in [-1, 1]."""
    t = check_vector(template, "template")
    m = check_vector(m, "measurement", length=t.shape[0])
    nt, nm = np.linalg.norm(t), np.linalg.norm(m)
    if nt == 0 or nm == 0:
        raise DegenerateDataError("matched filter needs non-zero template and measurement")
    return float(np.clip((t @ m) / (nt * nm), -1.0, 1.0))


def loss_and_grad(w, b, X, y, kind, l2=0.0):
    """Mean training loss plus ``l2 * |w|^2`` and its gradient ``(dw, db)``."""
    z = X @ w + b
    n = X.shape[0]
    if CorrelatorKind(kind) is CorrelatorKind.CLASSIFIER:
        loss = np.mean(np.logaddexp(0.0, z) - y * z)
        r = (0.5 * (1.0 + np.tanh(0.5 * z)) - y) / n
    else:
        resid = z - y
        loss = np.mean(resid**2)
        r = 2.0 * resid / n
    loss += l2 * (w @ w)
    return loss, X.T @ r + 2.0 * l2 * w, r.sum()


def stability_bound(X, kind, l2=0.0):
    """Learning rate ``2 / L`` below which gradient descent cannot increase the loss.

    ``L`` bounds the loss Hessian by the trace of the augmented Gram matrix
    ``[X 1]^T [X 1] / N``, scaled by 1/4 (logistic) or 2 (squared error).
    """
    X = np.asarray(X, dtype=float)
    trace = (np.sum(X**2) + X.shape[0]) / X.shape[0]
    c = 0.25 if CorrelatorKind(kind) is CorrelatorKind.CLASSIFIER else 2.0
    return 2.0 / (c * trace + 2.0 * l2)


def _standardize(X):
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    return (X - mean) / scale, mean, scale


def _check_training_data(X, y, kind):
    if X.shape[0] < 2:
        raise InsufficientDataError("training needs at least 2 samples")
    if kind is CorrelatorKind.CLASSIFIER:
        if not np.all((y == 0) | (y == 1)):
            raise DegenerateDataError("classifier labels must be 0/1")
        if np.unique(y).size < 2:
            raise DegenerateDataError("classifier training data contains a single class")


def _gradient_descent(Xs, y, cfg, kind):
    w = substream(cfg.seed).uniform(-0.01, 0.01, Xs.shape[1])
    b = 0.0
    losses = np.empty(cfg.epochs + 1)
    # overflow is reported through the finiteness check below
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(1, cfg.epochs + 2):
            loss, gw, gb = loss_and_grad(w, b, Xs, y, kind, cfg.l2)
            if not np.isfinite(loss):
                raise DivergenceError(f"non-finite training loss at epoch {epoch}", epoch=epoch)
            losses[epoch - 1] = loss
            if epoch <= cfg.epochs:
                w = w - cfg.learning_rate * gw
                b = b - cfg.learning_rate * gb
    return w, b, losses


def train_correlator(X, y, cfg, kind):
    """Fit a single affine unit; returns ``(model, loss_curve)``.

    ``loss_curve[t]`` is the standardised-space loss before epoch ``t + 1``;
    the last entry is the final loss.
    """
    kind = CorrelatorKind(kind)
    X, y = check_X_y(X, y, y_numeric=True)
    y = y.astype(float)
    _check_training_data(X, y, kind)
    Xs, mean, scale = _standardize(X)
    ws, bs, losses = _gradient_descent(Xs, y, cfg, kind)
    w = ws / scale
    b = float(bs - w @ mean)
    meta = TrainMeta(cfg.epochs, cfg.learning_rate, float(losses[-1]), cfg.seed)
    return CorrelatorModel(w, b, kind, meta), losses


class SingleLayerCorrelator(BaseEstimator):
    """One affine unit trained by full-batch gradient descent.

    ``kind="classifier"`` uses the logistic loss and ``predict`` returns 0/1
    labels (score >= 0 means present).  ``kind="regressor"`` uses squared
    error and ``predict`` returns the raw score.
    """

    def __init__(self, kind="classifier", epochs=500, learning_rate=0.5, l2=0.0, random_state=0):
        self.kind = kind
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.l2 = l2
        self.random_state = random_state

    def fit(self, X, y):
        cfg = TrainConfig(self.epochs, self.learning_rate, self.l2, self.random_state)
        self.model_, self.loss_curve_ = train_correlator(X, y, cfg, self.kind)
        self.coef_ = self.model_.w
        self.intercept_ = self.model_.b
        self.final_loss_ = self.model_.train_meta.final_loss
        self.n_features_in_ = self.coef_.shape[0]
        if self.model_.kind is CorrelatorKind.CLASSIFIER:
            self.classes_ = np.array([0, 1])
        return self

    def decision_function(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise DimensionError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X @ self.coef_ + self.intercept_

    def predict(self, X):
        score = self.decision_function(X)
        if self.model_.kind is CorrelatorKind.CLASSIFIER:
            return (score >= 0).astype(int)
        return score

    def predict_proba(self, X):
        if CorrelatorKind(self.kind) is not CorrelatorKind.CLASSIFIER:
            raise AttributeError("predict_proba is only available for classifiers")
        p1 = 0.5 * (1.0 + np.tanh(0.5 * self.decision_function(X)))
        return np.column_stack([1.0 - p1, p1])

    def score(self, X, y):
        """Accuracy for classifiers, coefficient of determination for regressors."""
        y = np.asarray(y, dtype=float)
        pred = self.predict(X)
        if self.model_.kind is CorrelatorKind.CLASSIFIER:
            return float(np.mean(pred == y))
        return float(1.0 - np.sum((y - pred) ** 2) / np.sum((y - y.mean()) ** 2))
