"""One-hidden-layer network: sigmoid hidden units, softmax output, cross-entropy loss."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import expit, log_softmax, softmax

from featbench.data import Dataset
from featbench.errors import DataError, TrainingError

PARAM_NAMES = ("w1", "b1", "w2", "b2")


@dataclass(frozen=True)
class NnModel:
    w1: np.ndarray  # (d, hidden)
    b1: np.ndarray
    w2: np.ndarray  # (hidden, K)
    b2: np.ndarray
    shift: np.ndarray  # input standardization, applied before w1
    scale: np.ndarray
    activation: str = "sigmoid"
    losses: tuple[float, ...] = ()

    def _hidden(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.w1.shape[0]:
            raise ValueError(f"expected {self.w1.shape[0]} features, got {X.shape[1]}")
        Z = (X - self.shift) / self.scale
        return Z, expit(Z @ self.w1 + self.b1)

    def logits(self, X) -> np.ndarray:
        _, H = self._hidden(X)
        return H @ self.w2 + self.b2

    def predict_proba(self, X) -> np.ndarray:
        return softmax(self.logits(X), axis=1)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.logits(X), axis=1).astype(np.int64)


def loss_and_grads(m: NnModel, X, y) -> tuple[float, dict[str, np.ndarray]]:
    """Mean cross-entropy over the batch and its backpropagated gradients."""
    y = np.asarray(y, dtype=np.int64).reshape(-1)
    Z, H = m._hidden(X)
    logits = H @ m.w2 + m.b2
    logp = log_softmax(logits, axis=1)
    n = len(y)
    loss = -float(logp[np.arange(n), y].mean())
    delta2 = np.exp(logp)
    delta2[np.arange(n), y] -= 1.0
    delta2 /= n
    delta1 = (delta2 @ m.w2.T) * H * (1.0 - H)
    grads = {
        "w2": H.T @ delta2,
        "b2": delta2.sum(0),
        "w1": Z.T @ delta1,
        "b1": delta1.sum(0),
    }
    return loss, grads


def nn_train(train: Dataset, hidden: int = 16, lr: float = 0.01, epochs: int = 200,
             seed: int = 0, standardize: bool = True) -> NnModel:
    """Full-batch gradient descent from a seeded uniform(-0.5, 0.5) initialization."""
    if hidden < 1:
        raise ValueError("hidden must be at least 1")
    if not lr > 0:
        raise ValueError("lr must be positive")
    if train.n_samples == 0:
        raise DataError("cannot train a neural network on an empty dataset")
    X, y = train.features, train.labels
    d, k = X.shape[1], max(train.n_classes, 2)
    rng = np.random.default_rng(seed)
    if standardize:
        shift = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0] = 1.0
    else:
        shift, scale = np.zeros(d), np.ones(d)
    m = NnModel(
        w1=rng.uniform(-0.5, 0.5, (d, hidden)),
        b1=rng.uniform(-0.5, 0.5, hidden),
        w2=rng.uniform(-0.5, 0.5, (hidden, k)),
        b2=rng.uniform(-0.5, 0.5, k),
        shift=shift,
        scale=scale,
    )
    losses = []
    for epoch in range(epochs):
        loss, grads = loss_and_grads(m, X, y)
        if not np.isfinite(loss):
            raise TrainingError(f"non-finite loss at epoch {epoch}")
        losses.append(loss)
        for name in PARAM_NAMES:
            getattr(m, name)[...] -= lr * grads[name]
    return replace(m, losses=tuple(losses))


def nn_predict(m: NnModel, X) -> np.ndarray:
    return m.predict(X)


def nn_gradient_check(m: NnModel, x, label: int, step: float = 1e-5) -> float:
    """Max relative error between backprop and central-difference gradients on one sample."""
    X = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.array([label])
    _, grads = loss_and_grads(m, X, y)
    worst = 0.0
    for name in PARAM_NAMES:
        base = getattr(m, name)
        for idx in np.ndindex(base.shape):
            plus, minus = base.copy(), base.copy()
            plus[idx] += step
            minus[idx] -= step
            lp, _ = loss_and_grads(replace(m, **{name: plus}), X, y)
            lm, _ = loss_and_grads(replace(m, **{name: minus}), X, y)
            numeric = (lp - lm) / (2 * step)
            analytic = grads[name][idx]
            denom = max(abs(numeric), abs(analytic), 1e-7)
            worst = max(worst, abs(numeric - analytic) / denom)
    return worst
