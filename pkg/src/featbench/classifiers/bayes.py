from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from featbench.data import Dataset
from featbench.errors import DataError

VAR_SMOOTHING = 1e-9


@dataclass(frozen=True)
class NbModel:
    """Gaussian naive Bayes: class priors plus per-class feature means/variances."""

    priors: np.ndarray
    means: np.ndarray  # (K, d)
    variances: np.ndarray  # (K, d), already floored
    var_floor: float

    def joint_log_likelihood(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.means.shape[1]:
            raise ValueError(f"expected {self.means.shape[1]} features, got {X.shape[1]}")
        with np.errstate(divide="ignore"):
            log_prior = np.log(self.priors)
        diff = X[:, None, :] - self.means[None]
        ll = -0.5 * (np.log(2 * np.pi * self.variances)[None] + diff * diff / self.variances[None]).sum(2)
        return ll + log_prior[None]

    def predict_proba(self, X) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        return np.exp(jll - logsumexp(jll, axis=1, keepdims=True))

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.joint_log_likelihood(X), axis=1).astype(np.int64)


def nb_train(train: Dataset) -> NbModel:
    """Fit priors and Gaussian moments; every variance gets ``1e-9 * max feature variance`` added."""
    if train.n_samples == 0:
        raise DataError("cannot train naive Bayes on an empty dataset")
    X, y = train.features, train.labels
    k = max(train.n_classes, 2)
    d = X.shape[1]
    floor = VAR_SMOOTHING * float(X.var(axis=0).max()) if d else 0.0
    if floor <= 0:
        floor = VAR_SMOOTHING
    counts = np.bincount(y, minlength=k).astype(float)
    means = np.zeros((k, d))
    variances = np.ones((k, d))
    for c in range(k):
        rows = X[y == c]
        if len(rows):
            means[c] = rows.mean(axis=0)
            variances[c] = rows.var(axis=0)
    return NbModel(counts / counts.sum(), means, variances + floor, floor)


def nb_predict(m: NbModel, X) -> np.ndarray:
    return m.predict(X)
