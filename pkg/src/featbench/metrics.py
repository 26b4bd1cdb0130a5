"""Confusion matrices and the accuracy / precision / recall / F1 criteria."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ConfusionMatrix:
    """``counts[i, j]`` = samples of true class i predicted as class j.

    For two classes, class 0 is the positive class: TP = counts[0, 0],
    FN = counts[0, 1], FP = counts[1, 0], TN = counts[1, 1].
    """

    counts: np.ndarray

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def tp(self) -> int:
        return int(self.counts[0, 0])

    @property
    def fn(self) -> int:
        return int(self.counts[0, 1:].sum())

    @property
    def fp(self) -> int:
        return int(self.counts[1:, 0].sum())

    @property
    def tn(self) -> int:
        return int(self.counts[1:, 1:].sum())


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    per_class: list[ClassMetrics]
    macro_f1: float


def confusion(y_true, y_pred, n_classes: int) -> ConfusionMatrix:
    y_true = np.asarray(y_true, dtype=np.int64).reshape(-1)
    y_pred = np.asarray(y_pred, dtype=np.int64).reshape(-1)
    if y_true.shape != y_pred.shape:
        raise ValueError(f"length mismatch: {len(y_true)} true vs {len(y_pred)} predicted labels")
    if n_classes < 2:
        raise ValueError("n_classes must be at least 2")
    for name, arr in (("y_true", y_true), ("y_pred", y_pred)):
        if arr.size and (arr.min() < 0 or arr.max() >= n_classes):
            raise ValueError(f"{name} contains a label outside [0, {n_classes})")
    flat = np.bincount(y_true * n_classes + y_pred, minlength=n_classes * n_classes)
    return ConfusionMatrix(flat.reshape(n_classes, n_classes))


def _ratio(num, den) -> float:
    return float(num) / float(den) if den else 0.0


def report(cm: ConfusionMatrix) -> MetricsReport:
    """Per-class precision/recall/F1 plus accuracy; any 0/0 is taken as 0."""
    c = cm.counts
    if c.size == 0 or cm.total == 0:
        raise ValueError("cannot report on an empty confusion matrix")
    diag = np.diag(c)
    col = c.sum(axis=0)
    row = c.sum(axis=1)
    per_class = []
    for k in range(cm.n_classes):
        p = _ratio(diag[k], col[k])
        r = _ratio(diag[k], row[k])
        f1 = _ratio(2 * p * r, p + r)
        per_class.append(ClassMetrics(p, r, f1))
    acc = _ratio(diag.sum(), cm.total)
    macro = float(np.mean([m.f1 for m in per_class]))
    return MetricsReport(acc, per_class, macro)


def accuracy(y_true, y_pred) -> float:
    y_true = np.asarray(y_true)
    return float(np.mean(y_true == np.asarray(y_pred))) if y_true.size else 0.0
