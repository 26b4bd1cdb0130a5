"""Soft-margin SVM trained in the dual by sequential minimal optimization.

The primal problem is

    minimize  1/2 ||w||^2 + C * sum_i xi_i
    s.t.      y_i (w . x_i + b) >= 1 - xi_i,  xi_i >= 0

and the solver works on its dual, so ``w`` only appears implicitly through
the kernel. Kernel rows are computed on demand rather than from a stored
Gram matrix, which keeps memory at O(n) and makes each optimization step
cost O(n * d).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from featbench.classifiers.kernels import KernelParams, kernel_matrix, median_distance
from featbench.data import Dataset
from featbench.errors import DataError

_TAU = 1e-12


@dataclass(frozen=True)
class SvmParams:
    c: float = 1.0
    kernel: KernelParams = field(default_factory=KernelParams)
    tol: float = 1e-3
    max_iter: int = 1_000_000

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("c must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass(frozen=True)
class BinarySvm:
    support_vectors: np.ndarray
    dual_coeffs: np.ndarray  # alpha_i * y_i
    bias: float
    kernel: KernelParams
    alphas: np.ndarray
    support_index: np.ndarray  # rows of the training matrix
    steps: int = 0

    def decision(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.support_vectors.shape[0] == 0:
            return np.full(X.shape[0], self.bias)
        return kernel_matrix(self.kernel, X, self.support_vectors) @ self.dual_coeffs + self.bias

    @property
    def weights(self) -> np.ndarray:
        """Primal weight vector; only defined for the linear kernel."""
        if self.kernel.kind != "linear":
            raise ValueError("explicit weights exist only for the linear kernel")
        return self.dual_coeffs @ self.support_vectors


@dataclass(frozen=True)
class SvmModel:
    """One machine for two classes (class 1 positive), else one per class."""

    n_classes: int
    n_features: int
    machines: tuple[BinarySvm, ...]
    params: SvmParams

    def decision_function(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        if self.n_classes == 2:
            return self.machines[0].decision(X)
        return np.column_stack([m.decision(X) for m in self.machines])

    def predict(self, X) -> np.ndarray:
        scores = self.decision_function(X)
        if self.n_classes == 2:
            return (scores > 0).astype(np.int64)
        return np.argmax(scores, axis=1).astype(np.int64)


def _smo(X: np.ndarray, y: np.ndarray, C: float, kern: KernelParams, tol: float, max_iter: int):
    """Two-variable dual updates with second-order working-set selection.

    Each step picks the maximal KKT violator ``i`` and the partner ``j``
    giving the largest guaranteed decrease of the dual objective, then
    solves the two-variable subproblem in closed form. Stops when the
    violation gap m(alpha) - M(alpha) drops to ``tol``; at that point every
    free support vector satisfies |y_i f(x_i) - 1| <= tol.

    Returns (alpha, b, steps) for f(x) = sum_i alpha_i y_i k(x_i, x) + b.
    """
    n = X.shape[0]
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of 1/2 a'Qa - e'a, Q_ij = y_i y_j k(x_i, x_j)
    sq = (X * X).sum(axis=1)
    gaussian = kern.kind == "gaussian"
    two_s2 = 2.0 * kern.sigma**2 if gaussian else 1.0
    diag = np.ones(n) if gaussian else sq.copy()
    pos = y > 0

    def row(i):
        g = X @ X[i]
        if not gaussian:
            return g
        return np.exp(-np.maximum(sq + sq[i] - 2.0 * g, 0.0) / two_s2)

    steps = 0
    while steps < max_iter:
        below, above = alpha < C, alpha > 0
        up = (below & pos) | (above & ~pos)
        low = (below & ~pos) | (above & pos)
        score = -y * grad
        if not up.any() or not low.any():
            break
        s_up = np.where(up, score, -np.inf)
        i = int(np.argmax(s_up))
        m_up = s_up[i]
        m_low = np.min(np.where(low, score, np.inf))
        if m_up - m_low <= tol:
            break
        k_i = row(i)
        b_it = m_up - score
        a_it = diag[i] + diag - 2.0 * k_i
        a_it = np.where(a_it > 0, a_it, _TAU)
        cand = low & (b_it > 0)
        gain = np.where(cand, -(b_it * b_it) / a_it, np.inf)
        j = int(np.argmin(gain))
        k_j = row(j)
        yi, yj = y[i], y[j]
        ai, aj = alpha[i], alpha[j]
        if yi != yj:
            quad = diag[i] + diag[j] + 2.0 * (yi * yj * k_i[j])
            quad = quad if quad > 0 else _TAU
            delta = (-grad[i] - grad[j]) / quad
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > 0:
                if ni > C:
                    ni, nj = C, C - diff
            elif nj > C:
                nj, ni = C, C + diff
        else:
            quad = diag[i] + diag[j] - 2.0 * (yi * yj * k_i[j])
            quad = quad if quad > 0 else _TAU
            delta = (grad[i] - grad[j]) / quad
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > C:
                if ni > C:
                    ni, nj = C, total - C
                if nj > C:
                    nj, ni = C, total - C
            else:
                if nj < 0:
                    nj, ni = 0.0, total
                if ni < 0:
                    ni, nj = 0.0, total
        alpha[i], alpha[j] = ni, nj
        grad += y * (yi * (ni - ai) * k_i + yj * (nj - aj) * k_j)
        steps += 1

    yg = y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = float(yg[free].mean())
    else:
        at_c = alpha >= C
        ub_set = (at_c & ~pos) | (~at_c & pos)
        lb_set = (at_c & pos) | (~at_c & ~pos)
        ub = yg[ub_set].min() if ub_set.any() else np.inf
        lb = yg[lb_set].max() if lb_set.any() else -np.inf
        rho = float((ub + lb) / 2) if np.isfinite(ub) and np.isfinite(lb) else 0.0
    return alpha, -rho, steps


def _train_binary(X, y_pm, p: SvmParams, kern: KernelParams) -> BinarySvm:
    if np.all(y_pm == y_pm[0]):
        # one-sided OvR sub-problem (class absent from this training set)
        empty = np.empty(0, dtype=int)
        return BinarySvm(X[:0].copy(), np.empty(0), float(y_pm[0]), kern, np.empty(0), empty)
    alpha, b, steps = _smo(X, y_pm, p.c, kern, p.tol, p.max_iter)
    sv = np.flatnonzero(alpha > 0)
    return BinarySvm(X[sv].copy(), alpha[sv] * y_pm[sv], float(b), kern, alpha[sv].copy(), sv, steps)


def svm_train(train: Dataset, p: SvmParams = SvmParams()) -> SvmModel:
    X, y = train.features, train.labels
    present = np.unique(y)
    if X.shape[0] == 0 or present.size < 2:
        raise DataError("SVM training needs samples from at least two classes")
    kern = p.kernel
    if kern.kind == "gaussian" and kern.sigma is None:
        kern = KernelParams("gaussian", median_distance(X))
    k = max(train.n_classes, 2)
    if k == 2:
        y_pm = np.where(y == 1, 1.0, -1.0)
        machines = (_train_binary(X, y_pm, p, kern),)
    else:
        machines = tuple(_train_binary(X, np.where(y == c, 1.0, -1.0), p, kern) for c in range(k))
    return SvmModel(k, X.shape[1], machines, p)


def svm_predict(m: SvmModel, x) -> int:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != m.n_features:
        raise ValueError(f"expected a vector of {m.n_features} features")
    return int(m.predict(x[None, :])[0])
