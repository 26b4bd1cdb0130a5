"""Filter and wrapper feature selectors.

Masks are plain boolean numpy arrays with one entry per feature.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist, squareform

from featbench.classifiers.kernels import KernelParams, median_distance
from featbench.classifiers.svm import SvmParams, svm_train
from featbench.data import Dataset
from featbench.errors import DataError


@dataclass(frozen=True)
class FeatureScores:
    scores: np.ndarray
    method: str
    higher_is_better: bool = True
    info: dict = field(default_factory=dict)

    def to_csv(self, path, feature_names) -> None:
        _dump(path, feature_names, "score", [repr(float(v)) for v in self.scores])


@dataclass(frozen=True)
class RfeRanking:
    """``rank[f]`` is 1 for the last surviving feature, d for the first removed."""

    rank: np.ndarray
    elimination_order: list[int]
    n_rounds: int

    def top_k_mask(self, k: int) -> np.ndarray:
        if not 1 <= k <= len(self.rank):
            raise ValueError(f"k must lie in [1, {len(self.rank)}], got {k}")
        return self.rank <= k

    def to_csv(self, path, feature_names) -> None:
        _dump(path, feature_names, "rank", [str(int(r)) for r in self.rank])


def _dump(path, names, column: str, values: list[str]) -> None:
    if len(names) != len(values):
        raise ValueError(f"{len(names)} feature names for {len(values)} values")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature_name", column])
        w.writerows(zip(names, values))


def contingency_tables(d: Dataset) -> np.ndarray:
    """Observed counts, shape (n_features, n_bins, n_classes)."""
    X = d.features
    with np.errstate(invalid="ignore"):
        Xi = X.astype(np.int64)  # NaN/inf cast to garbage; the equality check rejects them
    if X.size and (Xi.min() < 0 or not np.array_equal(Xi, X)):
        raise ValueError("chi-squared scoring needs nonnegative integer bin indices")
    n, nf = Xi.shape
    n_bins = int(Xi.max()) + 1 if Xi.size else 1
    k = max(d.n_classes, 2)
    codes = Xi  # built in place: ((feature * n_bins + bin) * k + label)
    codes += np.arange(nf) * n_bins
    codes *= k
    codes += d.labels[:, None]
    counts = np.bincount(codes.ravel(), minlength=nf * n_bins * k)
    return counts.reshape(nf, n_bins, k)


def chi2_scores(d: Dataset) -> FeatureScores:
    """Pearson chi-squared statistic of each (binned) feature against the class.

    Cells whose expected count is zero (empty bin or empty class) are skipped.
    """
    if d.n_samples == 0:
        raise DataError("chi-squared scoring needs a nonempty dataset")
    obs = contingency_tables(d).astype(float)
    n, k = d.n_samples, obs.shape[2]
    # every sample lands in one bin of every feature, so class totals are shared
    class_tot = np.bincount(d.labels, minlength=k).astype(float)
    bin_tot = obs @ np.ones(k)
    expected = bin_tot[:, :, None] * (class_tot / n)
    terms = np.divide((obs - expected) ** 2, expected, out=np.zeros_like(obs), where=expected > 0)
    return FeatureScores(terms.reshape(len(terms), -1).sum(axis=1), "chi2")


def select_top_k(s: FeatureScores | np.ndarray, k: int) -> np.ndarray:
    """Mask of the k best scores; equal scores favour the lower feature index."""
    scores = np.asarray(s.scores if isinstance(s, FeatureScores) else s, dtype=float)
    higher = s.higher_is_better if isinstance(s, FeatureScores) else True
    if not 1 <= k <= len(scores):
        raise ValueError(f"k must lie in [1, {len(scores)}], got {k}")
    order = np.argsort(-scores if higher else scores, kind="stable")
    mask = np.zeros(len(scores), dtype=bool)
    mask[order[:k]] = True
    return mask


# ---------------------------------------------------------------------------
# Gaussian-kernel relevance weighting
# ---------------------------------------------------------------------------

def project_scaled_simplex(v: np.ndarray, total: float) -> np.ndarray:
    """Euclidean projection onto {w >= 0, sum(w) == total}."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    idx = np.arange(1, len(v) + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


class _ContrastObjective:
    """J(w) = mean same-class similarity - mean cross-class similarity.

    Similarity is the Gaussian kernel on the feature-weighted distance
    sum_f w_f (x_f - y_f)^2.
    """

    def __init__(self, X: np.ndarray, y: np.ndarray, sigma: float):
        self.X = X
        self.two_s2 = 2.0 * sigma**2
        same = y[:, None] == y[None, :]
        np.fill_diagonal(same, False)
        diff = y[:, None] != y[None, :]
        coef = np.zeros(same.shape)
        coef[same] = 1.0 / same.sum()
        coef[diff] = -1.0 / diff.sum()
        self.coef = coef

    def kernel(self, w):
        sq = squareform(pdist(self.X * np.sqrt(w), "sqeuclidean"))
        return np.exp(-sq / self.two_s2)

    def value(self, w) -> float:
        return float((self.coef * self.kernel(w)).sum())

    def gradient(self, w) -> np.ndarray:
        A = self.coef * self.kernel(w)
        X = self.X
        # sum_ij A_ij (x_if - x_jf)^2 for symmetric A
        s = 2.0 * (X * X).T @ A.sum(1) - 2.0 * (X * (A @ X)).sum(0)
        return -s / self.two_s2


def kernel_relevance_weights(d: Dataset, k: KernelParams = KernelParams("gaussian"),
                             tol: float = 1e-4, max_iter: int = 200,
                             standardize: bool = True) -> FeatureScores:
    """Per-feature weights maximizing the same-vs-cross class kernel contrast.

    Projected gradient ascent from uniform weights, with backtracking so the
    objective never decreases; weights stay nonnegative and sum to the
    feature count. Stops when the largest weight change falls below ``tol``.
    """
    if k.kind != "gaussian":
        raise ValueError("kernel relevance weighting needs a gaussian kernel")
    if np.unique(d.labels).size < 2:
        raise DataError("kernel relevance weighting needs at least two classes")
    X = d.features.astype(float)
    if standardize:
        sd = X.std(axis=0)
        sd[sd == 0] = 1.0
        X = (X - X.mean(axis=0)) / sd
    nf = X.shape[1]
    sigma = k.sigma if k.sigma is not None else median_distance(X)
    obj = _ContrastObjective(X, d.labels, sigma)
    w = np.ones(nf)
    j_cur = obj.value(w)
    history = [j_cur]
    step = None
    for _ in range(max_iter):
        g = obj.gradient(w)
        gmax = np.abs(g).max()
        if gmax == 0:
            break
        if step is None:
            step = 0.5 / gmax
        moved = False
        for _ in range(40):
            cand = project_scaled_simplex(w + step * g, nf)
            j_new = obj.value(cand)
            if j_new >= j_cur:
                moved = True
                break
            step *= 0.5
        if not moved:
            break
        change = np.abs(cand - w).max()
        w, j_cur = cand, j_new
        history.append(j_cur)
        step *= 2.0
        if change < tol:
            break
    return FeatureScores(w, "kernel_relevance", True, {"objective": history, "sigma": sigma})


# ---------------------------------------------------------------------------
# SVM-RFE
# ---------------------------------------------------------------------------

def svm_rfe(d: Dataset, p: SvmParams = SvmParams(), step: int | float = 1) -> RfeRanking:
    """Recursive elimination by squared linear-SVM weights.

    ``step`` >= 1 removes that many features per round; a float in (0, 1)
    removes ceil(step * surviving). Multi-class data sums w_j^2 over the
    one-vs-rest machines. Equal criteria remove the higher index first.
    """
    if p.kernel.kind != "linear":
        raise ValueError("SVM-RFE needs a linear kernel")
    if d.n_samples == 0:
        raise DataError("SVM-RFE needs a nonempty dataset")
    if isinstance(step, float) and 0 < step < 1:
        fraction = step
    elif step >= 1 and float(step).is_integer():
        fraction = None
        step = int(step)
    else:
        raise ValueError(f"step must be a positive integer or a fraction in (0, 1), got {step}")
    surviving = list(range(d.n_features))
    eliminated: list[int] = []
    rounds = 0
    while surviving:
        model = svm_train(d.subset(columns=surviving), p)
        rounds += 1
        crit = sum(m.weights ** 2 for m in model.machines)
        n_drop = math.ceil(fraction * len(surviving)) if fraction else step
        n_drop = min(max(n_drop, 1), len(surviving))
        idx = np.array(surviving)
        order = np.lexsort((-idx, crit))  # ascending criterion, then descending index
        drop = [int(idx[o]) for o in order[:n_drop]]
        eliminated.extend(drop)
        dropped = set(drop)
        surviving = [f for f in surviving if f not in dropped]
    rank = np.empty(d.n_features, dtype=np.int64)
    for pos, f in enumerate(reversed(eliminated)):
        rank[f] = pos + 1
    return RfeRanking(rank, eliminated, rounds)
