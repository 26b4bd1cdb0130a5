from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist


@dataclass(frozen=True)
class KernelParams:
    """``kind`` is "linear" or "gaussian"; ``sigma`` is the Gaussian width.

    ``sigma=None`` on a Gaussian kernel means "median pairwise distance of
    the training data", resolved at training time.
    """

    kind: str = "linear"
    sigma: float | None = None

    def __post_init__(self):
        if self.kind not in ("linear", "gaussian"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "gaussian" and self.sigma is not None and not self.sigma > 0:
            raise ValueError("gaussian kernel needs sigma > 0")


def kernel_eval(k: KernelParams, x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    if k.kind == "linear":
        return float(x @ y)
    if k.sigma is None:
        raise ValueError("gaussian kernel evaluation needs an explicit sigma")
    diff = x - y
    return float(np.exp(-(diff @ diff) / (2.0 * k.sigma**2)))


def kernel_matrix(k: KernelParams, A, B) -> np.ndarray:
    """Gram block K[i, j] = k(A[i], B[j])."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    G = A @ B.T
    if k.kind == "linear":
        return G
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * G
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-sq / (2.0 * k.sigma**2))


def median_distance(X) -> float:
    """Median pairwise Euclidean distance; 1.0 when it degenerates to 0."""
    X = np.asarray(X, dtype=float)
    if X.shape[0] < 2:
        return 1.0
    med = float(np.median(pdist(X)))
    return med if med > 0 else 1.0
