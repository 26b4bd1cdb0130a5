"""CART classification trees (Gini impurity) and bagged random forests."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from featbench.data import Dataset
from featbench.errors import DataError

# relative margin under which two split impurities count as tied
_GAIN_TIE = 1e-12


@dataclass(frozen=True)
class TreeModel:
    """Flat node arrays; ``feature[k] < 0`` marks node k as a leaf.

    A sample goes left at node k when ``x[feature[k]] <= threshold[k]``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # leaf class index (majority at internal nodes too)
    n_features: int
    n_classes: int

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=int)
        for k in range(self.n_nodes):
            if self.feature[k] >= 0:
                depth[self.left[k]] = depth[self.right[k]] = depth[k] + 1
        return int(depth.max())

    def apply(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            f = self.feature[node]
            internal = f >= 0
            if not internal.any():
                return node
            r = rows[internal]
            nd = node[internal]
            go_left = X[r, f[internal]] <= self.threshold[nd]
            node[internal] = np.where(go_left, self.left[nd], self.right[nd])

    def predict(self, X) -> np.ndarray:
        return self.value[self.apply(X)].astype(np.int64)


def _majority(counts: np.ndarray) -> int:
    return int(np.argmax(counts))  # first maximum = lowest class index


@njit(cache=True)
def _best_split(X, y, idx, n_classes, feats):
    """Largest Gini decrease over ``feats`` (ascending) for the rows ``idx``.

    Returns (feature, threshold), with feature -1 when every candidate
    column is constant. A later candidate must beat the incumbent by more
    than the tie margin, so ties keep the lowest feature index and then
    the lowest threshold.
    """
    m = idx.shape[0]
    total = np.zeros(n_classes, dtype=np.int64)
    for r in range(m):
        total[y[idx[r]]] += 1
    best = np.inf
    margin = _GAIN_TIE * m
    best_f = -1
    best_thr = 0.0
    vals = np.empty(m)
    left = np.zeros(n_classes, dtype=np.int64)
    for f in feats:
        for r in range(m):
            vals[r] = X[idx[r], f]
        order = np.argsort(vals, kind="mergesort")
        left[:] = 0
        for p in range(m - 1):
            left[y[idx[order[p]]]] += 1
            lo = vals[order[p]]
            hi = vals[order[p + 1]]
            if not hi > lo:
                continue
            nl = p + 1
            nr = m - nl
            sl = 0.0
            sr = 0.0
            for c in range(n_classes):
                sl += left[c] * left[c]
                rc = total[c] - left[c]
                sr += rc * rc
            # m * weighted child Gini
            child = m - sl / nl - sr / nr
            if child < best - margin:
                best = child
                best_f = f
                thr = 0.5 * (lo + hi)
                best_thr = thr if thr < hi else lo
    return best_f, best_thr


def _grow(X, y, n_classes, max_depth, min_split, features_per_split, rng):
    feature, threshold, left, right, value = [], [], [], [], []
    d = X.shape[1]
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    all_feats = np.arange(d, dtype=np.int64)

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(_majority(np.bincount(y[idx], minlength=n_classes)))
        return len(feature) - 1

    stack = [(np.arange(X.shape[0]), 0, new_node(np.arange(X.shape[0])))]
    while stack:
        idx, depth, k = stack.pop()
        yi = y[idx]
        if (
            len(idx) < min_split
            or (max_depth is not None and depth >= max_depth)
            or np.all(yi == yi[0])
        ):
            continue
        if features_per_split is None or features_per_split >= d:
            feats = all_feats
        else:
            feats = np.sort(rng.choice(d, size=features_per_split, replace=False))
        f, thr = _best_split(X, y, idx, n_classes, feats)
        if f < 0:
            continue
        go_left = X[idx, f] <= thr
        li, ri = idx[go_left], idx[~go_left]
        feature[k], threshold[k] = f, thr
        left[k] = new_node(li)
        right[k] = new_node(ri)
        # right pushed first so the left subtree is expanded first
        stack.append((ri, depth + 1, right[k]))
        stack.append((li, depth + 1, left[k]))
    return TreeModel(
        np.array(feature, dtype=np.int64),
        np.array(threshold, dtype=float),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value, dtype=np.int64),
        d,
        n_classes,
    )


def tree_train(train: Dataset, max_depth: int | None = None, min_split: int = 2) -> TreeModel:
    """Grow a CART tree until nodes are pure, hit ``max_depth`` or hold fewer than ``min_split`` samples."""
    if train.n_samples == 0:
        raise DataError("cannot train a decision tree on an empty dataset")
    return _grow(train.features, train.labels, max(train.n_classes, 2), max_depth, min_split, None, None)


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[TreeModel, ...]
    bootstrap_rows: tuple[np.ndarray, ...]
    n_classes: int

    def votes(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        v = np.zeros((X.shape[0], self.n_classes), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for t in self.trees:
            np.add.at(v, (rows, t.predict(X)), 1)
        return v

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.votes(X), axis=1).astype(np.int64)


def forest_train(
    train: Dataset,
    n_trees: int = 100,
    features_per_split: int | None = None,
    seed: int = 0,
    bootstrap: bool = True,
    max_depth: int | None = None,
    min_split: int = 2,
) -> ForestModel:
    """Bagged CART trees with per-node feature subsampling (default ceil(sqrt(d)))."""
    if train.n_samples == 0:
        raise DataError("cannot train a random forest on an empty dataset")
    if n_trees < 1:
        raise ValueError("n_trees must be at least 1")
    n, d = train.features.shape
    k = max(train.n_classes, 2)
    mtry = math.ceil(math.sqrt(d)) if features_per_split is None else features_per_split
    if not 1 <= mtry:
        raise ValueError("features_per_split must be at least 1")
    trees, rows = [], []
    for ss in np.random.SeedSequence(seed).spawn(n_trees):
        rng = np.random.default_rng(ss)
        idx = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        trees.append(_grow(train.features[idx], train.labels[idx], k, max_depth, min_split, mtry, rng))
        rows.append(idx)
    return ForestModel(tuple(trees), tuple(rows), k)


def forest_predict(m: ForestModel, X) -> np.ndarray:
    return m.predict(X)
