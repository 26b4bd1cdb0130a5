"""SVM, CART tree, random forest, Gaussian naive Bayes and a one-hidden-layer network."""

from __future__ import annotations

from dataclasses import dataclass, field

from featbench.classifiers.bayes import NbModel, nb_predict, nb_train
from featbench.classifiers.kernels import KernelParams, kernel_eval, kernel_matrix, median_distance
from featbench.classifiers.nn import NnModel, nn_gradient_check, nn_predict, nn_train
from featbench.classifiers.svm import SvmModel, SvmParams, svm_predict, svm_train
from featbench.classifiers.tree import ForestModel, TreeModel, forest_predict, forest_train, tree_train
from featbench.data import Dataset

DISPLAY_NAMES = {
    "svm": "SVM",
    "tree": "decision tree",
    "forest": "random forest",
    "nb": "Naïve Bayes",
    "nn": "neural network",
}

# accepted keyword arguments per kind
PARAM_KEYS = {
    "svm": {"c", "kernel", "sigma", "tol", "max_iter"},
    "tree": {"max_depth", "min_split"},
    "forest": {"n_trees", "features_per_split", "bootstrap", "max_depth", "min_split"},
    "nb": set(),
    "nn": {"hidden", "lr", "epochs", "standardize"},
}


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in PARAM_KEYS:
            raise ValueError(f"unknown classifier {self.kind!r}; expected one of {sorted(PARAM_KEYS)}")
        extra = set(self.params) - PARAM_KEYS[self.kind]
        if extra:
            raise ValueError(f"unknown {self.kind} parameter(s): {sorted(extra)}")

    @property
    def display_name(self) -> str:
        return DISPLAY_NAMES[self.kind]

    def fit(self, train: Dataset, seed: int = 0):
        """Train and return a model exposing ``predict(X)``."""
        p = self.params
        if self.kind == "svm":
            kernel = KernelParams(p.get("kernel", "linear"), p.get("sigma"))
            sp = SvmParams(c=p.get("c", 1.0), kernel=kernel, tol=p.get("tol", 1e-3),
                           max_iter=p.get("max_iter", 1_000_000))
            return svm_train(train, sp)
        if self.kind == "tree":
            return tree_train(train, p.get("max_depth"), p.get("min_split", 2))
        if self.kind == "forest":
            return forest_train(train, p.get("n_trees", 100), p.get("features_per_split"), seed,
                                p.get("bootstrap", True), p.get("max_depth"), p.get("min_split", 2))
        if self.kind == "nb":
            return nb_train(train)
        return nn_train(train, p.get("hidden", 16), p.get("lr", 0.01), p.get("epochs", 200), seed,
                        p.get("standardize", True))


__all__ = [
    "ClassifierSpec", "DISPLAY_NAMES", "ForestModel", "KernelParams", "NbModel", "NnModel",
    "SvmModel", "SvmParams", "TreeModel", "forest_predict", "forest_train", "kernel_eval",
    "kernel_matrix", "median_distance", "nb_predict", "nb_train", "nn_gradient_check",
    "nn_predict", "nn_train", "svm_predict", "svm_train", "tree_train",
]
