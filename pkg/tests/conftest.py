import sys

import numpy as np
import pytest

from featbench.data import Dataset, SynthSpec, synth_generate


def make_dataset(X, y, label_names=None) -> Dataset:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if label_names is None:
        label_names = [f"c{k}" for k in range(max(int(y.max()) + 1, 2))]
    return Dataset(X, [f"f{j}" for j in range(X.shape[1])], y, label_names)


def blobs(seed: int, n: int = 60, d: int = 2, n_classes: int = 2, gap: float = 6.0) -> Dataset:
    """Well separated Gaussian blobs, one per class."""
    rng = np.random.default_rng(seed)
    y = np.arange(n) % n_classes
    centers = rng.normal(0.0, gap, size=(n_classes, d))
    X = centers[y] + rng.normal(0.0, 0.5, size=(n, d))
    return make_dataset(X, y)


@pytest.fixture
def planted():
    return synth_generate(SynthSpec(n_samples=300, n_features=12, n_informative=3, n_classes=3, seed=4))


@pytest.fixture
def write_config(tmp_path):
    def _write(text: str, name: str = "cfg.yaml"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return _write


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
