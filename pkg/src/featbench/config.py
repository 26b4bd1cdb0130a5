"""Pipeline configuration: a YAML/JSON key-value tree parsed into dataclasses.

Layout::

    seed: 0
    repeats: 1
    n_jobs: 1
    data:
      synth: {n_samples: 1000, n_features: 25, n_informative: 5, n_classes: 3}
      # or  csv: {path: lung.csv, label_column: Level, label_order: [low, medium, high]}
      # or  images: {dir: tiles/, glcm: {levels: 8}, gabor: {frequencies: [0.1, 0.25]}}
    preprocess: {clean: true, standardize: false}
    split: {train_fraction: 0.65, stratified: true}
    selectors: [none, {chi2: {k: 10}}, {sds: {n_agents: 50, classifier: tree}}]
    classifiers: [svm, tree, {forest: {n_trees: 100}}, nb, nn]
    output: {format: markdown, timing: false}

Every validation failure raises ConfigError naming the offending path,
e.g. ``selectors[1].chi2.k``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, fields

import yaml

from featbench.classifiers import PARAM_KEYS as CLASSIFIER_KEYS
from featbench.classifiers import ClassifierSpec
from featbench.data import SynthSpec
from featbench.errors import ConfigError
from featbench.radiomics import DEFAULT_OFFSETS, GaborParams, GlcmParams, default_gabor_bank

SELECTOR_KEYS = {
    "none": {"name"},
    "chi2": {"name", "k", "bins"},
    "kernel_relevance": {"name", "k", "sigma", "tol", "max_iter", "standardize"},
    "svm_rfe": {"name", "k", "step", "c", "tol"},
    "sds": {"name", "n_agents", "max_iterations", "mutation_rate", "init_density",
            "train_fraction", "classifier", "convergence_fraction"},
}
REQUIRES_K = {"chi2", "kernel_relevance", "svm_rfe"}
SELECTOR_DISPLAY = {
    "none": "None",
    "chi2": "Chi2",
    "kernel_relevance": "Kernel",
    "svm_rfe": "SVM-RFE",
    "sds": "SDS",
}
FORMATS = ("markdown", "csv")


@dataclass(frozen=True)
class SelectorSpec:
    kind: str
    params: dict = field(default_factory=dict)

    @property
    def display_name(self) -> str:
        return self.params.get("name") or SELECTOR_DISPLAY[self.kind]


@dataclass(frozen=True)
class DataSource:
    kind: str  # csv | synth | images
    params: dict


@dataclass(frozen=True)
class PipelineConfig:
    data: DataSource
    selectors: tuple[SelectorSpec, ...]
    classifiers: tuple[ClassifierSpec, ...]
    seed: int = 0
    repeats: int = 1
    n_jobs: int = 1
    clean: bool = True
    standardize: bool = False
    train_fraction: float = 0.65
    stratified: bool = True
    output_format: str = "markdown"
    timing: bool = False
    base_dir: str = "."


def _mapping(node, path: str) -> dict:
    if node is None:
        return {}
    if not isinstance(node, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(node).__name__}")
    return node


def _check_keys(node: dict, allowed, path: str) -> None:
    extra = sorted(set(node) - set(allowed))
    if extra:
        raise ConfigError(f"{path}: unknown key(s) {extra}; allowed {sorted(allowed)}")


def _int(node, key, path, default=None, lo=None):
    v = node.get(key, default)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}.{key}: expected an integer, got {v!r}")
    if lo is not None and v < lo:
        raise ConfigError(f"{path}.{key}: must be >= {lo}, got {v}")
    return v


def _real(node, key, path, default=None, lo=None, hi=None, lo_open=False, hi_open=False):
    v = node.get(key, default)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{path}.{key}: expected a finite number, got {v!r}")
    if lo is not None and (v < lo or (lo_open and v == lo)):
        raise ConfigError(f"{path}.{key}: out of range, got {v}")
    if hi is not None and (v > hi or (hi_open and v == hi)):
        raise ConfigError(f"{path}.{key}: out of range, got {v}")
    return float(v)


def _bool(node, key, path, default):
    v = node.get(key, default)
    if not isinstance(v, bool):
        raise ConfigError(f"{path}.{key}: expected true/false, got {v!r}")
    return v


def _named_entry(entry, path: str, allowed: dict) -> tuple[str, dict, str]:
    """``name`` or ``{name: {params}}`` -> (name, params, param path)."""
    if isinstance(entry, str):
        name, params = entry, {}
    elif isinstance(entry, dict) and len(entry) == 1:
        name, params = next(iter(entry.items()))
    else:
        raise ConfigError(f"{path}: expected a name or a single-key mapping, got {entry!r}")
    if name not in allowed:
        raise ConfigError(f"{path}: unknown entry {name!r}; expected one of {sorted(allowed)}")
    sub = f"{path}.{name}"
    params = _mapping(params, sub)
    _check_keys(params, allowed[name], sub)
    return name, dict(params), sub


def parse_classifier(entry, path: str) -> ClassifierSpec:
    kind, params, sub = _named_entry(entry, path, CLASSIFIER_KEYS)
    if kind == "svm":
        kern = params.get("kernel", "linear")
        if kern not in ("linear", "gaussian"):
            raise ConfigError(f"{sub}.kernel: expected 'linear' or 'gaussian', got {kern!r}")
        _real(params, "c", sub, lo=0, lo_open=True)
        _real(params, "sigma", sub, lo=0, lo_open=True)
        _real(params, "tol", sub, lo=0, lo_open=True)
        _int(params, "max_iter", sub, lo=1)
    elif kind in ("tree", "forest"):
        _int(params, "max_depth", sub, lo=0)
        _int(params, "min_split", sub, lo=2)
        if kind == "forest":
            _int(params, "n_trees", sub, lo=1)
            _int(params, "features_per_split", sub, lo=1)
            _bool(params, "bootstrap", sub, True)
    elif kind == "nn":
        _int(params, "hidden", sub, lo=1)
        _real(params, "lr", sub, lo=0, lo_open=True)
        _int(params, "epochs", sub, lo=1)
        _bool(params, "standardize", sub, True)
    return ClassifierSpec(kind, params)


def parse_selector(entry, path: str) -> SelectorSpec:
    kind, params, sub = _named_entry(entry, path, SELECTOR_KEYS)
    if kind in REQUIRES_K and "k" not in params:
        raise ConfigError(f"{sub}.k: required (number of features to keep)")
    _int(params, "k", sub, lo=1)
    name = params.get("name")
    if name is not None and (not isinstance(name, str) or not name.strip()):
        raise ConfigError(f"{sub}.name: must be a nonempty string")
    if kind == "chi2":
        _int(params, "bins", sub, lo=2)
    elif kind == "kernel_relevance":
        _real(params, "sigma", sub, lo=0, lo_open=True)
        _real(params, "tol", sub, lo=0, lo_open=True)
        _int(params, "max_iter", sub, lo=1)
        _bool(params, "standardize", sub, True)
    elif kind == "svm_rfe":
        step = params.get("step", 1)
        ok = (isinstance(step, int) and not isinstance(step, bool) and step >= 1) or (
            isinstance(step, float) and 0 < step < 1)
        if not ok:
            raise ConfigError(f"{sub}.step: expected an integer >= 1 or a fraction in (0, 1), got {step!r}")
        _real(params, "c", sub, lo=0, lo_open=True)
        _real(params, "tol", sub, lo=0, lo_open=True)
    elif kind == "sds":
        _int(params, "n_agents", sub, lo=1)
        _int(params, "max_iterations", sub, lo=0)
        _real(params, "mutation_rate", sub, lo=0, hi=1)
        _real(params, "init_density", sub, lo=0, hi=1, lo_open=True, hi_open=True)
        _real(params, "train_fraction", sub, lo=0, hi=1, lo_open=True, hi_open=True)
        _real(params, "convergence_fraction", sub, lo=0, hi=1, lo_open=True)
        if "classifier" in params:
            params["classifier"] = parse_classifier(params["classifier"], f"{sub}.classifier")
            if params["classifier"].kind not in ("tree", "nb", "nn"):
                raise ConfigError(f"{sub}.classifier: SDS fitness uses tree, nb or nn")
    return SelectorSpec(kind, params)


def parse_synth(node, path: str) -> SynthSpec:
    node = _mapping(node, path)
    allowed = {f.name for f in fields(SynthSpec)}
    _check_keys(node, allowed, path)
    kw = {}
    for key in ("n_samples", "n_features", "n_informative", "n_classes", "seed"):
        if key in node:
            kw[key] = _int(node, key, path, lo=0)
    for key in ("noise_scale", "separation"):
        if key in node:
            kw[key] = _real(node, key, path)
    if "class_sizes" in node:
        sizes = node["class_sizes"]
        if not isinstance(sizes, list) or not all(isinstance(s, int) and s >= 0 for s in sizes):
            raise ConfigError(f"{path}.class_sizes: expected a list of nonnegative integers")
        kw["class_sizes"] = tuple(sizes)
    try:
        return SynthSpec(**kw)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _label_order(node, path):
    order = node.get("label_order")
    if order is None:
        return None
    if not isinstance(order, list) or not order:
        raise ConfigError(f"{path}.label_order: expected a nonempty list of class names")
    for i, name in enumerate(order):
        if not isinstance(name, str) or not name.strip():
            raise ConfigError(f"{path}.label_order[{i}]: class names must be nonempty strings")
    if len(set(order)) != len(order):
        raise ConfigError(f"{path}.label_order: duplicate class names")
    return list(order)


def parse_extraction(node, path: str) -> tuple[GlcmParams, list[GaborParams]]:
    node = _mapping(node, path)
    g = _mapping(node.get("glcm"), f"{path}.glcm")
    _check_keys(g, {"levels", "offsets", "symmetric", "normalize"}, f"{path}.glcm")
    offsets = g.get("offsets", [list(o) for o in DEFAULT_OFFSETS])
    if not isinstance(offsets, list) or not all(
            isinstance(o, list) and len(o) == 2 and all(isinstance(v, int) for v in o) for o in offsets):
        raise ConfigError(f"{path}.glcm.offsets: expected a list of [di, dj] integer pairs")
    try:
        glcm = GlcmParams(_int(g, "levels", f"{path}.glcm", 8, lo=2), tuple(tuple(o) for o in offsets),
                          _bool(g, "symmetric", f"{path}.glcm", True), _bool(g, "normalize", f"{path}.glcm", True))
    except ValueError as exc:
        raise ConfigError(f"{path}.glcm: {exc}") from None
    gb = _mapping(node.get("gabor"), f"{path}.gabor")
    _check_keys(gb, {"thetas", "frequencies"}, f"{path}.gabor")
    kw = {}
    for key in ("thetas", "frequencies"):
        if key in gb:
            vals = gb[key]
            if not isinstance(vals, list) or not vals or not all(
                    isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals):
                raise ConfigError(f"{path}.gabor.{key}: expected a nonempty list of numbers")
            kw[key] = tuple(float(v) for v in vals)
    try:
        bank = default_gabor_bank(**kw)
    except ValueError as exc:
        raise ConfigError(f"{path}.gabor: {exc}") from None
    return glcm, bank


def parse_data(node, path: str = "data") -> DataSource:
    node = _mapping(node, path)
    if len(node) != 1:
        raise ConfigError(f"{path}: expected exactly one of csv, synth, images")
    kind, body = next(iter(node.items()))
    sub = f"{path}.{kind}"
    if kind == "synth":
        return DataSource("synth", {"spec": parse_synth(body, sub)})
    body = _mapping(body, sub)
    if kind == "csv":
        _check_keys(body, {"path", "label_column", "label_order"}, sub)
        for key in ("path", "label_column"):
            if not isinstance(body.get(key), str) or not body[key]:
                raise ConfigError(f"{sub}.{key}: required string")
        return DataSource("csv", {"path": body["path"], "label_column": body["label_column"],
                                  "label_order": _label_order(body, sub)})
    if kind == "images":
        _check_keys(body, {"dir", "glcm", "gabor", "label_order"}, sub)
        if not isinstance(body.get("dir"), str) or not body["dir"]:
            raise ConfigError(f"{sub}.dir: required string")
        glcm, bank = parse_extraction(body, sub)
        return DataSource("images", {"dir": body["dir"], "glcm": glcm, "bank": bank,
                                     "label_order": _label_order(body, sub)})
    raise ConfigError(f"{path}: unknown data source {kind!r}; expected csv, synth or images")


def parse_config(tree, base_dir: str = ".") -> PipelineConfig:
    tree = _mapping(tree, "<root>")
    _check_keys(tree, {"seed", "repeats", "n_jobs", "data", "preprocess", "split",
                       "selectors", "classifiers", "output"}, "<root>")
    if "data" not in tree:
        raise ConfigError("data: required")
    data = parse_data(tree["data"])
    pre = _mapping(tree.get("preprocess"), "preprocess")
    _check_keys(pre, {"clean", "standardize"}, "preprocess")
    split = _mapping(tree.get("split"), "split")
    _check_keys(split, {"train_fraction", "stratified"}, "split")
    out = _mapping(tree.get("output"), "output")
    _check_keys(out, {"format", "timing"}, "output")
    fmt = out.get("format", "markdown")
    if fmt not in FORMATS:
        raise ConfigError(f"output.format: expected one of {FORMATS}, got {fmt!r}")
    sels = tree.get("selectors", ["none"])
    if not isinstance(sels, list) or not sels:
        raise ConfigError("selectors: expected a nonempty list")
    clfs = tree.get("classifiers")
    if not isinstance(clfs, list) or not clfs:
        raise ConfigError("classifiers: expected a nonempty list")
    return PipelineConfig(
        data=data,
        selectors=tuple(parse_selector(s, f"selectors[{i}]") for i, s in enumerate(sels)),
        classifiers=tuple(parse_classifier(c, f"classifiers[{i}]") for i, c in enumerate(clfs)),
        seed=_int(tree, "seed", "<root>", 0, lo=0),
        repeats=_int(tree, "repeats", "<root>", 1, lo=1),
        n_jobs=_int(tree, "n_jobs", "<root>", 1, lo=1),
        clean=_bool(pre, "clean", "preprocess", True),
        standardize=_bool(pre, "standardize", "preprocess", False),
        train_fraction=_real(split, "train_fraction", "split", 0.65, lo=0, hi=1, lo_open=True, hi_open=True),
        stratified=_bool(split, "stratified", "split", True),
        output_format=fmt,
        timing=_bool(out, "timing", "output", False),
        base_dir=base_dir,
    )


def read_tree(path):
    """Parse a YAML (or JSON) file into a plain tree."""
    if not os.path.isfile(path):
        raise ConfigError(f"{path}: config file not found")
    with open(path) as fh:
        try:
            return yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: cannot parse: {exc}") from None


def load_config(path) -> PipelineConfig:
    return parse_config(read_tree(path), base_dir=os.path.dirname(os.path.abspath(path)))
