"""Benchmark runner: preprocess, split, select, classify, score, tabulate."""

from __future__ import annotations

import csv
import io
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from featbench.classifiers import ClassifierSpec, KernelParams, SvmParams
from featbench.config import PipelineConfig, SelectorSpec
from featbench.data import Dataset, SplitConfig, clean, load_csv, quantile_bin, standardize, stratified_split, synth_generate
from featbench.errors import ConfigError, DataError
from featbench.metrics import confusion, report
from featbench.radiomics import images_to_dataset, load_image_directory
from featbench.sds import SdsConfig, sds_run
from featbench.selection import chi2_scores, kernel_relevance_weights, select_top_k, svm_rfe


@dataclass
class BenchRow:
    selector: str
    classifier: str
    n_features: float
    accuracy: float
    precision: list[float]
    recall: list[float]
    wall_time_select_ms: float
    wall_time_train_ms: float

    @property
    def name(self) -> str:
        return f"{self.selector}-{self.classifier}"


@dataclass
class BenchReport:
    rows: list[BenchRow]
    label_names: list[str]
    masks: dict[int, list[np.ndarray]] = field(default_factory=dict)  # selector index -> one mask per repeat
    n_samples: int = 0
    n_features: int = 0


def load_source(cfg: PipelineConfig) -> Dataset:
    src = cfg.data
    p = src.params
    if src.kind == "synth":
        return synth_generate(p["spec"])
    if src.kind == "csv":
        path = p["path"] if os.path.isabs(p["path"]) else os.path.join(cfg.base_dir, p["path"])
        return load_csv(path, p["label_column"], p["label_order"])
    root = p["dir"] if os.path.isabs(p["dir"]) else os.path.join(cfg.base_dir, p["dir"])
    return images_to_dataset(load_image_directory(root), p["glcm"], p["bank"], p["label_order"])


def _top_k(spec: SelectorSpec, index: int, d: int) -> int:
    k = spec.params["k"]
    if k > d:
        raise ConfigError(f"selectors[{index}].{spec.kind}.k: {k} exceeds the {d} available features")
    return k


def fit_selector(spec: SelectorSpec, train: Dataset, seed: int, index: int = 0) -> np.ndarray:
    """Feature mask chosen from the training partition alone."""
    p = spec.params
    d = train.n_features
    if spec.kind == "none":
        return np.ones(d, dtype=bool)
    if spec.kind == "chi2":
        return select_top_k(chi2_scores(quantile_bin(train, p.get("bins", 10))), _top_k(spec, index, d))
    if spec.kind == "kernel_relevance":
        scores = kernel_relevance_weights(train, KernelParams("gaussian", p.get("sigma")),
                                          p.get("tol", 1e-4), p.get("max_iter", 200), p.get("standardize", True))
        return select_top_k(scores, _top_k(spec, index, d))
    if spec.kind == "svm_rfe":
        sp = SvmParams(c=p.get("c", 1.0), tol=p.get("tol", 1e-3))
        return svm_rfe(train, sp, p.get("step", 1)).top_k_mask(_top_k(spec, index, d))
    sds_keys = ("n_agents", "max_iterations", "mutation_rate", "init_density", "convergence_fraction")
    kw = {key: p[key] for key in sds_keys if key in p}
    if "classifier" in p:
        kw["classifier"] = p["classifier"]
    cfg = SdsConfig(fitness_split=SplitConfig(p.get("train_fraction", 0.8)), seed=seed, **kw)
    mask, _ = sds_run(train, cfg)
    return mask


def _evaluate(clf: ClassifierSpec, train: Dataset, test: Dataset, seed: int, n_classes: int):
    t0 = time.perf_counter()
    model = clf.fit(train, seed)
    train_ms = (time.perf_counter() - t0) * 1000.0
    pred = model.predict(test.features)
    return report(confusion(test.labels, pred, n_classes)), train_ms


def _map(fn, items, n_jobs):
    if n_jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, items))  # preserves submission order


def run_pipeline(cfg: PipelineConfig,
                 data_hook: Callable[[Dataset, Dataset], tuple[Dataset, Dataset]] | None = None) -> BenchReport:
    """Run every (selector, classifier) cell; rows follow config order.

    Selectors only ever see the training partition. ``data_hook`` may
    rewrite (train, test) right after splitting; tests use it to tamper
    with the held-out part.
    """
    try:
        data = load_source(cfg)
    except DataError as exc:
        raise DataError(f"loading data: {exc}") from None
    if cfg.clean:
        data = clean(data)
    if data.n_samples == 0:
        raise DataError("no samples left after cleaning")
    k = max(data.n_classes, 2)
    n_sel, n_clf = len(cfg.selectors), len(cfg.classifiers)
    acc = np.zeros((n_sel, n_clf))
    prec = np.zeros((n_sel, n_clf, k))
    rec = np.zeros((n_sel, n_clf, k))
    t_train = np.zeros((n_sel, n_clf))
    t_sel = np.zeros(n_sel)
    n_kept = np.zeros(n_sel)
    masks: dict[int, list[np.ndarray]] = {i: [] for i in range(n_sel)}

    for r in range(cfg.repeats):
        seed = cfg.seed + r
        try:
            train, test = stratified_split(data, SplitConfig(cfg.train_fraction, seed, cfg.stratified))
        except DataError as exc:
            raise DataError(f"splitting: {exc}") from None
        if cfg.standardize:
            train, test = standardize(train, test)
        if data_hook is not None:
            train, test = data_hook(train, test)

        def select(i):
            t0 = time.perf_counter()
            try:
                mask = fit_selector(cfg.selectors[i], train, seed, i)
            except DataError as exc:
                raise DataError(f"selector {cfg.selectors[i].kind}: {exc}") from None
            return mask, (time.perf_counter() - t0) * 1000.0

        selected = _map(select, range(n_sel), cfg.n_jobs)

        def cell(ij):
            i, j = ij
            mask = selected[i][0]
            try:
                return _evaluate(cfg.classifiers[j], train.subset(columns=mask), test.subset(columns=mask), seed, k)
            except DataError as exc:
                raise DataError(f"classifier {cfg.classifiers[j].kind}: {exc}") from None

        grid = [(i, j) for i in range(n_sel) for j in range(n_clf)]
        results = _map(cell, grid, cfg.n_jobs)
        for i, (mask, ms) in enumerate(selected):
            masks[i].append(mask)
            t_sel[i] += ms
            n_kept[i] += mask.sum()
        for (i, j), (rep, ms) in zip(grid, results):
            acc[i, j] += rep.accuracy
            prec[i, j] += [m.precision for m in rep.per_class]
            rec[i, j] += [m.recall for m in rep.per_class]
            t_train[i, j] += ms

    n = cfg.repeats
    rows = [
        BenchRow(
            cfg.selectors[i].display_name, cfg.classifiers[j].display_name, n_kept[i] / n,
            acc[i, j] / n, (prec[i, j] / n).tolist(), (rec[i, j] / n).tolist(), t_sel[i] / n, t_train[i, j] / n,
        )
        for i in range(n_sel) for j in range(n_clf)
    ]
    label_names = data.label_names + [f"class{c}" for c in range(data.n_classes, k)]
    return BenchReport(rows, label_names, masks, data.n_samples, data.n_features)


def report_columns(labels: list[str], timing: bool) -> list[str]:
    cols = ["Method", "Classification accuracy"]
    cols += [f"Precision for {name}" for name in labels]
    cols += [f"Recall for {name}" for name in labels]
    cols.append("Features")
    if timing:
        cols += ["Select ms", "Train ms"]
    return cols


def _fmt_count(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else f"{x:.1f}"


def report_table(r: BenchReport, timing: bool = False) -> list[list[str]]:
    out = [report_columns(r.label_names, timing)]
    for row in r.rows:
        cells = [row.name, f"{100.0 * row.accuracy:.2f}"]
        cells += [f"{v:.4f}" for v in row.precision]
        cells += [f"{v:.4f}" for v in row.recall]
        cells.append(_fmt_count(row.n_features))
        if timing:
            cells += [f"{row.wall_time_select_ms:.2f}", f"{row.wall_time_train_ms:.2f}"]
        out.append(cells)
    return out


def emit_report(r: BenchReport, fmt: str = "markdown", timing: bool = False) -> str:
    """Render as a markdown table or CSV.

    Accuracy is a percentage with 2 decimals and the other metrics use 4.
    Wall-clock columns appear only with ``timing=True``, so the default
    output is byte-reproducible.
    """
    if not r.rows:
        raise ValueError("empty report")
    table = report_table(r, timing)
    if fmt == "csv":
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(table)
        return buf.getvalue()
    if fmt != "markdown":
        raise ValueError(f"unknown report format {fmt!r}")
    header, body = table[0], table[1:]
    lines = ["| " + " | ".join(header) + " |",
             "|" + "|".join([":---"] + ["---:"] * (len(header) - 1)) + "|"]
    lines += ["| " + " | ".join(cells) + " |" for cells in body]
    return "\n".join(lines) + "\n"
