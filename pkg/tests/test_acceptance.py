"""Acceptance gate: ten end-to-end criteria, each reported as one PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -s`` to see the lines as
they happen; they are also repeated in the terminal summary.
"""

import time

import numpy as np

from conftest import blobs, make_dataset
from featbench.classifiers import (
    ClassifierSpec, SvmParams, forest_train, nn_gradient_check, nn_train, svm_train, tree_train,
)
from featbench.cli import main
from featbench.config import load_config
from featbench.data import GrayImage, SplitConfig, SynthSpec, quantile_bin, stratified_split, synth_generate
from featbench.metrics import ConfusionMatrix, accuracy, report
from featbench.pipeline import run_pipeline
from featbench.radiomics import GlcmParams, glcm_compute, quantize
from featbench.sds import SdsConfig, sds_run
from featbench.selection import chi2_scores, select_top_k, svm_rfe

RESULTS: list[str] = []


def verdict(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} ({detail})"
    RESULTS.append(line)
    print(line)
    assert ok, line


# --- independent oracles ----------------------------------------------------------

def chi2_oracle(column, labels):
    n = len(column)
    values, classes = sorted(set(column)), sorted(set(labels))
    total = 0.0
    for v in values:
        for c in classes:
            obs = sum(1 for x, y in zip(column, labels) if x == v and y == c)
            row = sum(1 for x in column if x == v)
            col = sum(1 for y in labels if y == c)
            exp = row * col / n
            total += (obs - exp) ** 2 / exp
    return total


def glcm_oracle(q, levels, offset, symmetric=True):
    h, w = len(q), len(q[0])
    di, dj = offset
    counts = [[0] * levels for _ in range(levels)]
    for r in range(h):
        for c in range(w):
            if 0 <= r + di < h and 0 <= c + dj < w:
                counts[q[r][c]][q[r + di][c + dj]] += 1
    m = np.array(counts, dtype=float)
    if symmetric:
        m = m + m.T
    return m / m.sum()


def metrics_oracle(counts):
    """Per-class precision/recall from integer tallies, exact fractions as (num, den)."""
    k = len(counts)
    total = sum(sum(r) for r in counts)
    correct = sum(counts[i][i] for i in range(k))
    out = []
    for c in range(k):
        tp = counts[c][c]
        predicted = sum(counts[r][c] for r in range(k))
        actual = sum(counts[c])
        out.append(((tp, predicted), (tp, actual)))
    return (correct, total), out


def _ratio(pair):
    num, den = pair
    return num / den if den else 0.0


# --- criteria ---------------------------------------------------------------------

def test_criterion_01_chi2_oracle():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        n, d, bins = rng.integers(2, 201), rng.integers(1, 11), rng.integers(2, 6)
        k = int(rng.integers(2, 5))
        X = rng.integers(0, bins, size=(n, d))
        y = rng.integers(0, k, size=n)
        got = chi2_scores(make_dataset(X, y, [f"c{i}" for i in range(k)])).scores
        for j in range(d):
            worst = max(worst, abs(got[j] - chi2_oracle(X[:, j].tolist(), y.tolist())))
    elapsed = time.perf_counter() - start
    verdict(1, "chi2 matches brute-force tables", worst <= 1e-9 and elapsed < 5.0,
            f"max abs err {worst:.2e}, {elapsed:.2f}s")


def test_criterion_02_glcm_oracle():
    mismatches = cases = 0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        for levels in (2, 3, 4):
            h, w = rng.integers(2, 9, size=2)
            img = GrayImage.from_array(rng.integers(0, 256, size=(h, w)))
            q = quantize(img, levels).tolist()
            p = GlcmParams(levels=levels)
            for g, off in zip(glcm_compute(img, p), p.offsets):
                cases += 1
                mismatches += not np.array_equal(g.matrix, glcm_oracle(q, levels, off))
    verdict(2, "GLCM equals pair enumeration", mismatches == 0, f"{cases} matrices, {mismatches} mismatches")


def test_criterion_03_svm():
    two = svm_train(make_dataset([[-1.0], [1.0]], [0, 1]), SvmParams(c=1000.0))
    grid = np.linspace(-2, 2, 9)[:, None]
    analytic_err = float(np.abs(two.decision_function(grid) - grid[:, 0]).max())

    sep_ok = all(accuracy(b.labels, svm_train(b).predict(b.features)) == 1.0 for b in (blobs(s) for s in range(5)))

    kkt_worst = 0.0
    p = SvmParams(c=1.0, tol=1e-3)
    for seed in range(5):
        d = synth_generate(SynthSpec(100, 5, 3, n_classes=3, seed=seed))
        for c, m in enumerate(svm_train(d, p).machines):
            y = np.where(d.labels == c, 1.0, -1.0)
            f = m.decision(d.features)
            free = m.support_index[(m.alphas > 1e-8) & (m.alphas < p.c - 1e-8)]
            if free.size:
                kkt_worst = max(kkt_worst, float(np.abs(y[free] * f[free] - 1.0).max()))
    ok = analytic_err <= 1e-2 and sep_ok and kkt_worst <= p.tol
    verdict(3, "SVM analytic case, separability, KKT", ok,
            f"2-point err {analytic_err:.1e}, blobs separated {sep_ok}, free-SV KKT gap {kkt_worst:.1e}")


def test_criterion_04_nn_gradients():
    worst = 0.0
    for seed in range(10):
        d = synth_generate(SynthSpec(60, 4, 2, n_classes=3, seed=seed))
        m = nn_train(d, hidden=6, lr=0.1, epochs=10 * seed + 1, seed=seed)
        worst = max(worst, nn_gradient_check(m, d.features[seed], int(d.labels[seed])))
    verdict(4, "backprop vs central differences", worst < 1e-4, f"max rel err {worst:.2e}")


def test_criterion_05_reductions():
    diff = 0
    for seed in range(20):
        d = synth_generate(SynthSpec(150, 6, 3, n_classes=3, seed=seed))
        q = np.random.default_rng(seed).normal(size=(100, 6))
        f = forest_train(d, n_trees=1, features_per_split=6, seed=seed, bootstrap=False)
        diff += int((f.predict(q) != tree_train(d).predict(q)).sum())
        scores = np.random.default_rng(seed).normal(size=6)
        diff += int((~select_top_k(scores, 6)).sum())
    verdict(5, "1-tree forest == tree, top-d == identity", diff == 0, f"{diff} differing predictions/bits")


def _planted(seed):
    return synth_generate(SynthSpec(500, 20, 5, n_classes=3, seed=seed))


def test_criterion_06_planted_recovery():
    t0 = time.perf_counter()
    rfe_hits = 0
    for seed in range(10):
        d = _planted(seed)
        rfe_hits += bool(svm_rfe(d).top_k_mask(8)[d.meta["informative"]].all())
    t_rfe = time.perf_counter() - t0

    t0 = time.perf_counter()
    sds_found = []
    for seed in range(10):
        d = _planted(seed)
        mask, _ = sds_run(d, SdsConfig(n_agents=50, max_iterations=100, classifier=ClassifierSpec("tree"), seed=seed))
        sds_found.append(int(mask[d.meta["informative"]].sum()))
    t_sds = time.perf_counter() - t0

    t0 = time.perf_counter()
    chi_found = []
    for seed in range(10):
        d = _planted(seed)
        chi_found.append(int(select_top_k(chi2_scores(quantile_bin(d, 10)), 5)[d.meta["informative"]].sum()))
    t_chi = time.perf_counter() - t0

    ok = (rfe_hits >= 8 and np.mean(sds_found) >= 4 and np.mean(chi_found) >= 4
          and max(t_rfe, t_sds, t_chi) < 120)
    verdict(6, "planted-feature recovery", ok,
            f"RFE {rfe_hits}/10 in {t_rfe:.0f}s; SDS mean {np.mean(sds_found):.1f}/5 in {t_sds:.0f}s; "
            f"chi2 mean {np.mean(chi_found):.1f}/5 in {t_chi:.1f}s")


def _best_time(fn, repeat=3):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def test_criterion_07_runtime_and_sds_accuracy():
    t_full = t_sel = 0.0
    acc_full, acc_sel = [], []
    for seed in range(5):
        d = synth_generate(SynthSpec(96, 7129, 50, 2, class_sizes=(86, 10), seed=seed, separation=2.0))
        tr, te = stratified_split(d, SplitConfig(0.65, seed))
        dt, full = _best_time(lambda: svm_train(tr))

        def selected():
            mask = select_top_k(chi2_scores(quantile_bin(tr, 10)), 100)
            return mask, svm_train(tr.subset(columns=mask))

        ds, (mask, model) = _best_time(selected)
        t_full += dt
        t_sel += ds
        acc_full.append(accuracy(te.labels, full.predict(te.features)))
        acc_sel.append(accuracy(te.labels, model.predict(te.features[:, mask])))
    ratio = t_sel / t_full
    runtime_ok = ratio < 0.5 and np.mean(acc_sel) >= np.mean(acc_full) - 0.05

    base, sds = [], []
    tree = ClassifierSpec("tree")
    for seed in range(10):
        tr, te = stratified_split(_planted(seed), SplitConfig(0.65, seed))
        mask, _ = sds_run(tr, SdsConfig(seed=seed))
        base.append(accuracy(te.labels, tree.fit(tr, seed).predict(te.features)))
        sds.append(accuracy(te.labels, tree.fit(tr.subset(columns=mask), seed).predict(te.features[:, mask])))
    sds_ok = np.mean(sds) >= np.mean(base) - 0.02

    verdict(7, "chi2 top-100 speedup on 96x7129; SDS vs no selection", runtime_ok and sds_ok,
            f"time ratio {ratio:.2f}, acc full {np.mean(acc_full):.3f} vs selected {np.mean(acc_sel):.3f}; "
            f"tree acc none {np.mean(base):.3f} vs SDS {np.mean(sds):.3f}")


GRID = """
seed: 7
data:
  synth: {n_samples: 240, n_features: 10, n_informative: 3, n_classes: 3, seed: 2}
selectors:
  - none
  - {chi2: {k: 4}}
  - {kernel_relevance: {k: 4, max_iter: 30}}
  - {svm_rfe: {k: 4}}
  - {sds: {n_agents: 10, max_iterations: 8, classifier: nb}}
classifiers: [svm, tree, {forest: {n_trees: 10}}, nb, {nn: {epochs: 30}}]
"""


def test_criterion_08_cli_determinism(tmp_path):
    cfg = tmp_path / "grid.yaml"
    cfg.write_text(GRID)
    outputs = []
    for k, jobs in enumerate(("1", "1", "3", "8")):
        for fmt in ("markdown", "csv"):
            out = tmp_path / f"r{k}.{fmt}"
            assert main(["run", "--config", str(cfg), "--jobs", jobs, "--format", fmt, "--out", str(out)]) == 0
            outputs.append((fmt, out.read_bytes()))
    md = {b for f, b in outputs if f == "markdown"}
    cs = {b for f, b in outputs if f == "csv"}
    verdict(8, "byte-identical reports across runs and --jobs", len(md) == 1 and len(cs) == 1,
            f"{len(outputs)} reports, {len(md)} distinct markdown, {len(cs)} distinct csv")


def test_criterion_09_leakage_guard(tmp_path):
    cfg = tmp_path / "grid.yaml"
    cfg.write_text(GRID)
    pc = load_config(str(cfg))

    def poison(train, test):
        rng = np.random.default_rng(1)
        test.labels[:] = rng.integers(0, test.n_classes, size=test.n_samples)
        return train, test

    honest, poisoned = run_pipeline(pc), run_pipeline(pc, data_hook=poison)
    same = [np.array_equal(a, b) for i in honest.masks for a, b in zip(honest.masks[i], poisoned.masks[i])]
    verdict(9, "selector masks ignore test labels", all(same), f"{sum(same)}/{len(same)} masks unchanged")


def test_criterion_10_metric_definitions():
    bad = 0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(2, 6))
        counts = rng.integers(0, 40, size=(k, k))
        counts[0, 0] += 1
        r = report(ConfusionMatrix(counts))
        acc, per_class = metrics_oracle(counts.tolist())
        bad += r.accuracy != _ratio(acc)
        for c, (prec, rec) in enumerate(per_class):
            bad += r.per_class[c].precision != _ratio(prec)
            bad += r.per_class[c].recall != _ratio(rec)
        if k == 2:
            cm = ConfusionMatrix(counts)
            bad += (cm.tp, cm.fn, cm.fp, cm.tn) != (counts[0, 0], counts[0, 1], counts[1, 0], counts[1, 1])
    verdict(10, "metrics equal integer-tally definitions", bad == 0, f"{bad} mismatches over 50 matrices")
