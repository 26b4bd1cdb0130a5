"""Wall time of chi2 top-k selection + linear SVM against full-feature SVM on
expression-shaped synthetic data (96 samples x 7129 features, 86/10 classes).

    python3 scripts/microarray_runtime.py --seeds 10 --k 100
"""

import argparse
import time

import numpy as np

from featbench.classifiers import svm_train
from featbench.data import SplitConfig, SynthSpec, quantile_bin, stratified_split, synth_generate
from featbench.metrics import accuracy
from featbench.selection import chi2_scores, select_top_k


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--k", type=int, default=100)
    ap.add_argument("--separation", type=float, default=2.0)
    ap.add_argument("--informative", type=int, default=50)
    ap.add_argument("--repeat", type=int, default=3, help="timing repeats; the minimum is kept")
    args = ap.parse_args()

    print("seed  full_ms  select+train_ms  ratio  acc_full  acc_selected")
    ratios = []
    for seed in range(args.seeds):
        spec = SynthSpec(96, 7129, args.informative, 2, class_sizes=(86, 10), seed=seed, separation=args.separation)
        tr, te = stratified_split(synth_generate(spec), SplitConfig(0.65, seed))
        t_full, full = best_of(lambda: svm_train(tr), args.repeat)

        def selected():
            mask = select_top_k(chi2_scores(quantile_bin(tr, 10)), args.k)
            return mask, svm_train(tr.subset(columns=mask))

        t_sel, (mask, model) = best_of(selected, args.repeat)
        ratios.append(t_sel / t_full)
        print(f"{seed:4d}  {1e3 * t_full:7.1f}  {1e3 * t_sel:15.1f}  {t_sel / t_full:5.2f}  "
              f"{accuracy(te.labels, full.predict(te.features)):8.3f}  "
              f"{accuracy(te.labels, model.predict(te.features[:, mask])):12.3f}")
    print(f"median ratio {np.median(ratios):.2f}")


if __name__ == "__main__":
    main()
