"""Run a selector x classifier grid from a config file, averaged over repeats.

    python3 scripts/run_grid.py configs/full_grid.yaml --repeats 5 --timing
"""

import argparse
import dataclasses

from featbench.config import load_config
from featbench.pipeline import emit_report, run_pipeline


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--repeats", type=int)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--format", choices=("markdown", "csv"), default="markdown")
    ap.add_argument("--timing", action="store_true")
    ap.add_argument("--out")
    args = ap.parse_args()

    cfg = load_config(args.config)
    changes = {"n_jobs": args.jobs}
    if args.repeats:
        changes["repeats"] = args.repeats
    cfg = dataclasses.replace(cfg, **changes)
    rep = run_pipeline(cfg)
    text = emit_report(rep, args.format, args.timing)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    print(f"{rep.n_samples} samples x {rep.n_features} features, {cfg.repeats} repeat(s)\n")
    print(text, end="")


if __name__ == "__main__":
    main()
