"""``featbench`` command line: run / synth / extract.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from featbench.config import FORMATS, load_config, parse_extraction, parse_synth, read_tree
from featbench.data import write_csv, synth_generate
from featbench.errors import ConfigError, DataError
from featbench.pipeline import emit_report, run_pipeline
from featbench.radiomics import images_to_dataset, load_image_directory

log = logging.getLogger("featbench")

EXIT_CONFIG = 2
EXIT_DATA = 3


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.jobs is not None:
        changes["n_jobs"] = args.jobs
    if changes:
        cfg = dataclasses.replace(cfg, **changes)
    fmt = args.format or cfg.output_format
    timing = cfg.timing or args.timing
    rep = run_pipeline(cfg)
    _write(emit_report(rep, fmt, timing), args.out)
    log.info("wrote %d rows", len(rep.rows))
    return 0


def cmd_synth(args) -> int:
    tree = read_tree(args.spec)
    if isinstance(tree, dict) and set(tree) == {"synth"}:
        tree = tree["synth"]
    d = synth_generate(parse_synth(tree, "synth"))
    write_csv(d, args.out)
    log.info("wrote %d x %d synthetic dataset; informative columns %s",
             d.n_samples, d.n_features, d.meta["informative"])
    return 0


def cmd_extract(args) -> int:
    tree = read_tree(args.config) or {}
    if isinstance(tree, dict) and "data" in tree:
        tree = (tree["data"] or {}).get("images", {})
    if isinstance(tree, dict):
        tree = {k: v for k, v in tree.items() if k in ("glcm", "gabor")}
    glcm, bank = parse_extraction(tree, "extract")
    d = images_to_dataset(load_image_directory(args.images), glcm, bank)
    write_csv(d, args.out)
    log.info("wrote %d rows x %d features", d.n_samples, d.n_features)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="featbench", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a benchmark grid from a config file")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--format", choices=FORMATS)
    run.add_argument("--out")
    run.add_argument("--timing", action="store_true", help="append wall-clock columns")
    run.add_argument("--jobs", type=int, help="worker threads for the grid")
    run.set_defaults(func=cmd_run)

    syn = sub.add_parser("synth", help="write a synthetic dataset as CSV")
    syn.add_argument("--spec", required=True)
    syn.add_argument("--out", required=True)
    syn.set_defaults(func=cmd_synth)

    ext = sub.add_parser("extract", help="GLCM + Gabor features from a directory of PGM images")
    ext.add_argument("--images", required=True)
    ext.add_argument("--config", required=True)
    ext.add_argument("--out", required=True)
    ext.set_defaults(func=cmd_extract)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
