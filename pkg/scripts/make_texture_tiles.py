"""Write a toy two-class PGM tile directory for the ``extract`` command.

Class "striped" tiles carry a vertical sinusoid under noise; class "noise"
tiles are noise only. Layout: <out>/<label>/<index>.pgm

    python3 scripts/make_texture_tiles.py --out tiles --per-class 40
"""

import argparse
import math
import os

import numpy as np

from featbench.data import GrayImage, write_pgm


def tile(rng, size, striped):
    base = rng.normal(128.0, 30.0, size=(size, size))
    if striped:
        f = rng.uniform(0.2, 0.3)
        base += 60.0 * np.cos(2 * math.pi * f * np.arange(size) + rng.uniform(0, 2 * math.pi))[None, :]
    return GrayImage.from_array(np.clip(np.round(base), 0, 255))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", required=True)
    ap.add_argument("--per-class", type=int, default=40)
    ap.add_argument("--size", type=int, default=48)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    for label, striped in (("noise", False), ("striped", True)):
        os.makedirs(os.path.join(args.out, label), exist_ok=True)
        for k in range(args.per_class):
            write_pgm(tile(rng, args.size, striped), os.path.join(args.out, label, f"{k:03d}.pgm"))
    print(f"wrote {2 * args.per_class} tiles under {args.out}")


if __name__ == "__main__":
    main()
