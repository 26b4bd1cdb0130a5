"""Datasets, CSV/PGM ingestion, preprocessing, splitting and synthetic data."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from featbench.errors import DataError

MISSING_LABEL = -1


@dataclass
class Dataset:
    """Feature matrix plus per-sample class indices.

    Missing feature cells are NaN and missing labels are ``MISSING_LABEL``
    until :func:`clean` drops them.
    """

    features: np.ndarray
    feature_names: list[str]
    labels: np.ndarray
    label_names: list[str]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        if self.features.ndim == 1:
            self.features = self.features.reshape(-1, len(self.feature_names))
        self.labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        self.feature_names = list(self.feature_names)
        self.label_names = list(self.label_names)
        n, d = self.features.shape
        if n != len(self.labels):
            raise DataError(f"{n} feature rows but {len(self.labels)} labels")
        if d != len(self.feature_names):
            raise DataError(f"{d} feature columns but {len(self.feature_names)} names")
        if n and self.labels.max() >= len(self.label_names):
            raise DataError("label index outside label vocabulary")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.label_names)

    def subset(self, rows=None, columns=None) -> "Dataset":
        """Row and/or column selection; ``columns`` may be a boolean mask."""
        X, y, names = self.features, self.labels, self.feature_names
        meta = dict(self.meta)
        if rows is not None:
            X, y = X[rows], y[rows]
        if columns is not None:
            cols = np.flatnonzero(columns) if np.asarray(columns).dtype == bool else np.asarray(columns, dtype=int)
            X = X[:, cols]
            names = [names[c] for c in cols]
            meta.pop("informative", None)
        return Dataset(X, names, y, self.label_names, meta)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels[self.labels >= 0], minlength=self.n_classes)


@dataclass(frozen=True)
class SplitConfig:
    train_fraction: float = 0.65
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")


@dataclass
class GrayImage:
    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise DataError(f"image dimensions must be positive, got {self.width}x{self.height}")
        self.pixels = np.asarray(self.pixels, dtype=np.uint8).reshape(-1)
        if self.pixels.size != self.width * self.height:
            raise DataError("pixel count does not match width x height")

    @property
    def array(self) -> np.ndarray:
        return self.pixels.reshape(self.height, self.width)

    @classmethod
    def from_array(cls, arr) -> "GrayImage":
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise DataError("image array must be 2-D")
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise DataError("pixel intensities must lie in [0, 255]")
        return cls(arr.shape[1], arr.shape[0], arr.astype(np.uint8).ravel())


@dataclass(frozen=True)
class SynthSpec:
    n_samples: int = 500
    n_features: int = 20
    n_informative: int = 5
    n_classes: int = 2
    noise_scale: float = 1.0
    seed: int = 0
    separation: float = 1.0
    class_sizes: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.n_samples < 1 or self.n_features < 1:
            raise ValueError("n_samples and n_features must be positive")
        if not 0 <= self.n_informative <= self.n_features:
            raise ValueError("n_informative must lie in [0, n_features]")
        if self.n_classes < 2:
            raise ValueError("n_classes must be at least 2")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be nonnegative")
        if self.class_sizes is not None:
            if len(self.class_sizes) != self.n_classes or sum(self.class_sizes) != self.n_samples:
                raise ValueError("class_sizes must have n_classes entries summing to n_samples")


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def load_csv(path, label_column: str, label_names: Sequence[str] | None = None) -> Dataset:
    """Read a header-first, comma-delimited table.

    Every column except ``label_column`` must hold reals or empty cells
    (missing). Label vocabulary follows first appearance unless
    ``label_names`` gives an explicit order.
    """
    if not os.path.isfile(path):
        raise DataError(f"no such file: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if label_column not in header:
            raise DataError(f"{path}: unknown label column {label_column!r}")
        li = header.index(label_column)
        feat_cols = [j for j in range(len(header)) if j != li]
        vocab = list(label_names) if label_names is not None else []
        fixed_vocab = label_names is not None
        rows, labels = [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(header):
                raise DataError(f"{path}: row {lineno} has {len(rec)} cells, expected {len(header)}")
            values = []
            for j in feat_cols:
                cell = rec[j].strip()
                if cell == "":
                    values.append(math.nan)
                    continue
                try:
                    values.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}: row {lineno}, column {header[j]!r}: cannot parse {cell!r} as a number"
                    ) from None
            lab = rec[li].strip()
            if lab == "":
                labels.append(MISSING_LABEL)
            else:
                if lab not in vocab:
                    if fixed_vocab:
                        raise DataError(f"{path}: row {lineno}: label {lab!r} not in {vocab}")
                    vocab.append(lab)
                labels.append(vocab.index(lab))
            rows.append(values)
    names = [header[j] for j in feat_cols]
    X = np.array(rows, dtype=float).reshape(len(rows), len(names))
    return Dataset(X, names, np.array(labels, dtype=np.int64), vocab)


def write_csv(d: Dataset, path, label_column: str = "label") -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(d.feature_names) + [label_column])
        for row, lab in zip(d.features, d.labels):
            cells = ["" if math.isnan(v) else repr(float(v)) for v in row]
            cells.append("" if lab < 0 else d.label_names[lab])
            w.writerow(cells)


# ---------------------------------------------------------------------------
# Preprocessing
# ---------------------------------------------------------------------------

def clean(d: Dataset) -> Dataset:
    """Drop rows with any missing value, then exact duplicate rows.

    Duplicates must match on every feature and the label; the first
    occurrence survives and row order is preserved.
    """
    keep = ~np.isnan(d.features).any(axis=1) & (d.labels >= 0)
    rows = np.flatnonzero(keep)
    seen = set()
    survivors = []
    for r in rows:
        key = (d.features[r].tobytes(), int(d.labels[r]))
        if key not in seen:
            seen.add(key)
            survivors.append(r)
    return d.subset(rows=np.array(survivors, dtype=int))


def _largest_remainder(quotas: list[Fraction], total: int) -> list[int]:
    base = [math.floor(q) for q in quotas]
    short = total - sum(base)
    # stable sort: equal remainders keep ascending class index
    order = sorted(range(len(quotas)), key=lambda c: -(quotas[c] - base[c]))
    for c in order[:max(short, 0)]:
        base[c] += 1
    return base


def stratified_split(d: Dataset, cfg: SplitConfig) -> tuple[Dataset, Dataset]:
    """Seeded train/test partition.

    Stratified: class c sends its largest-remainder share of
    ``round(train_fraction * n)`` samples to train. Both parts keep the
    original row order.
    """
    n = d.n_samples
    rng = np.random.default_rng(cfg.seed)
    frac = Fraction(repr(cfg.train_fraction))
    n_train = math.floor(frac * n + Fraction(1, 2))
    train_idx = []
    if cfg.stratified:
        counts = d.class_counts()
        for c, cnt in enumerate(counts):
            if 0 < cnt < 2:
                raise DataError(
                    f"class {d.label_names[c]!r} has {cnt} sample; stratified split needs at least 2"
                )
        per_class = _largest_remainder([frac * int(c) for c in counts], n_train)
        for c in range(d.n_classes):
            members = np.flatnonzero(d.labels == c)
            members = members[rng.permutation(len(members))]
            train_idx.extend(members[: per_class[c]].tolist())
    else:
        train_idx = rng.permutation(n)[:n_train].tolist()
    in_train = np.zeros(n, dtype=bool)
    in_train[train_idx] = True
    return d.subset(rows=np.flatnonzero(in_train)), d.subset(rows=np.flatnonzero(~in_train))


def quantile_bin(d: Dataset, n_bins: int = 10) -> Dataset:
    """Replace each column by equal-frequency bin indices 0..n_bins-1.

    Cut points are the linearly interpolated column quantiles at k/n_bins;
    a value lands in the bin counting the cut points strictly below it, so
    constant columns collapse to bin 0.
    """
    if n_bins < 2:
        raise ValueError("n_bins must be at least 2")
    X = d.features
    out = np.zeros_like(X)
    if X.shape[0]:
        qs = np.arange(1, n_bins) / n_bins
        # same cuts as np.quantile(..., method="linear"), several times faster on wide data
        srt = np.sort(X, axis=0)
        pos = qs * (X.shape[0] - 1)
        lo = np.floor(pos).astype(int)
        hi = np.minimum(lo + 1, X.shape[0] - 1)
        frac = (pos - lo)[:, None]
        cuts = srt[lo] + frac * (srt[hi] - srt[lo])  # (n_bins-1, d)
        codes = np.zeros(X.shape, dtype=np.min_scalar_type(n_bins))
        for c in cuts:
            codes += X > c
        out[:] = codes
    return Dataset(out, d.feature_names, d.labels, d.label_names, dict(d.meta))


def standardize(train: Dataset, *others: Dataset) -> list[Dataset]:
    """Z-score every dataset with the training columns' mean and std."""
    mu = train.features.mean(axis=0)
    sd = train.features.std(axis=0)
    sd[sd == 0] = 1.0
    return [
        Dataset((x.features - mu) / sd, x.feature_names, x.labels, x.label_names, dict(x.meta))
        for x in (train, *others)
    ]


def encode_labels(labels: Sequence[str], order: Sequence[str] | None = None) -> tuple[np.ndarray, list[str]]:
    vocab = list(order) if order is not None else list(dict.fromkeys(labels))
    lookup = {name: i for i, name in enumerate(vocab)}
    try:
        return np.array([lookup[s] for s in labels], dtype=np.int64), vocab
    except KeyError as exc:
        raise DataError(f"label {exc.args[0]!r} not in vocabulary {vocab}") from None


# ---------------------------------------------------------------------------
# Synthetic data
# ---------------------------------------------------------------------------

def synth_generate(spec: SynthSpec) -> Dataset:
    """Gaussian classes shifted along a planted set of informative columns.

    Class c has mean ``c * separation`` on every informative column; all
    columns carry N(0, noise_scale^2) noise. Informative column positions
    are drawn from the seed and recorded in ``meta["informative"]``.
    """
    rng = np.random.default_rng(spec.seed)
    if spec.class_sizes is None:
        sizes = [spec.n_samples // spec.n_classes] * spec.n_classes
        for c in range(spec.n_samples - sum(sizes)):
            sizes[c] += 1
    else:
        sizes = list(spec.class_sizes)
    labels = np.repeat(np.arange(spec.n_classes), sizes)
    labels = labels[rng.permutation(spec.n_samples)]
    informative = np.sort(rng.choice(spec.n_features, size=spec.n_informative, replace=False))
    X = rng.normal(0.0, 1.0, size=(spec.n_samples, spec.n_features)) * spec.noise_scale
    X[:, informative] += (labels * spec.separation)[:, None]
    names = [f"f{j}" for j in range(spec.n_features)]
    label_names = [f"class{c}" for c in range(spec.n_classes)]
    return Dataset(X, names, labels, label_names, {"informative": informative.tolist()})


# ---------------------------------------------------------------------------
# PGM
# ---------------------------------------------------------------------------

def _pgm_tokens(buf: bytes, count: int, pos: int):
    """Pull ``count`` whitespace-separated header tokens, skipping comments."""
    tokens = []
    n = len(buf)
    while len(tokens) < count:
        while pos < n and buf[pos:pos + 1].isspace():
            pos += 1
        if pos < n and buf[pos:pos + 1] == b"#":
            while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not buf[pos:pos + 1].isspace() and buf[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise DataError("malformed PGM header: unexpected end of file")
        tokens.append(buf[start:pos])
    return tokens, pos


def load_pgm(path) -> GrayImage:
    """Decode a P2 (ASCII) or P5 (binary) graymap with maxval <= 255."""
    with open(path, "rb") as fh:
        buf = fh.read()
    magic = buf[:2]
    if magic not in (b"P2", b"P5"):
        raise DataError(f"{path}: not a PGM file (magic {magic!r})")
    try:
        (w, h, maxval), pos = _pgm_tokens(buf, 3, 2)
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise DataError(f"{path}: malformed PGM header") from None
    if w <= 0 or h <= 0:
        raise DataError(f"{path}: zero or negative image dimension {w}x{h}")
    if not 0 < maxval <= 255:
        raise DataError(f"{path}: unsupported maxval {maxval}")
    npx = w * h
    if magic == b"P5":
        data = buf[pos + 1: pos + 1 + npx]
        if len(data) < npx:
            raise DataError(f"{path}: truncated pixel data ({len(data)} of {npx} bytes)")
        pixels = np.frombuffer(data, dtype=np.uint8).copy()
    else:
        vals = buf[pos:].split()
        if len(vals) < npx:
            raise DataError(f"{path}: truncated pixel data ({len(vals)} of {npx} values)")
        try:
            pixels = np.array([int(v) for v in vals[:npx]])
        except ValueError:
            raise DataError(f"{path}: non-integer pixel value") from None
        if pixels.min() < 0 or pixels.max() > maxval:
            raise DataError(f"{path}: pixel value outside [0, {maxval}]")
    return GrayImage(w, h, pixels.astype(np.uint8))


def write_pgm(img: GrayImage, path, binary: bool = True) -> None:
    header = f"{'P5' if binary else 'P2'}\n{img.width} {img.height}\n255\n".encode()
    with open(path, "wb") as fh:
        fh.write(header)
        if binary:
            fh.write(img.pixels.astype(np.uint8).tobytes())
        else:
            for row in img.array:
                fh.write((" ".join(str(int(v)) for v in row) + "\n").encode())
