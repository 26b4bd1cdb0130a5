"""Texture features from grayscale images: GLCM/Haralick statistics and Gabor energy."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.signal import fftconvolve

from featbench.data import Dataset, GrayImage, load_pgm
from featbench.errors import DataError

HARALICK_NAMES = ("contrast", "correlation", "energy", "homogeneity", "entropy")
DEFAULT_OFFSETS = ((0, 1), (1, 1), (1, 0), (1, -1))


@dataclass(frozen=True)
class GlcmParams:
    """Offsets are (row step, column step) pairs."""

    levels: int = 8
    offsets: tuple[tuple[int, int], ...] = DEFAULT_OFFSETS
    symmetric: bool = True
    normalize: bool = True

    def __post_init__(self):
        if not 2 <= self.levels <= 256:
            raise ValueError("levels must lie in [2, 256]")
        if not self.offsets:
            raise ValueError("at least one offset is required")
        for off in self.offsets:
            if len(off) != 2 or tuple(off) == (0, 0):
                raise ValueError(f"offset {off!r} must be a nonzero (di, dj) pair")


@dataclass(frozen=True)
class Glcm:
    matrix: np.ndarray
    offset: tuple[int, int]
    symmetric: bool
    normalized: bool


@dataclass(frozen=True)
class GaborParams:
    """Envelope width ``sigma`` (pixels), ``frequency`` (cycles/pixel), angle ``theta``.

    ``size=None`` picks the odd side length 2*ceil(3*sigma) + 1.
    """

    sigma: float
    frequency: float
    theta: float
    size: int | None = None

    def __post_init__(self):
        if not self.sigma > 0 or not self.frequency > 0:
            raise ValueError("sigma and frequency must be positive")
        if self.size is not None and (self.size < 1 or self.size % 2 == 0):
            raise ValueError("kernel size must be a positive odd integer")

    @property
    def side(self) -> int:
        return self.size if self.size is not None else 2 * math.ceil(3 * self.sigma) + 1


def default_gabor_bank(thetas=(0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4),
                       frequencies=(0.1, 0.25)) -> list[GaborParams]:
    """Orientation-major bank with sigma = 0.56 / f."""
    return [GaborParams(0.56 / f, f, t) for t in thetas for f in frequencies]


# ---------------------------------------------------------------------------
# GLCM
# ---------------------------------------------------------------------------

def quantize(img: GrayImage, levels: int) -> np.ndarray:
    """Equal-width binning of [0, 255] into ``levels`` gray levels."""
    return (img.array.astype(np.int64) * levels) // 256


def glcm_from_levels(q: np.ndarray, levels: int, offset: tuple[int, int],
                     symmetric: bool = True, normalize: bool = True) -> Glcm:
    """Co-occurrence counts of (q[r, c], q[r + di, c + dj]) over in-bounds pairs."""
    q = np.asarray(q, dtype=np.int64)
    h, w = q.shape
    di, dj = offset
    r0, r1 = max(0, -di), min(h, h - di)
    c0, c1 = max(0, -dj), min(w, w - dj)
    if r1 <= r0 or c1 <= c0:
        raise DataError(f"offset {offset} leaves no pixel pairs in a {h}x{w} image")
    a = q[r0:r1, c0:c1]
    b = q[r0 + di:r1 + di, c0 + dj:c1 + dj]
    if a.min() < 0 or max(a.max(), b.max()) >= levels:
        raise ValueError("gray level outside [0, levels)")
    m = np.bincount((a * levels + b).ravel(), minlength=levels * levels).reshape(levels, levels)
    m = m.astype(float)
    if symmetric:
        m = m + m.T
    if normalize:
        m = m / m.sum()
    return Glcm(m, (int(di), int(dj)), symmetric, normalize)


def glcm_compute(img: GrayImage, p: GlcmParams = GlcmParams()) -> list[Glcm]:
    """One co-occurrence matrix per configured offset, in offset order."""
    q = quantize(img, p.levels)
    return [glcm_from_levels(q, p.levels, off, p.symmetric, p.normalize) for off in p.offsets]


def haralick_features(g: Glcm | np.ndarray) -> np.ndarray:
    """Contrast, correlation, energy (angular second moment), homogeneity, entropy.

    Entropy uses the natural log with 0 log 0 = 0; correlation is 0 when
    either marginal has zero variance.
    """
    P = np.asarray(g.matrix if isinstance(g, Glcm) else g, dtype=float)
    if abs(P.sum() - 1.0) > 1e-9 or P.min() < 0:
        raise ValueError("haralick features need a normalized co-occurrence matrix")
    L = P.shape[0]
    i, j = np.indices((L, L))
    contrast = float(((i - j) ** 2 * P).sum())
    energy = float((P * P).sum())
    homogeneity = float((P / (1.0 + (i - j) ** 2)).sum())
    nz = P[P > 0]
    entropy = float(-(nz * np.log(nz)).sum())
    mu_i, mu_j = (i * P).sum(), (j * P).sum()
    var_i = ((i - mu_i) ** 2 * P).sum()
    var_j = ((j - mu_j) ** 2 * P).sum()
    denom = math.sqrt(var_i * var_j)
    correlation = float(((i - mu_i) * (j - mu_j) * P).sum() / denom) if denom > 1e-15 else 0.0
    return np.array([contrast, correlation, energy, homogeneity, entropy])


# ---------------------------------------------------------------------------
# Gabor
# ---------------------------------------------------------------------------

def gabor_kernel(p: GaborParams) -> tuple[np.ndarray, np.ndarray]:
    """Even (cosine) and odd (sine) Gabor kernels, each scaled to unit L2 norm.

    Arrays are indexed [row, column] with column offset ``i`` and row offset
    ``j`` running over -h..h, so theta = 0 oscillates along image columns.
    The envelope is exp(-(i^2 + j^2) / (2 sigma^2)). A component that
    vanishes on the whole grid (e.g. sine at f = 0.5, theta = 0) is
    returned as zeros.
    """
    h = p.side // 2
    j, i = np.mgrid[-h:h + 1, -h:h + 1].astype(float)
    env = np.exp(-(i * i + j * j) / (2.0 * p.sigma**2))
    phase = 2.0 * math.pi * p.frequency * (i * math.cos(p.theta) + j * math.sin(p.theta))
    even = env * np.cos(phase)
    odd = env * np.sin(phase)
    out = []
    for k in (even, odd):
        norm = np.sqrt((k * k).sum())
        out.append(k / norm if norm > 1e-300 else np.zeros_like(k))
    return out[0], out[1]


def gabor_features(img: GrayImage, bank: Sequence[GaborParams] | None = None) -> np.ndarray:
    """Mean and standard deviation of the Gabor magnitude for each bank entry.

    Pixels are scaled to [0, 1] and convolved with zero padding.
    """
    bank = default_gabor_bank() if bank is None else list(bank)
    arr = img.array.astype(float) / 255.0
    feats = []
    for p in bank:
        if p.side > min(img.width, img.height):
            raise DataError(f"gabor kernel side {p.side} exceeds image size {img.width}x{img.height}")
        even, odd = gabor_kernel(p)
        re = fftconvolve(arr, even, mode="same")
        im = fftconvolve(arr, odd, mode="same")
        mag = np.sqrt(re * re + im * im)
        feats.extend([mag.mean(), mag.std()])
    return np.array(feats)


def _bank_names(bank: Sequence[GaborParams]) -> list[str]:
    thetas = list(dict.fromkeys(p.theta for p in bank))
    freqs = list(dict.fromkeys(p.frequency for p in bank))
    names = []
    for p in bank:
        stem = f"gabor_t{thetas.index(p.theta)}_f{freqs.index(p.frequency)}"
        names += [f"{stem}_mean", f"{stem}_std"]
    if len(set(names)) != len(names):
        names = [f"gabor_b{k}_{s}" for k in range(len(bank)) for s in ("mean", "std")]
    return names


def feature_names(glcm: GlcmParams, bank: Sequence[GaborParams]) -> list[str]:
    names = [f"glcm_d{o}_{h}" for o in range(len(glcm.offsets)) for h in HARALICK_NAMES]
    return names + _bank_names(bank)


def extract(img: GrayImage, glcm: GlcmParams, bank: Sequence[GaborParams]) -> np.ndarray:
    parts = [haralick_features(g) for g in glcm_compute(img, glcm)]
    parts.append(gabor_features(img, bank))
    return np.concatenate(parts)


def images_to_dataset(items: Sequence[tuple[GrayImage, str]], glcm: GlcmParams = GlcmParams(),
                      bank: Sequence[GaborParams] | None = None,
                      label_names: Sequence[str] | None = None) -> Dataset:
    """One row per image: Haralick features per offset, then Gabor features in bank order."""
    if not items:
        raise DataError("no images to extract features from")
    if not glcm.normalize:
        raise ValueError("feature extraction needs normalized co-occurrence matrices")
    bank = default_gabor_bank() if bank is None else list(bank)
    vocab = list(label_names) if label_names is not None else list(dict.fromkeys(lab for _, lab in items))
    rows, labels = [], []
    for img, lab in items:
        if lab not in vocab:
            raise DataError(f"label {lab!r} not in vocabulary {vocab}")
        rows.append(extract(img, glcm, bank))
        labels.append(vocab.index(lab))
    return Dataset(np.vstack(rows), feature_names(glcm, bank), np.array(labels), vocab)


def load_image_directory(root) -> list[tuple[GrayImage, str]]:
    """``root/<label>/*.pgm``; labels and files in sorted order."""
    if not os.path.isdir(root):
        raise DataError(f"no such directory: {root}")
    items = []
    for label in sorted(os.listdir(root)):
        sub = os.path.join(root, label)
        if not os.path.isdir(sub):
            continue
        for name in sorted(os.listdir(sub)):
            if name.lower().endswith(".pgm"):
                items.append((load_pgm(os.path.join(sub, name)), label))
    if not items:
        raise DataError(f"{root}: no .pgm files under label subdirectories")
    return items
