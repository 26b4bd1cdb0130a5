import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from featbench.data import GrayImage
from featbench.errors import DataError
from featbench.radiomics import (
    GaborParams, GlcmParams, HARALICK_NAMES, default_gabor_bank, gabor_features, gabor_kernel,
    glcm_compute, glcm_from_levels, haralick_features, images_to_dataset, quantize,
)


def glcm_bruteforce(q, levels, offset, symmetric=True, normalize=True):
    """Visit every pixel and every level pair; O(levels^2 * pixels)."""
    h, w = len(q), len(q[0])
    di, dj = offset
    m = [[0.0] * levels for _ in range(levels)]
    for a in range(levels):
        for b in range(levels):
            for r in range(h):
                for c in range(w):
                    r2, c2 = r + di, c + dj
                    if 0 <= r2 < h and 0 <= c2 < w and q[r][c] == a and q[r2][c2] == b:
                        m[a][b] += 1
    m = np.array(m)
    if symmetric:
        m = m + m.T
    if normalize:
        m = m / m.sum()
    return m


def test_glcm_two_level_example():
    g = glcm_from_levels(np.array([[0, 0], [1, 1]]), 2, (0, 1))
    np.testing.assert_array_equal(g.matrix, [[0.5, 0.0], [0.0, 0.5]])
    # same picture in raw intensities goes through quantization first
    img = GrayImage.from_array([[0, 0], [255, 255]])
    g2 = glcm_compute(img, GlcmParams(levels=2, offsets=((0, 1),)))[0]
    np.testing.assert_array_equal(g2.matrix, g.matrix)


def test_glcm_constant_image():
    img = GrayImage.from_array(np.full((5, 6), 200))
    for g in glcm_compute(img, GlcmParams(levels=4)):
        assert g.matrix[3, 3] == 1.0
        assert np.count_nonzero(g.matrix) == 1


def test_glcm_symmetric_is_transpose():
    rng = np.random.default_rng(0)
    for _ in range(20):
        img = GrayImage.from_array(rng.integers(0, 256, size=rng.integers(2, 10, size=2)))
        for g in glcm_compute(img, GlcmParams(levels=6)):
            assert np.array_equal(g.matrix, g.matrix.T)
            assert abs(g.matrix.sum() - 1.0) <= 1e-9


def test_glcm_matches_bruteforce():
    rng = np.random.default_rng(11)
    for _ in range(40):
        h, w = rng.integers(2, 9, size=2)
        levels = int(rng.integers(2, 5))
        img = GrayImage.from_array(rng.integers(0, 256, size=(h, w)))
        q = quantize(img, levels).tolist()
        for sym in (True, False):
            p = GlcmParams(levels=levels, symmetric=sym)
            for g, off in zip(glcm_compute(img, p), p.offsets):
                assert np.array_equal(g.matrix, glcm_bruteforce(q, levels, off, sym))


def test_glcm_unnormalized_counts():
    q = np.array([[0, 1, 1]])
    g = glcm_from_levels(q, 2, (0, 1), symmetric=False, normalize=False)
    assert g.matrix.tolist() == [[0, 1], [0, 1]]


def test_glcm_offset_beyond_image():
    img = GrayImage.from_array(np.zeros((3, 3)))
    with pytest.raises(DataError, match="no pixel pairs"):
        glcm_compute(img, GlcmParams(offsets=((0, 3),)))


def test_quantize_equal_width():
    img = GrayImage.from_array([[0, 63, 64, 255]])
    assert quantize(img, 4).tolist() == [[0, 0, 1, 3]]


# --- Haralick ---------------------------------------------------------------------

def test_haralick_diagonal_matrix():
    f = dict(zip(HARALICK_NAMES, haralick_features(np.array([[0.5, 0.0], [0.0, 0.5]]))))
    assert f["contrast"] == 0.0
    assert f["energy"] == 0.5
    assert f["homogeneity"] == 1.0
    assert f["entropy"] == pytest.approx(math.log(2))
    assert f["correlation"] == pytest.approx(1.0)


def test_haralick_uniform_matrix():
    L = 4
    f = dict(zip(HARALICK_NAMES, haralick_features(np.full((L, L), 1.0 / L**2))))
    assert f["energy"] == pytest.approx(1.0 / L**2)
    assert f["correlation"] == pytest.approx(0.0, abs=1e-12)


def test_haralick_single_entry():
    P = np.zeros((3, 3))
    P[1, 1] = 1.0
    f = dict(zip(HARALICK_NAMES, haralick_features(P)))
    assert f["entropy"] == 0.0
    assert f["correlation"] == 0.0


def test_haralick_rejects_unnormalized():
    with pytest.raises(ValueError):
        haralick_features(np.ones((2, 2)))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 8), st.integers(2, 12), st.integers(2, 12))
def test_haralick_ranges(seed, levels, h, w):
    rng = np.random.default_rng(seed)
    img = GrayImage.from_array(rng.integers(0, 256, size=(h, w)))
    for g in glcm_compute(img, GlcmParams(levels=levels)):
        con, cor, ene, hom, ent = haralick_features(g)
        assert all(math.isfinite(v) for v in (con, cor, ene, hom, ent))
        assert con >= 0
        assert 0 < ene <= 1 + 1e-12
        assert 0 < hom <= 1 + 1e-12
        assert -1 - 1e-9 <= cor <= 1 + 1e-9


# --- Gabor ------------------------------------------------------------------------

@pytest.mark.parametrize("theta", [0.0, 0.3, math.pi / 4, 2.0])
def test_gabor_kernel_center_parity_norm(theta):
    p = GaborParams(sigma=2.0, frequency=0.2, theta=theta)
    even, odd = gabor_kernel(p)
    h = p.side // 2
    # center value is the normalization factor itself
    j, i = np.mgrid[-h:h + 1, -h:h + 1]
    raw = np.exp(-(i**2 + j**2) / 8.0) * np.cos(2 * math.pi * 0.2 * (i * math.cos(theta) + j * math.sin(theta)))
    assert even[h, h] == pytest.approx(1.0 / np.linalg.norm(raw), rel=1e-12)
    assert odd[h, h] == 0.0
    np.testing.assert_allclose(even, even[::-1, ::-1], atol=1e-15)
    np.testing.assert_allclose(odd, -odd[::-1, ::-1], atol=1e-15)
    assert np.linalg.norm(even) == pytest.approx(1.0, abs=1e-9)
    assert np.linalg.norm(odd) == pytest.approx(1.0, abs=1e-9)


def test_gabor_kernel_envelope_decays():
    even, _ = gabor_kernel(GaborParams(1.0, 0.01, 0.0, size=9))
    assert abs(even[0, 0]) < 1e-6 * even[4, 4]


def test_gabor_zero_image():
    img = GrayImage.from_array(np.zeros((40, 40)))
    f = gabor_features(img)
    assert f.shape == (16,)
    assert np.all(f == 0)


def test_gabor_orientation_selectivity():
    f = 0.25
    cols = np.arange(64)
    stripes = 127.5 + 127.5 * np.cos(2 * math.pi * f * cols)
    img = GrayImage.from_array(np.tile(np.round(stripes), (64, 1)))
    along, across = GaborParams(0.56 / f, f, 0.0), GaborParams(0.56 / f, f, math.pi / 2)
    feats = gabor_features(img, [along, across])
    assert feats[0] > 3 * feats[2]


def test_gabor_kernel_too_large():
    img = GrayImage.from_array(np.zeros((10, 10)))
    with pytest.raises(DataError):
        gabor_features(img, [GaborParams(3.0, 0.2, 0.0)])


def test_default_bank_layout():
    bank = default_gabor_bank()
    assert len(bank) == 8
    assert [p.frequency for p in bank[:2]] == [0.1, 0.25]
    assert bank[0].side == 2 * math.ceil(3 * 5.6) + 1


# --- dataset assembly -------------------------------------------------------------

def _images(n, seed=0, size=36):
    rng = np.random.default_rng(seed)
    return [(GrayImage.from_array(rng.integers(0, 256, size=(size, size))), "normal" if k % 2 else "abnormal")
            for k in range(n)]


@pytest.mark.slow
def test_images_to_dataset_shape_270():
    d = images_to_dataset(_images(270))
    assert d.features.shape == (270, 36)
    assert d.feature_names[0] == "glcm_d0_contrast"
    assert d.feature_names[20] == "gabor_t0_f0_mean"
    assert d.class_counts().tolist() == [135, 135]


def test_images_to_dataset_single_and_permutation():
    items = _images(5, seed=3)
    one = images_to_dataset(items[:1])
    assert one.n_samples == 1
    base = images_to_dataset(items, label_names=["abnormal", "normal"])
    perm = [3, 0, 4, 1, 2]
    shuffled = images_to_dataset([items[k] for k in perm], label_names=["abnormal", "normal"])
    np.testing.assert_array_equal(shuffled.features, base.features[perm])
    np.testing.assert_array_equal(shuffled.labels, base.labels[perm])


def test_images_to_dataset_errors():
    with pytest.raises(DataError):
        images_to_dataset([])
    with pytest.raises(DataError):
        images_to_dataset(_images(2), label_names=["only"])
