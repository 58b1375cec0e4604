import struct

import numpy as np
import pytest

from nodebound.datasets import (
    Dataset,
    IdxFormatError,
    gen_blob_dataset,
    gen_linear_dataset,
    gen_sin_dataset,
    load_idx,
)


def test_sin_dataset_formula_and_range():
    data = gen_sin_dataset(200, seed=0)
    assert data.inputs.shape == (200, 2)
    assert data.targets.shape == (200, 1)
    np.testing.assert_allclose(data.targets[:, 0], np.sin(data.inputs.sum(axis=1)), atol=1e-15)
    assert np.all(np.abs(data.targets) <= 1.0)
    assert data.provenance == "synthetic_sin"


def test_sin_dataset_deterministic():
    a = gen_sin_dataset(50, seed=3)
    b = gen_sin_dataset(50, seed=3)
    assert np.array_equal(a.inputs, b.inputs)
    assert np.array_equal(a.targets, b.targets)


def test_sin_dataset_noise_flag():
    clean = gen_sin_dataset(100, seed=1)
    noisy = gen_sin_dataset(100, seed=1, noise_sigma=0.1)
    assert np.array_equal(clean.inputs, noisy.inputs)
    assert not np.array_equal(clean.targets, noisy.targets)


def test_linear_dataset_doubles_inputs():
    data = gen_linear_dataset(40, seed=2)
    np.testing.assert_array_equal(data.targets, 2.0 * data.inputs)
    assert data.provenance == "synthetic_linear"


def test_blob_dataset_shapes_and_label_noise():
    data = gen_blob_dataset(500, seed=0, dim=8, separation=1.5, label_noise=0.2)
    assert data.inputs.shape == (500, 8)
    assert data.is_classification
    assert set(np.unique(data.targets)) <= {0, 1}
    clean = gen_blob_dataset(500, seed=0, dim=8, separation=1.5, label_noise=0.0)
    flipped = np.mean(clean.targets != data.targets)
    assert 0.1 < flipped < 0.3
    with pytest.raises(ValueError):
        gen_blob_dataset(10, seed=0, label_noise=0.7)


def _write_idx(tmp_path, pixels, labels, image_magic=2051, label_magic=2049,
               count=None, label_count=None, truncate_images=False):
    count = len(pixels) if count is None else count
    label_count = len(labels) if label_count is None else label_count
    rows, cols = pixels.shape[1], pixels.shape[2]
    img = struct.pack(">iiii", image_magic, count, rows, cols) + pixels.tobytes()
    if truncate_images:
        img = img[:-2]
    lab = struct.pack(">ii", label_magic, label_count) + bytes(labels)
    ipath = tmp_path / "images.idx"
    lpath = tmp_path / "labels.idx"
    ipath.write_bytes(img)
    lpath.write_bytes(lab)
    return ipath, lpath


def test_idx_minimal_file(tmp_path):
    pixels = np.array([[[0, 255], [0, 255]]], dtype=np.uint8)
    ipath, lpath = _write_idx(tmp_path, pixels, [7])
    data = load_idx(ipath, lpath)
    assert data.inputs.shape == (1, 4)
    np.testing.assert_array_equal(data.inputs[0], np.array([0.0, 1.0, 0.0, 1.0]))
    assert data.targets[0] == 7
    assert data.provenance == "idx_image"


def test_idx_wrong_magic(tmp_path):
    pixels = np.zeros((1, 2, 2), dtype=np.uint8)
    ipath, lpath = _write_idx(tmp_path, pixels, [0], image_magic=2052)
    with pytest.raises(IdxFormatError) as info:
        load_idx(ipath, lpath)
    assert info.value.code == "bad_magic"


def test_idx_truncated(tmp_path):
    pixels = np.zeros((2, 2, 2), dtype=np.uint8)
    ipath, lpath = _write_idx(tmp_path, pixels, [0, 1], truncate_images=True)
    with pytest.raises(IdxFormatError) as info:
        load_idx(ipath, lpath)
    assert info.value.code == "truncated"


def test_idx_count_mismatch(tmp_path):
    pixels = np.zeros((2, 2, 2), dtype=np.uint8)
    ipath, lpath = _write_idx(tmp_path, pixels, [0, 1, 1])
    with pytest.raises(IdxFormatError) as info:
        load_idx(ipath, lpath)
    assert info.value.code == "count_mismatch"


def test_idx_limit(tmp_path):
    pixels = np.arange(5 * 4, dtype=np.uint8).reshape(5, 2, 2)
    ipath, lpath = _write_idx(tmp_path, pixels, [0, 1, 2, 3, 4])
    data = load_idx(ipath, lpath, limit=3)
    assert data.n == 3
    np.testing.assert_array_equal(data.targets, [0, 1, 2])


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.zeros((3, 2)), np.zeros((4, 2)), "synthetic_linear", 0)
    with pytest.raises(ValueError):
        Dataset(np.array([[np.inf, 0.0]]), np.zeros((1, 2)), "synthetic_linear", 0)
