"""Dataset construction: synthetic regression/classification data and IDX ingestion."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .linalg import as_float_array

IDX_IMAGE_MAGIC = 2051
IDX_LABEL_MAGIC = 2049


@dataclass
class Dataset:
    """Input matrix plus regression targets or integer class labels."""

    inputs: np.ndarray
    targets: np.ndarray
    provenance: str
    seed: int

    def __post_init__(self):
        self.inputs = as_float_array(self.inputs, "inputs")
        if self.inputs.ndim != 2:
            raise ValueError("inputs must be (n, p)")
        if np.issubdtype(np.asarray(self.targets).dtype, np.integer):
            self.targets = np.asarray(self.targets, dtype=np.int64)
            if self.targets.ndim != 1:
                raise ValueError("class labels must be (n,)")
        else:
            self.targets = as_float_array(self.targets, "targets")
            if self.targets.ndim != 2:
                raise ValueError("regression targets must be (n, q)")
        if self.inputs.shape[0] != self.targets.shape[0]:
            raise ValueError("inputs and targets row counts differ")

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def is_classification(self) -> bool:
        return self.targets.ndim == 1


def gen_sin_dataset(n: int, seed: int, noise_sigma: float = 0.0) -> Dataset:
    """Standard-normal 2-d inputs with scalar target sin(x1 + x2)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, 2))
    y = np.sin(x.sum(axis=1, keepdims=True))
    if noise_sigma > 0:
        y = y + noise_sigma * rng.standard_normal(y.shape)
    return Dataset(x, y, "synthetic_sin", seed)


def gen_linear_dataset(n: int, seed: int) -> Dataset:
    """Standard-normal 2-d inputs with target y = 2 x (2-d)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, 2))
    return Dataset(x, 2.0 * x, "synthetic_linear", seed)


def gen_blob_dataset(n: int, seed: int, dim: int = 16, separation: float = 1.2,
                     label_noise: float = 0.0) -> Dataset:
    """Two overlapping Gaussian classes; the image-free fallback for classification runs.

    ``label_noise`` flips that fraction of labels, giving capacity-driven
    training something real to memorize.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0.0 <= label_noise < 0.5:
        raise ValueError("label_noise must lie in [0, 0.5)")
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, size=n)
    centers = np.zeros((2, dim))
    centers[0, :] = -separation / np.sqrt(dim)
    centers[1, :] = separation / np.sqrt(dim)
    x = centers[labels] + rng.standard_normal((n, dim))
    if label_noise > 0.0:
        flip = rng.random(n) < label_noise
        labels = np.where(flip, 1 - labels, labels)
    return Dataset(x, labels.astype(np.int64), "synthetic_blobs", seed)


class IdxFormatError(ValueError):
    """IDX parsing failure; ``code`` is one of bad_magic / truncated / count_mismatch."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _read_be32(data: bytes, offset: int, path: str) -> int:
    if offset + 4 > len(data):
        raise IdxFormatError("truncated", f"{path}: truncated header")
    return struct.unpack(">i", data[offset:offset + 4])[0]


def load_idx(images_path, labels_path, limit: int | None = None) -> Dataset:
    """Parse big-endian IDX image/label files into a flat [0, 1]-scaled dataset."""
    with open(images_path, "rb") as fh:
        raw = fh.read()
    magic = _read_be32(raw, 0, str(images_path))
    if magic != IDX_IMAGE_MAGIC:
        raise IdxFormatError("bad_magic", f"{images_path}: magic {magic}, expected {IDX_IMAGE_MAGIC}")
    count = _read_be32(raw, 4, str(images_path))
    rows = _read_be32(raw, 8, str(images_path))
    cols = _read_be32(raw, 12, str(images_path))
    need = 16 + count * rows * cols
    if len(raw) < need:
        raise IdxFormatError("truncated", f"{images_path}: {len(raw)} bytes, need {need}")
    pixels = np.frombuffer(raw, dtype=np.uint8, count=count * rows * cols, offset=16)
    images = pixels.reshape(count, rows * cols).astype(np.float64) / 255.0

    with open(labels_path, "rb") as fh:
        raw = fh.read()
    magic = _read_be32(raw, 0, str(labels_path))
    if magic != IDX_LABEL_MAGIC:
        raise IdxFormatError("bad_magic", f"{labels_path}: magic {magic}, expected {IDX_LABEL_MAGIC}")
    label_count = _read_be32(raw, 4, str(labels_path))
    if len(raw) < 8 + label_count:
        raise IdxFormatError("truncated", f"{labels_path}: {len(raw)} bytes, need {8 + label_count}")
    if label_count != count:
        raise IdxFormatError("count_mismatch", f"{count} images but {label_count} labels")
    labels = np.frombuffer(raw, dtype=np.uint8, count=label_count, offset=8).astype(np.int64)

    if limit is not None and limit < count:
        images = images[:limit]
        labels = labels[:limit]
    return Dataset(images, labels, "idx_image", 0)
