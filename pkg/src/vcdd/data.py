"""Dataset ingestion, binary-task extraction and noise injection.

Raw files are never downloaded; callers pass paths to MNIST IDX files or
CIFAR-10 binary batches.  Either may be gzip-compressed.
"""

from __future__ import annotations

import dataclasses
import gzip
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .rng import generator

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
CIFAR_RECORD = 1 + 3072
CIFAR10_CLASSES = (
    "airplane", "automobile", "bird", "cat", "deer",
    "dog", "frog", "horse", "ship", "truck",
)
CACHE_MAGIC = b"VCDDDATA"
CACHE_VERSION = 1


class DataFormatError(ValueError):
    """A raw or cached data file does not match its documented layout."""


@dataclass(frozen=True)
class RawImages:
    images: np.ndarray  # (n, pixels) uint8
    labels: np.ndarray  # (n,) uint8
    source: str


@dataclass(frozen=True)
class BinaryDataset:
    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        for X, y, name in ((self.X_train, self.y_train, "train"), (self.X_test, self.y_test, "test")):
            if X.ndim != 2 or X.shape[0] != y.shape[0]:
                raise ValueError(f"{name}: {X.shape} inputs for {y.shape} labels")
            if not np.all(np.abs(y) == 1.0):
                raise ValueError(f"{name} labels must be exactly +1 or -1")

    @property
    def n_train(self) -> int:
        return self.X_train.shape[0]

    @property
    def n_test(self) -> int:
        return self.X_test.shape[0]

    def with_noise(self, note: str, **arrays) -> "BinaryDataset":
        prov = dict(self.provenance)
        prov["noise"] = list(prov.get("noise", [])) + [note]
        return dataclasses.replace(self, provenance=prov, **arrays)


def _read_bytes(path) -> bytes:
    raw = Path(path).read_bytes()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw


def _parse_idx(raw: bytes, magic: int, path) -> tuple[tuple[int, ...], np.ndarray]:
    if len(raw) < 4:
        raise DataFormatError(f"{path}: file ends at byte {len(raw)} inside the 4-byte magic number")
    (got,) = struct.unpack_from(">I", raw, 0)
    if got != magic:
        raise DataFormatError(f"{path}: magic 0x{got:08x} at offset 0, expected 0x{magic:08x}")
    ndim = got & 0xFF
    header = 4 + 4 * ndim
    if len(raw) < header:
        raise DataFormatError(f"{path}: header truncated at byte {len(raw)}, needs {header} bytes")
    dims = struct.unpack_from(f">{ndim}I", raw, 4)
    size = int(np.prod(dims))
    if len(raw) < header + size:
        raise DataFormatError(
            f"{path}: payload truncated; data missing from byte offset {len(raw)}, "
            f"expected {header + size} bytes"
        )
    if len(raw) > header + size:
        raise DataFormatError(f"{path}: {len(raw) - header - size} trailing bytes after offset {header + size}")
    return dims, np.frombuffer(raw, dtype=np.uint8, count=size, offset=header)


def load_mnist(images_path, labels_path) -> RawImages:
    """Parse an IDX image file (magic 0x803) and label file (magic 0x801)."""
    dims, pixels = _parse_idx(_read_bytes(images_path), IDX_IMAGES_MAGIC, images_path)
    (n_labels,), labels = _parse_idx(_read_bytes(labels_path), IDX_LABELS_MAGIC, labels_path)
    if dims[0] != n_labels:
        raise DataFormatError(f"{images_path} holds {dims[0]} images but {labels_path} holds {n_labels} labels")
    return RawImages(pixels.reshape(dims[0], -1).copy(), labels.copy(), "mnist")


def write_idx_images(path, images: np.ndarray) -> None:
    """Write a (n, rows, cols) uint8 array as an IDX image file."""
    images = np.asarray(images, dtype=np.uint8)
    n, rows, cols = images.shape
    Path(path).write_bytes(struct.pack(">IIII", IDX_IMAGES_MAGIC, n, rows, cols) + images.tobytes())


def write_idx_labels(path, labels: np.ndarray) -> None:
    labels = np.asarray(labels, dtype=np.uint8)
    Path(path).write_bytes(struct.pack(">II", IDX_LABELS_MAGIC, labels.size) + labels.tobytes())


def load_cifar10(batch_paths) -> RawImages:
    """Parse CIFAR-10 binary batches: 1 label byte + 3072 planar RGB bytes per record."""
    if isinstance(batch_paths, (str, Path)):
        batch_paths = [batch_paths]
    images, labels = [], []
    for path in batch_paths:
        raw = _read_bytes(path)
        if len(raw) == 0:
            raise DataFormatError(f"{path}: empty file, no CIFAR records")
        if len(raw) % CIFAR_RECORD:
            raise DataFormatError(
                f"{path}: length {len(raw)} is not a multiple of the {CIFAR_RECORD}-byte record "
                f"(last full record ends at offset {len(raw) - len(raw) % CIFAR_RECORD})"
            )
        rec = np.frombuffer(raw, dtype=np.uint8).reshape(-1, CIFAR_RECORD)
        if rec[:, 0].max() > 9:
            bad = int(np.argmax(rec[:, 0] > 9))
            raise DataFormatError(f"{path}: label {rec[bad, 0]} > 9 at byte offset {bad * CIFAR_RECORD}")
        labels.append(rec[:, 0].copy())
        images.append(rec[:, 1:].copy())
    if not images:
        raise DataFormatError("no CIFAR batch files given")
    return RawImages(np.concatenate(images), np.concatenate(labels), "cifar10")


def write_cifar10(path, images: np.ndarray, labels: np.ndarray) -> None:
    images = np.asarray(images, dtype=np.uint8).reshape(len(labels), 3072)
    rec = np.hstack([np.asarray(labels, dtype=np.uint8)[:, None], images])
    Path(path).write_bytes(rec.tobytes())


def cifar10_class(name_or_index) -> int:
    if isinstance(name_or_index, str) and not name_or_index.isdigit():
        try:
            return CIFAR10_CLASSES.index(name_or_index)
        except ValueError:
            raise ValueError(f"unknown CIFAR-10 class {name_or_index!r}") from None
    return int(name_or_index)


def make_binary_task(raw: RawImages, class_a, class_b, n_train: int, n_test: int, seed: int) -> BinaryDataset:
    """Balanced two-class task; ``class_a`` -> +1, ``class_b`` -> -1.

    Pixels are divided by 255.  Each class contributes ``ceil``/``floor`` of
    half of each split, drawn without overlap from a seeded permutation.
    """
    if n_train < 2 or n_test < 2:
        raise ValueError("n_train and n_test must both be at least 2")
    a, b = int(class_a), int(class_b)
    if a == b:
        raise ValueError("the two classes must differ")
    g = generator(seed)
    tr_idx, te_idx, tr_y, te_y = [], [], [], []
    for cls, sign, ntr, nte in (
        (a, 1.0, (n_train + 1) // 2, (n_test + 1) // 2),
        (b, -1.0, n_train // 2, n_test // 2),
    ):
        pool = np.flatnonzero(raw.labels == cls)
        if len(pool) < ntr + nte:
            raise ValueError(
                f"class {cls} has {len(pool)} samples, {ntr + nte} needed ({ntr} train + {nte} test)"
            )
        pick = g.permutation(pool)
        tr_idx.append(pick[:ntr])
        te_idx.append(pick[ntr:ntr + nte])
        tr_y.append(np.full(ntr, sign))
        te_y.append(np.full(nte, sign))
    tr_idx, te_idx = np.concatenate(tr_idx), np.concatenate(te_idx)
    tr_y, te_y = np.concatenate(tr_y), np.concatenate(te_y)
    p_tr, p_te = g.permutation(len(tr_idx)), g.permutation(len(te_idx))
    tr_idx, tr_y, te_idx, te_y = tr_idx[p_tr], tr_y[p_tr], te_idx[p_te], te_y[p_te]
    X = raw.images.astype(np.float64) / 255.0
    prov = {
        "source": raw.source,
        "classes": [a, b],
        "n_train": int(n_train),
        "n_test": int(n_test),
        "seed": int(seed),
        "noise": [],
        "train_index": tr_idx.tolist(),
        "test_index": te_idx.tolist(),
    }
    return BinaryDataset(X[tr_idx], tr_y, X[te_idx], te_y, prov)


def corrupt_labels(ds: BinaryDataset, fraction: float, seed: int) -> BinaryDataset:
    """Flip exactly ``floor(fraction * n_train)`` training labels; test labels are untouched."""
    if not 0.0 <= fraction <= 0.5:
        raise ValueError(f"label-noise fraction must lie in [0, 0.5], got {fraction}")
    k = int(np.floor(fraction * ds.n_train))
    if k == 0:
        return ds
    flip = generator(seed).choice(ds.n_train, size=k, replace=False)
    y = ds.y_train.copy()
    y[flip] = -y[flip]
    return ds.with_noise(f"labels:{fraction}:seed={seed}:flipped={k}", y_train=y)


def corrupt_pixels(ds: BinaryDataset, sigma_hat: float, seed: int, train_only: bool = False) -> BinaryDataset:
    """Add Gaussian noise with std ``sigma_hat`` to [0, 1] inputs, then clip to [0, 1]."""
    if sigma_hat < 0:
        raise ValueError(f"sigma_hat must be non-negative, got {sigma_hat}")
    if sigma_hat == 0:
        return ds
    for X in (ds.X_train, ds.X_test):
        if X.min() < 0.0 or X.max() > 1.0:
            raise ValueError("pixel noise expects inputs already scaled to [0, 1]")
    g = generator(seed)
    X_train = np.clip(ds.X_train + g.normal(0.0, sigma_hat, ds.X_train.shape), 0.0, 1.0)
    X_test = ds.X_test
    if not train_only:
        X_test = np.clip(ds.X_test + g.normal(0.0, sigma_hat, ds.X_test.shape), 0.0, 1.0)
    where = "train" if train_only else "train+test"
    return ds.with_noise(f"pixels:{sigma_hat}:seed={seed}:{where}", X_train=X_train, X_test=X_test)


def synth_gaussians(d: int, n_train: int, n_test: int, separation: float, seed: int) -> BinaryDataset:
    """Two unit-variance spherical Gaussians centred at +-(separation/2) e1, balanced classes."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if separation < 0:
        raise ValueError(f"separation must be non-negative, got {separation}")
    g = generator(seed)

    def draw(n):
        y = np.where(np.arange(n) < (n + 1) // 2, 1.0, -1.0)
        y = y[g.permutation(n)]
        X = g.standard_normal((n, d))
        X[:, 0] += y * separation / 2.0
        return X, y

    X_train, y_train = draw(n_train)
    X_test, y_test = draw(n_test)
    prov = {
        "source": "synth",
        "d": int(d),
        "separation": float(separation),
        "n_train": int(n_train),
        "n_test": int(n_test),
        "seed": int(seed),
        "noise": [],
    }
    return BinaryDataset(X_train, y_train, X_test, y_test, prov)


def save_dataset(ds: BinaryDataset, path) -> None:
    """Cache container; layout in docs/formats.md."""
    header = dict(ds.provenance)
    header["shapes"] = {
        "X_train": list(ds.X_train.shape),
        "X_test": list(ds.X_test.shape),
    }
    text = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(Path(path), "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<II", CACHE_VERSION, len(text)))
        fh.write(text)
        for arr in (ds.X_train, ds.y_train, ds.X_test, ds.y_test):
            fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def load_dataset(path) -> BinaryDataset:
    raw = Path(path).read_bytes()
    if raw[:8] != CACHE_MAGIC:
        raise DataFormatError(f"{path}: bad magic {raw[:8]!r} at offset 0")
    if len(raw) < 16:
        raise DataFormatError(f"{path}: header truncated at byte {len(raw)}")
    version, hlen = struct.unpack_from("<II", raw, 8)
    if version != CACHE_VERSION:
        raise DataFormatError(f"{path}: unsupported cache version {version}")
    header = json.loads(raw[16:16 + hlen].decode("utf-8"))
    shapes = header.pop("shapes")
    (ntr, d), (nte, _) = shapes["X_train"], shapes["X_test"]
    offset = 16 + hlen
    parts = []
    for count in (ntr * d, ntr, nte * d, nte):
        end = offset + 4 * count
        if end > len(raw):
            raise DataFormatError(f"{path}: data truncated at byte {len(raw)}, expected {end}")
        parts.append(np.frombuffer(raw, dtype="<f4", count=count, offset=offset).astype(np.float64))
        offset = end
    if offset != len(raw):
        raise DataFormatError(f"{path}: {len(raw) - offset} trailing bytes after offset {offset}")
    return BinaryDataset(
        parts[0].reshape(ntr, d), parts[1], parts[2].reshape(nte, d), parts[3], header
    )
