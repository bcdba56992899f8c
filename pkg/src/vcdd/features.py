"""Frozen random feature maps and the two scaling stages around them.

Inputs are scaled per coordinate to [0, 1] with statistics from the training
set, mapped through N random features, and the resulting features are scaled
per coordinate to [-1, 1], again with training statistics only.  Test data is
never clipped.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .rng import generator

RELU = "relu"
RFF = "rff"
KINDS = (RELU, RFF)
DEFAULT_SIGMA = 0.05
FORMAT_VERSION = 1


@dataclass(frozen=True)
class InputScaler:
    lo: np.ndarray
    hi: np.ndarray

    def transform(self, X: np.ndarray) -> np.ndarray:
        return _affine(X, self.lo, self.hi, 0.0, 1.0)


@dataclass(frozen=True)
class FeatureMap:
    kind: str
    projections: np.ndarray  # (N, d)
    seed: int
    sigma: float | None = None
    z_lo: np.ndarray | None = None
    z_hi: np.ndarray | None = None
    # max training-row norm after [-1, 1] scaling; set only in sphere mode
    radius: float | None = None

    @property
    def n_features(self) -> int:
        return self.projections.shape[0]

    @property
    def input_dim(self) -> int:
        return self.projections.shape[1]

    @property
    def output_dim(self) -> int:
        """Number of real columns produced: N for ReLU, 2N for RFF."""
        return self.n_features * (2 if self.kind == RFF else 1)

    @property
    def fitted(self) -> bool:
        return self.z_lo is not None


def _affine(X, lo, hi, a, b):
    """Map [lo, hi] -> [a, b] per column; zero-range columns go to 0."""
    X = np.asarray(X, dtype=np.float64)
    span = hi - lo
    live = span > 0
    safe = np.where(live, span, 1.0)
    out = a + (b - a) * (X - lo) / safe
    return np.where(live, out, 0.0)


def sample_relu_map(d: int, N: int, seed: int) -> FeatureMap:
    """Projection coordinates i.i.d. uniform on [-1, 1]."""
    if d < 1 or N < 1:
        raise ValueError(f"d and N must be >= 1, got d={d}, N={N}")
    V = generator(seed).uniform(-1.0, 1.0, size=(N, d))
    return FeatureMap(RELU, V, int(seed))


def sample_rff_map(d: int, N: int, sigma: float = DEFAULT_SIGMA, seed: int = 0) -> FeatureMap:
    """Projection coordinates i.i.d. Gaussian with standard deviation ``sigma``."""
    if d < 1 or N < 1:
        raise ValueError(f"d and N must be >= 1, got d={d}, N={N}")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    V = generator(seed).normal(0.0, sigma, size=(N, d))
    return FeatureMap(RFF, V, int(seed), sigma=float(sigma))


def sample_map(kind: str, d: int, N: int, seed: int, sigma: float = DEFAULT_SIGMA) -> FeatureMap:
    if kind == RELU:
        return sample_relu_map(d, N, seed)
    if kind == RFF:
        return sample_rff_map(d, N, sigma, seed)
    raise ValueError(f"unknown feature kind {kind!r}; expected one of {KINDS}")


def scale_inputs(X_train, X_test):
    """Fit a per-coordinate [0, 1] scaler on ``X_train`` and apply it to both sets.

    Returns ``(X_train_scaled, X_test_scaled, scaler)``.
    """
    X_train = np.asarray(X_train, dtype=np.float64)
    if X_train.ndim != 2 or X_train.shape[0] == 0:
        raise ValueError("training inputs must be a non-empty 2-D array")
    scaler = InputScaler(X_train.min(axis=0), X_train.max(axis=0))
    return scaler.transform(X_train), scaler.transform(X_test), scaler


def apply_features(fmap: FeatureMap, X) -> np.ndarray:
    """Raw (unscaled) feature matrix.

    RFF columns are interleaved ``cos_1, sin_1, cos_2, sin_2, ...``.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != fmap.input_dim:
        raise ValueError(
            f"input has shape {X.shape}, feature map expects {fmap.input_dim} columns"
        )
    P = X @ fmap.projections.T
    if fmap.kind == RELU:
        return np.maximum(P, 0.0)
    out = np.empty((X.shape[0], 2 * fmap.n_features))
    out[:, 0::2] = np.cos(P)
    out[:, 1::2] = np.sin(P)
    return out


def fit_z_scaling(fmap: FeatureMap, Z_train, sphere: bool = False) -> FeatureMap:
    """Record per-feature training ranges for the [-1, 1] rescaling.

    With ``sphere=True`` the rescaled vectors are further divided by the
    largest training-row norm so every training sample lies in the unit ball.
    """
    Z_train = np.asarray(Z_train, dtype=np.float64)
    if Z_train.ndim != 2 or Z_train.shape[0] == 0:
        raise ValueError("training features must be a non-empty 2-D array")
    if Z_train.shape[1] != fmap.output_dim:
        raise ValueError(f"expected {fmap.output_dim} feature columns, got {Z_train.shape[1]}")
    fitted = dataclasses.replace(fmap, z_lo=Z_train.min(axis=0), z_hi=Z_train.max(axis=0), radius=None)
    if sphere:
        norms = np.linalg.norm(apply_z_scaling(fitted, Z_train), axis=1)
        r = float(norms.max())
        fitted = dataclasses.replace(fitted, radius=r if r > 0 else 1.0)
    return fitted


def apply_z_scaling(fmap: FeatureMap, Z) -> np.ndarray:
    if not fmap.fitted:
        raise RuntimeError("z-scaling has not been fitted for this feature map")
    out = _affine(Z, fmap.z_lo, fmap.z_hi, -1.0, 1.0)
    if fmap.radius is not None:
        out = out / fmap.radius
    return out


def save_feature_map(fmap: FeatureMap, path) -> None:
    """Write an ``.npz`` sidecar (see docs/formats.md)."""
    arrays = dict(
        format_version=np.int64(FORMAT_VERSION),
        kind=np.array(fmap.kind),
        seed=np.int64(fmap.seed),
        sigma=np.float64(np.nan if fmap.sigma is None else fmap.sigma),
        projections=fmap.projections,
        radius=np.float64(np.nan if fmap.radius is None else fmap.radius),
    )
    if fmap.fitted:
        arrays["z_lo"] = fmap.z_lo
        arrays["z_hi"] = fmap.z_hi
    with open(Path(path), "wb") as fh:
        np.savez(fh, **arrays)


def load_feature_map(path) -> FeatureMap:
    with np.load(Path(path), allow_pickle=False) as f:
        version = int(f["format_version"])
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported feature-map format version {version}")
        sigma = float(f["sigma"])
        radius = float(f["radius"])
        return FeatureMap(
            kind=str(f["kind"]),
            projections=f["projections"],
            seed=int(f["seed"]),
            sigma=None if np.isnan(sigma) else sigma,
            z_lo=f["z_lo"] if "z_lo" in f else None,
            z_hi=f["z_hi"] if "z_hi" in f else None,
            radius=None if np.isnan(radius) else radius,
        )
