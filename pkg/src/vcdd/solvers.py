"""Linear classifiers in feature space.

Two fitters produce a :class:`LinearModel` ``f(z) = <w, z> + b``:

* :func:`fit_min_norm_ls` - least squares on +-1 targets, minimum-norm
  solution through an SVD pseudo-inverse of the bias-augmented matrix.
* :func:`fit_linear_svm` - soft-margin SVM dual solved by sequential
  two-variable optimization on the maximal violating pair.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np

DEFAULT_C = 64.0
KKT_TOL = 1e-3
MAX_PAIR_UPDATES = 10**7
RANK_RTOL = 1e-12
GAP_RTOL = 1e-2


@dataclass
class LinearModel:
    w: np.ndarray
    b: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=np.float64)
        self.b = float(self.b)
        self.norm_sq = float(self.w @ self.w)

    def decision(self, Z) -> np.ndarray:
        return np.asarray(Z, dtype=np.float64) @ self.w + self.b

    def predict(self, Z) -> np.ndarray:
        """Signs of the decision values; an exact zero counts as +1."""
        return np.where(self.decision(Z) >= 0.0, 1.0, -1.0)


@dataclass
class SvmFit:
    model: LinearModel
    alphas: np.ndarray
    n_support: int
    C: float
    converged: bool


def _check_xy(Z, y):
    Z = np.asarray(Z, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if Z.ndim != 2 or Z.shape[0] == 0 or Z.shape[1] == 0:
        raise ValueError(f"feature matrix must be non-empty and 2-D, got shape {Z.shape}")
    if y.shape != (Z.shape[0],):
        raise ValueError(f"labels have shape {y.shape}, expected ({Z.shape[0]},)")
    if not np.all(np.abs(y) == 1.0):
        raise ValueError("labels must be exactly +1 or -1")
    return Z, y


def pinv_solve(A: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, int]:
    """Minimum-norm least-squares solution of ``A x ~ y`` and the numerical rank.

    Singular values at or below ``max(n, p) * s_max * 1e-12`` are dropped.
    """
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros(A.shape[1]), 0
    keep = s > max(A.shape) * s[0] * RANK_RTOL
    x = Vt[keep].T @ ((U[:, keep].T @ y) / s[keep])
    return x, int(keep.sum())


def fit_min_norm_ls(Z, y, bias: bool = True) -> LinearModel:
    Z, y = _check_xy(Z, y)
    A = np.hstack([Z, np.ones((Z.shape[0], 1))]) if bias else Z
    x, rank = pinv_solve(A, y)
    resid = A @ x - y
    w, b = (x[:-1], x[-1]) if bias else (x, 0.0)
    meta = {
        "solver": "ls",
        "rank": rank,
        "train_mse": float(resid @ resid) / len(y),
    }
    return LinearModel(w, b, meta)


@numba.njit(cache=True)
def _smo_loop(K, y, C, tol, max_iter, alphas, F, it):
    """Pair updates until the maximal KKT violation is <= tol.

    ``F[t] = -y[t] * grad[t]`` of the minimized dual, updated in place along
    with ``alphas``.  Returns ``(iterations, final violation)``.
    """
    n = y.shape[0]
    while True:
        i = -1
        j = -1
        fmax = -np.inf
        fmin = np.inf
        for t in range(n):
            a = alphas[t]
            if y[t] > 0:
                in_up = a < C
                in_low = a > 0.0
            else:
                in_up = a > 0.0
                in_low = a < C
            if in_up and F[t] > fmax:
                fmax = F[t]
                i = t
            if in_low and F[t] < fmin:
                fmin = F[t]
                j = t
        gap = fmax - fmin
        if gap <= tol or it >= max_iter:
            return it, gap
        curv = K[i, i] + K[j, j] - 2.0 * K[i, j]
        step = gap / curv if curv > 1e-12 else np.inf
        room_i = C - alphas[i] if y[i] > 0 else alphas[i]
        room_j = alphas[j] if y[j] > 0 else C - alphas[j]
        step = min(step, room_i, room_j)
        ai = alphas[i] + y[i] * step
        aj = alphas[j] - y[j] * step
        # a variable that hit its box limit is set to the bound exactly
        if step == room_i:
            ai = C if y[i] > 0 else 0.0
        if step == room_j:
            aj = 0.0 if y[j] > 0 else C
        alphas[i] = min(max(ai, 0.0), C)
        alphas[j] = min(max(aj, 0.0), C)
        Ki = K[i]
        Kj = K[j]
        for t in range(n):
            F[t] -= step * (Ki[t] - Kj[t])
        it += 1


def _svm_bias(F, alphas, y, C):
    free = (alphas > 0.0) & (alphas < C)
    if free.any():
        return float(F[free].mean())
    pos = y > 0
    up = np.where(pos, alphas < C, alphas > 0.0)
    low = np.where(pos, alphas > 0.0, alphas < C)
    return float((F[up].max() + F[low].min()) / 2.0)


def _objectives(Z, y, alphas, b, C):
    w = (alphas * y) @ Z
    margins = y * (Z @ w + b)
    primal = 0.5 * w @ w + C * np.maximum(0.0, 1.0 - margins).sum()
    dual = alphas.sum() - 0.5 * w @ w
    return w, float(primal), float(dual)


def fit_linear_svm(
    Z,
    y,
    C: float = DEFAULT_C,
    tol: float = KKT_TOL,
    max_iter: int = MAX_PAIR_UPDATES,
    gap_tol: float = GAP_RTOL,
) -> SvmFit:
    """Soft-margin linear SVM.

    The dual is ``max sum(a) - 1/2 a^T Q a`` subject to ``0 <= a <= C`` and
    ``y^T a = 0``.  Each step picks the pair (i, j) that most violates the KKT
    conditions (deterministic: lowest index wins ties) and solves the
    two-variable subproblem exactly.  Iteration stops once the violation
    ``m - M`` is at most ``tol``; if the relative duality gap then still
    exceeds ``gap_tol`` the violation target is tightened tenfold and the
    iteration resumes.
    """
    Z, y = _check_xy(Z, y)
    if not (y > 0).any() or not (y < 0).any():
        raise ValueError("SVM training needs both classes present")
    if not C > 0:
        raise ValueError(f"C must be positive, got {C}")
    K = Z @ Z.T
    alphas = np.zeros(len(y))
    F = y.copy()
    it = 0
    target = tol
    while True:
        it, violation = _smo_loop(K, y, float(C), target, max_iter, alphas, F, it)
        b = _svm_bias(F, alphas, y, C)
        w, primal, dual = _objectives(Z, y, alphas, b, C)
        rel_gap = (primal - dual) / max(abs(primal), 1e-300)
        converged = violation <= target
        if not converged or rel_gap <= gap_tol or target < 1e-12:
            break
        target /= 10.0

    n_support = int((alphas > 1e-8 * C).sum())
    meta = {
        "solver": "svm",
        "C": float(C),
        "iterations": int(it),
        "converged": bool(converged),
        "kkt_violation": float(violation),
        "kkt_target": float(target),
        "primal": primal,
        "dual": dual,
        "rel_gap": float(rel_gap),
        "n_support": n_support,
    }
    return SvmFit(LinearModel(w, b, meta), alphas, n_support, float(C), bool(converged))


def zero_one_error(model: LinearModel, Z, y) -> float:
    y = np.asarray(y, dtype=np.float64)
    pred = model.predict(Z)
    if pred.shape != y.shape:
        raise ValueError(f"{pred.shape[0]} predictions for {y.shape[0]} labels")
    return float(np.mean(pred != y))


def save_model(model: LinearModel, path) -> None:
    with open(Path(path), "wb") as fh:
        np.savez(
            fh,
            format_version=np.int64(1),
            w=model.w,
            b=np.float64(model.b),
            meta=np.array(json.dumps(model.meta, sort_keys=True)),
        )


def load_model(path) -> LinearModel:
    with np.load(Path(path), allow_pickle=False) as f:
        if int(f["format_version"]) != 1:
            raise ValueError("unsupported model format version")
        return LinearModel(f["w"], float(f["b"]), json.loads(str(f["meta"])))
