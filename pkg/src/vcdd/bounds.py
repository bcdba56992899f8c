"""Closed-form VC generalization bounds for classification.

The full bound on test error is

    R_tst <= R_trn + eps/2 * (1 + sqrt(1 + 4 R_trn / eps))
    eps    = a1/n * (h (ln(a2 n / h) + 1) - ln(eta / 4))
    eta    = min(4 / sqrt(n), 1)

and holds with probability 1 - eta.  With zero training error and the
confidence term dropped it simplifies to ``(h/n)(ln(n/h) + 1)``.  For linear
decision functions in a unit ball the VC-dimension is at most
``min(||w||^2, N) + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "BoundParams",
    "BoundResult",
    "PRESETS",
    "confidence_eta",
    "epsilon",
    "vc_bound",
    "second_descent_bound",
    "linear_vc_dim",
    "in_regime",
]

# (a1, a2) pairs
PRESETS: dict[str, tuple[float, float]] = {
    "default": (1.0, 1.0),
    "noisy": (3.0, 1.0),
    "worst": (4.0, 2.0),
}


def _check_constants(a1: float, a2: float) -> None:
    if not 0.0 <= a1 <= 4.0:
        raise ValueError(f"a1 must lie in [0, 4], got {a1}")
    if not 0.0 < a2 <= 2.0:
        raise ValueError(f"a2 must lie in (0, 2], got {a2}")


@dataclass(frozen=True)
class BoundParams:
    n: int
    h: float
    r_trn: float = 0.0
    a1: float = 1.0
    a2: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if not self.h >= 1.0:
            raise ValueError(f"h must be >= 1, got {self.h}")
        if not 0.0 <= self.r_trn <= 1.0:
            raise ValueError(f"r_trn must lie in [0, 1], got {self.r_trn}")
        _check_constants(self.a1, self.a2)


@dataclass(frozen=True)
class BoundResult:
    eta: float
    epsilon: float
    bound: float
    out_of_regime: bool = False


def confidence_eta(n: int) -> float:
    """``min(4/sqrt(n), 1)``; exactly 1 for n <= 16."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n <= 16:
        return 1.0
    return 4.0 / math.sqrt(n)


def in_regime(n: int, h: float, a2: float = 1.0) -> bool:
    """True while the capacity term ``h (ln(a2 n/h) + 1)`` is non-negative."""
    return h <= a2 * n * math.e


def epsilon(n: int, h: float, a1: float = 1.0, a2: float = 1.0) -> float:
    """Confidence-interval scale of the full bound.

    For ``h > a2 n e`` the capacity term turns negative; the raw value is
    still returned (and may be negative).  :func:`vc_bound` flags that case.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    eta = confidence_eta(n)
    return a1 / n * (h * (math.log(a2 * n / h) + 1.0) - math.log(eta / 4.0))


def vc_bound(params: BoundParams) -> BoundResult:
    """Evaluate the full bound.

    ``epsilon`` in the result is clamped at zero; a raw negative value means
    the bound collapses to the training error and ``out_of_regime`` is set.
    When epsilon is zero the bound is its limit, the training error itself.
    """
    p = params
    eta = confidence_eta(p.n)
    eps = epsilon(p.n, p.h, p.a1, p.a2)
    flag = not in_regime(p.n, p.h, p.a2) or eps < 0.0
    eps = max(eps, 0.0)
    if p.r_trn == 0.0:
        bound = eps
    elif eps == 0.0:
        bound = p.r_trn
    else:
        bound = p.r_trn + eps / 2.0 * (1.0 + math.sqrt(1.0 + 4.0 * p.r_trn / eps))
    return BoundResult(eta=eta, epsilon=eps, bound=bound, out_of_regime=flag)


def second_descent_bound(n: int, h: float) -> float:
    """Simplified zero-training-error bound ``(h/n)(ln(n/h) + 1)``.

    Values for ``h > n`` are computed but lie outside the intended regime.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    if h == n:
        return 1.0
    return h / n * (math.log(n / h) + 1.0)


def linear_vc_dim(norm_sq: float, n_features: int) -> float:
    if norm_sq < 0:
        raise ValueError(f"norm_sq must be non-negative, got {norm_sq}")
    return min(float(norm_sq), float(n_features)) + 1.0
