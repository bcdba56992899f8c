"""Seeded random streams.

Every random draw in the package goes through :func:`generator`, which wraps
numpy's Philox counter-based bit generator.  Philox output depends only on the
key (seed) and counter, so streams are identical across platforms.
"""

from __future__ import annotations

import numpy as np


def generator(*key: int) -> np.random.Generator:
    """Return a Philox generator keyed by one or more non-negative integers.

    ``generator(seed, n)`` and ``generator(seed, m)`` give independent streams,
    which is how per-grid-point feature maps are derived from a master seed.
    """
    if not key:
        raise ValueError("at least one seed component is required")
    for k in key:
        if int(k) < 0:
            raise ValueError(f"seed components must be non-negative, got {k}")
    seq = np.random.SeedSequence([int(k) for k in key])
    return np.random.Generator(np.random.Philox(seq))
