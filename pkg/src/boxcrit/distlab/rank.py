from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from boxcrit.boxcore import DomainError


def kendall_tau(x: Sequence[float], y: Sequence[float], chunk: int = 2048) -> float:
    """Tie-corrected Kendall rank correlation (tau-b).

    ``(C - D) / sqrt((n0 - tx) (n0 - ty))`` over all unordered pairs, with
    ``tx``/``ty`` the pairs tied in ``x``/``y``. Pair counts are exact
    integers; memory is bounded by processing ``chunk`` rows at a time.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError("x and y must be 1-d sequences of equal length")
    n = x.size
    if n < 2:
        raise ValueError("need at least two observations")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValueError("inputs must be finite")

    score = 0
    tied_x = 0
    tied_y = 0
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        sx = np.sign(x[start:stop, None] - x[None, :]).astype(np.int8)
        sy = np.sign(y[start:stop, None] - y[None, :]).astype(np.int8)
        # keep pairs (i, j) with j > i only
        upper = np.arange(n)[None, :] > np.arange(start, stop)[:, None]
        score += int((sx.astype(np.int64) * sy)[upper].sum())
        tied_x += int(((sx == 0) & upper).sum())
        tied_y += int(((sy == 0) & upper).sum())

    n0 = n * (n - 1) // 2
    denom = (n0 - tied_x) * (n0 - tied_y)
    if denom == 0:
        raise DomainError("Kendall tau undefined for a constant input")
    return score / math.sqrt(denom)
