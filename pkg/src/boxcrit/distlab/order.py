"""Empirical check of whether SIoU preserves the ranking given by IoU."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from boxcrit.boxcore import iou_array, siou_exponent_array

LOG_WIDTH_RANGE = (math.log(4.0), math.log(256.0))


@dataclass(frozen=True)
class OrderReport:
    n_triples: int
    n_violations: int
    n_inequality_failures: int  # violations NOT predicted by the log-ratio condition

    @property
    def rate(self) -> float:
        return self.n_violations / self.n_triples if self.n_triples else 0.0

    @property
    def violations_explained(self) -> bool:
        return self.n_inequality_failures == 0


def sample_triples(n: int, rng: np.random.Generator, shift_scale: float = 0.5):
    """Square triples (b1, b2, b3) where b2 and b3 both overlap b1.

    Widths are log-uniform on [4, 256]; b2 and b3 centers are Gaussian around
    the b1 center with std ``shift_scale * w1`` per axis. Non-overlapping
    draws are rejected.
    """
    chunks: list[np.ndarray] = []
    have = 0
    while have < n:
        m = max(2 * (n - have), 1024)
        widths = np.exp(rng.uniform(*LOG_WIDTH_RANGE, size=(m, 3)))
        centers = np.zeros((m, 3, 2))
        centers[:, 1:, :] = rng.normal(0.0, 1.0, size=(m, 2, 2)) * (shift_scale * widths[:, :1, None])
        boxes = np.empty((m, 3, 4))
        boxes[..., :2] = centers - widths[..., None] / 2.0
        boxes[..., 2] = widths
        boxes[..., 3] = widths
        ok = (iou_array(boxes[:, 0], boxes[:, 1]) > 0) & (iou_array(boxes[:, 0], boxes[:, 2]) > 0)
        chunks.append(boxes[ok])
        have += int(ok.sum())
    return np.concatenate(chunks)[:n]


def order_violation_rate(
    gamma: float,
    kappa: float,
    n_triples: int = 100_000,
    seed: int = 0,
    shift_scale: float = 0.5,
) -> OrderReport:
    """Count triples where IoU and SIoU rank (b1, b2) vs (b1, b3) differently.

    Each violation is also checked against the log-ratio condition: with b_hi
    the higher-IoU partner, the order flips exactly when
    ``ln IoU(b1, b_lo) / ln IoU(b1, b_hi) < p(b1, b_hi) / p(b1, b_lo)``.
    """
    rng = np.random.default_rng(seed)
    t = sample_triples(n_triples, rng, shift_scale)
    b1, b2, b3 = t[:, 0], t[:, 1], t[:, 2]
    i12, i13 = iou_array(b1, b2), iou_array(b1, b3)
    p12 = siou_exponent_array(b1, b2, gamma, kappa)
    p13 = siou_exponent_array(b1, b3, gamma, kappa)
    s12, s13 = i12**p12, i13**p13
    flipped = ((i12 < i13) & (s12 > s13)) | ((i12 > i13) & (s12 < s13))

    lo_first = i12 < i13
    i_lo = np.where(lo_first, i12, i13)[flipped]
    i_hi = np.where(lo_first, i13, i12)[flipped]
    p_lo = np.where(lo_first, p12, p13)[flipped]
    p_hi = np.where(lo_first, p13, p12)[flipped]
    predicted = np.log(i_lo) / np.log(i_hi) < p_hi / p_lo
    return OrderReport(
        n_triples=len(t),
        n_violations=int(flipped.sum()),
        n_inequality_failures=int((~predicted).sum()),
    )
