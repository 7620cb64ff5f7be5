"""Independent reference implementations used only by the tests.

Nothing here imports the code under test: these are the slow, obvious
versions (pixel counting, nested loops, arbitrary precision) that the fast
paths are checked against.
"""

from __future__ import annotations

import itertools
import math

import mpmath as mp
import numpy as np

mp.mp.dps = 40


def pixel_iou(b1, b2) -> float:
    """IoU by rasterizing integer boxes on a pixel grid."""
    coords = [int(v) for v in (*b1, *b2)]
    x1, y1, w1, h1, x2, y2, w2, h2 = coords
    lo_x, lo_y = min(x1, x2), min(y1, y2)
    hi_x, hi_y = max(x1 + w1, x2 + w2), max(y1 + h1, y2 + h2)
    grid_a = np.zeros((hi_y - lo_y, hi_x - lo_x), dtype=bool)
    grid_b = np.zeros_like(grid_a)
    grid_a[y1 - lo_y:y1 - lo_y + h1, x1 - lo_x:x1 - lo_x + w1] = True
    grid_b[y2 - lo_y:y2 - lo_y + h2, x2 - lo_x:x2 - lo_x + w2] = True
    return (grid_a & grid_b).sum() / (grid_a | grid_b).sum()


def hull_giou(b1, b2) -> mp.mpf:
    """GIoU from explicit corner arithmetic in arbitrary precision."""
    x1, y1, w1, h1 = (mp.mpf(v) for v in b1)
    x2, y2, w2, h2 = (mp.mpf(v) for v in b2)
    ix = max(mp.mpf(0), min(x1 + w1, x2 + w2) - max(x1, x2))
    iy = max(mp.mpf(0), min(y1 + h1, y2 + h2) - max(y1, y2))
    inter = ix * iy
    union = w1 * h1 + w2 * h2 - inter
    hull = (max(x1 + w1, x2 + w2) - min(x1, x2)) * (max(y1 + h1, y2 + h2) - min(y1, y2))
    return inter / union - (hull - union) / hull


def mp_exponent(w1h1, w2h2, gamma, kappa) -> mp.mpf:
    return 1 - mp.mpf(gamma) * mp.exp(-mp.sqrt((mp.mpf(w1h1) + w2h2) / 2) / kappa)


def naive_match(dets, gts, value_fn, threshold):
    """Nested-loop greedy matcher; dets/gts are lists of dicts with image/box/score.

    Returns the set of (det index, gt index) pairs and the unmatched det/gt sets.
    """
    order = sorted(range(len(dets)), key=lambda i: (-dets[i]["score"], i))
    used = set()
    pairs = set()
    for i in order:
        best_j, best_v = None, -math.inf
        for j in range(len(gts)):
            if j in used or gts[j]["image"] != dets[i]["image"]:
                continue
            v = value_fn(dets[i]["box"], gts[j]["box"])
            if v > best_v:
                best_j, best_v = j, v
        if best_j is not None and best_v >= threshold:
            used.add(best_j)
            pairs.add((i, best_j))
    matched_d = {i for i, _ in pairs}
    return pairs, set(range(len(dets))) - matched_d, set(range(len(gts))) - used


def brute_eleven_point(hits, n_gt) -> float:
    """11-point AP by direct enumeration of the grid and of every top-k cut."""
    pts = []
    for k in range(1, len(hits) + 1):
        tp = sum(hits[:k])
        pts.append((tp / n_gt, tp / k))
    grid = []
    for i in range(11):
        r = i / 10
        cands = [p for rec, p in pts if rec >= r]
        grid.append(max(cands) if cands else 0.0)
    # correctly rounded sum, so the result does not depend on summation order
    return math.fsum(grid) / 11


def brute_kendall(x, y) -> float:
    conc = disc = tx = ty = 0
    n = len(x)
    for i, j in itertools.combinations(range(n), 2):
        dx, dy = x[i] - x[j], y[i] - y[j]
        if dx == 0:
            tx += 1
        if dy == 0:
            ty += 1
        if dx * dy > 0:
            conc += 1
        elif dx * dy < 0:
            disc += 1
    n0 = n * (n - 1) // 2
    return (conc - disc) / math.sqrt((n0 - tx) * (n0 - ty))


def random_micro_dataset(rng: np.random.Generator, max_images=5, max_dets=5, max_gts=5, n_classes=1):
    """Small random detection/GT sets as plain dicts, boxes clustered so overlaps are common."""
    n_img = int(rng.integers(1, max_images + 1))
    dets, gts = [], []
    for _ in range(int(rng.integers(0, max_gts + 1))):
        gts.append({"image": int(rng.integers(n_img)), "cls": int(rng.integers(n_classes)),
                    "box": [*rng.uniform(0, 30, 2).round(1), *rng.uniform(4, 40, 2).round(1)]})
    for _ in range(int(rng.integers(0, max_dets + 1))):
        if gts and rng.uniform() < 0.8:
            src = gts[int(rng.integers(len(gts)))]
            box = [src["box"][0] + rng.normal(0, 4), src["box"][1] + rng.normal(0, 4),
                   max(src["box"][2] + rng.normal(0, 3), 1.0), max(src["box"][3] + rng.normal(0, 3), 1.0)]
            image, cls = src["image"], src["cls"]
        else:
            box = [*rng.uniform(0, 30, 2), *rng.uniform(4, 40, 2)]
            image, cls = int(rng.integers(n_img)), int(rng.integers(n_classes))
        # coarse scores make ties likely, exercising the stable tie-break
        dets.append({"image": image, "cls": cls, "box": [float(v) for v in box],
                     "score": float(rng.integers(0, 5)) / 4})
    return dets, gts


def plain_iou(b1, b2) -> float:
    x1, y1, w1, h1 = b1
    x2, y2, w2, h2 = b2
    ix = min(x1 + w1, x2 + w2) - max(x1, x2)
    iy = min(y1 + h1, y2 + h2) - max(y1, y2)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (w1 * h1 + w2 * h2 - inter)
