"""Greedy score-ordered matching of detections to ground truth."""

from __future__ import annotations

from collections import defaultdict
from typing import Hashable, NamedTuple, Optional, Sequence

import numpy as np

from boxcrit.boxcore import CriterionSpec
from boxcrit.evalkit.types import Detection, GroundTruthObject


class Match(NamedTuple):
    detection: Detection
    gt: Optional[GroundTruthObject]
    value: float  # criterion value with the matched GT, nan when unmatched


def score_order(dets: Sequence[Detection]) -> list[int]:
    """Indices of ``dets`` by descending score; ties keep input order."""
    return sorted(range(len(dets)), key=lambda i: -dets[i].score)


def greedy_assign(values: np.ndarray, threshold: float) -> np.ndarray:
    """Assign rows (detections, already score-sorted) to columns (GTs).

    Each row takes the unmatched column with the highest value, provided the
    value reaches ``threshold``; ties go to the lowest column index.
    Returns the matched column per row, -1 when unmatched.
    """
    n_det, n_gt = values.shape
    assigned = np.full(n_det, -1, dtype=np.int64)
    if n_gt == 0:
        return assigned
    taken = np.zeros(n_gt, dtype=bool)
    for i in range(n_det):
        row = np.where(taken, -np.inf, values[i])
        j = int(np.argmax(row))
        if not taken[j] and row[j] >= threshold:
            assigned[i] = j
            taken[j] = True
    return assigned


def group_by_image(dets: Sequence[Detection], gts: Sequence[GroundTruthObject]):
    """Split score-sorted detections and GTs into per-image index lists."""
    det_groups: dict[Hashable, list[int]] = defaultdict(list)
    for i in score_order(dets):
        det_groups[dets[i].image_id].append(i)
    gt_groups: dict[Hashable, list[int]] = defaultdict(list)
    for j, gt in enumerate(gts):
        gt_groups[gt.image_id].append(j)
    return det_groups, gt_groups


def image_matrices(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruthObject],
    criterion: CriterionSpec,
) -> list[tuple[list[int], list[int], np.ndarray]]:
    """Per image: (sorted det indices, GT indices, criterion matrix)."""
    det_groups, gt_groups = group_by_image(dets, gts)
    out = []
    for image_id, det_idx in det_groups.items():
        gt_idx = gt_groups.get(image_id, [])
        if gt_idx:
            matrix = criterion.pairwise(
                [dets[i].box for i in det_idx], [gts[j].box for j in gt_idx]
            )
        else:
            matrix = np.zeros((len(det_idx), 0))
        out.append((det_idx, gt_idx, matrix))
    return out


def assign_all(
    matrices: list[tuple[list[int], list[int], np.ndarray]],
    n_dets: int,
    threshold: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Global arrays: matched GT index per detection (-1 if none) and matched value."""
    matched = np.full(n_dets, -1, dtype=np.int64)
    value = np.full(n_dets, np.nan)
    for det_idx, gt_idx, matrix in matrices:
        cols = greedy_assign(matrix, threshold)
        for row, col in enumerate(cols):
            if col >= 0:
                matched[det_idx[row]] = gt_idx[col]
                value[det_idx[row]] = matrix[row, col]
    return matched, value


def match_detections(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruthObject],
    criterion: CriterionSpec,
    threshold: float,
) -> list[Match]:
    """Greedy matching of single-class detections against ground truth.

    Detections are processed by descending score (stable for ties) and each
    takes the best still-unmatched GT of its image when the criterion value
    reaches ``threshold``. The result is in score order.
    """
    dets = list(dets)
    gts = list(gts)
    matched, value = assign_all(image_matrices(dets, gts, criterion), len(dets), threshold)
    return [
        Match(dets[i], gts[matched[i]] if matched[i] >= 0 else None, float(value[i]))
        for i in score_order(dets)
    ]
