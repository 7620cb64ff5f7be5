"""Precision-recall curves and average precision."""

from __future__ import annotations

import math
from typing import Iterable, Sequence, Union

from boxcrit.evalkit.types import APStyle

Curve = list[tuple[float, float]]


def precision_recall_curve(matches: Iterable, n_gt: int) -> Curve:
    """Running (recall, precision) over a score-ranked match list.

    ``matches`` yields either :class:`~boxcrit.evalkit.matching.Match` items or
    plain booleans (True for a true positive). With ``n_gt == 0`` recall is
    reported as 0 so any detections give an AP of 0.
    """
    if n_gt < 0:
        raise ValueError("n_gt must be >= 0")
    curve: Curve = []
    tp = 0
    for k, m in enumerate(matches, start=1):
        hit = m if isinstance(m, bool) else m.gt is not None
        tp += int(hit)
        recall = tp / n_gt if n_gt else 0.0
        curve.append((recall, tp / k))
    return curve


def interpolated_precision(curve: Sequence[tuple[float, float]]) -> list[float]:
    """Precision made non-increasing: at each point, the max over later points."""
    out = [0.0] * len(curve)
    best = 0.0
    for k in range(len(curve) - 1, -1, -1):
        best = max(best, curve[k][1])
        out[k] = best
    return out


def average_precision(
    curve: Sequence[tuple[float, float]],
    style: Union[APStyle, str] = APStyle.CONTINUOUS_AUC,
) -> float:
    if not curve:
        return 0.0
    style = APStyle(style)
    if style is APStyle.ELEVEN_POINT:
        interp = interpolated_precision(curve)
        points = []
        for i in range(11):
            r = i / 10
            # interp is non-increasing, so the first point reaching r has the max
            points.append(next((p for (rec, _), p in zip(curve, interp) if rec >= r), 0.0))
        return math.fsum(points) / 11
    interp = interpolated_precision(curve)
    areas = []
    prev = 0.0
    for (rec, _), p in zip(curve, interp):
        if rec > prev:
            areas.append((rec - prev) * p)
            prev = rec
    return math.fsum(areas)
