"""Per-class AP, mAP over threshold schedules, per-size mAP and AR."""

from __future__ import annotations

from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from typing import Hashable, Iterable, Optional, Sequence

import numpy as np

from boxcrit.boxcore import DomainError
from boxcrit.evalkit.ap import average_precision, precision_recall_curve
from boxcrit.evalkit.matching import assign_all, image_matrices, score_order
from boxcrit.evalkit.types import (
    AR_THRESHOLDS,
    ClassResult,
    Detection,
    EvalConfig,
    EvalReport,
    GroundTruthObject,
    SizeBucket,
    class_sort_key,
    mean_or_zero,
)


def cap_detections(dets: Sequence[Detection], max_detections: Optional[int]) -> list[Detection]:
    """Keep the ``max_detections`` highest-scored detections per (image, class)."""
    if max_detections is None:
        return list(dets)
    kept_count: dict[tuple, int] = defaultdict(int)
    keep = set()
    for i in score_order(dets):
        key = (dets[i].image_id, dets[i].class_id)
        if kept_count[key] < max_detections:
            kept_count[key] += 1
            keep.add(i)
    return [d for i, d in enumerate(dets) if i in keep]


def _split_by_class(dets, gts):
    det_by_class: dict[Hashable, list[Detection]] = defaultdict(list)
    gt_by_class: dict[Hashable, list[GroundTruthObject]] = defaultdict(list)
    for d in dets:
        det_by_class[d.class_id].append(d)
    for g in gts:
        gt_by_class[g.class_id].append(g)
    classes = sorted(set(det_by_class) | set(gt_by_class), key=class_sort_key)
    return classes, det_by_class, gt_by_class


def _evaluate_class(class_id, dets, gts, config: EvalConfig) -> ClassResult:
    matrices = image_matrices(dets, gts, config.criterion)
    order = score_order(dets)
    aps, tps, fps, fns = [], [], [], []
    for t in config.thresholds:
        matched, _ = assign_all(matrices, len(dets), t)
        hits = [bool(matched[i] >= 0) for i in order]
        tp = sum(hits)
        curve = precision_recall_curve(hits, len(gts))
        aps.append(average_precision(curve, config.ap_style) if gts else 0.0)
        tps.append(tp)
        fps.append(len(dets) - tp)
        fns.append(len(gts) - tp)
    return ClassResult(class_id, len(gts), len(dets), tuple(aps), tuple(tps), tuple(fps), tuple(fns))


def _class_results(dets, gts, config: EvalConfig) -> list[ClassResult]:
    classes, det_by_class, gt_by_class = _split_by_class(dets, gts)
    jobs = [(c, det_by_class.get(c, []), gt_by_class.get(c, []), config) for c in classes]
    if config.threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            return list(pool.map(lambda job: _evaluate_class(*job), jobs))
    return [_evaluate_class(*job) for job in jobs]


def _map_per_threshold(results: list[ClassResult], n_thresholds: int) -> list[float]:
    return [mean_or_zero([r.ap[k] for r in results]) for k in range(n_thresholds)]


def evaluate(
    dets: Iterable[Detection],
    gts: Iterable[GroundTruthObject],
    config: EvalConfig,
) -> EvalReport:
    """Evaluate detections against ground truth with a pluggable criterion.

    Every class seen in either set gets an AP per threshold; classes without
    ground truth score 0. mAP is the plain mean over classes and the headline
    mAP the mean over thresholds. With ``config.size_breakdown`` both sets are
    filtered by size bucket before re-evaluating.
    """
    dets = cap_detections(list(dets), config.max_detections)
    gts = list(gts)
    results = _class_results(dets, gts, config)
    report = EvalReport(
        criterion={"kind": config.criterion.kind.value, **config.criterion.params()},
        thresholds=config.thresholds,
        ap_style=config.ap_style.value,
        classes=results,
        map_per_threshold=_map_per_threshold(results, len(config.thresholds)),
        ar=average_recall(dets, gts, config),
    )
    if config.size_breakdown:
        report.size_map[SizeBucket.ALL.value] = list(report.map_per_threshold)
        for bucket in (SizeBucket.SMALL, SizeBucket.MEDIUM, SizeBucket.LARGE):
            b_dets = [d for d in dets if SizeBucket.of(d.box) is bucket]
            b_gts = [g for g in gts if SizeBucket.of(g.box) is bucket]
            b_results = _class_results(b_dets, b_gts, config)
            report.size_map[bucket.value] = _map_per_threshold(b_results, len(config.thresholds))
    return report


def average_recall(
    dets: Iterable[Detection],
    gts: Iterable[GroundTruthObject],
    config: EvalConfig,
    thresholds: Sequence[float] = AR_THRESHOLDS,
) -> float:
    """Recall averaged over thresholds 0.50:0.05:0.95, then over classes with GTs."""
    dets = cap_detections(list(dets), config.max_detections)
    gts = list(gts)
    classes, det_by_class, gt_by_class = _split_by_class(dets, gts)
    per_class = []
    for c in classes:
        c_gts = gt_by_class.get(c, [])
        if not c_gts:
            continue
        c_dets = det_by_class.get(c, [])
        matrices = image_matrices(c_dets, c_gts, config.criterion)
        recalls = []
        for t in thresholds:
            matched, _ = assign_all(matrices, len(c_dets), t)
            recalls.append(int(np.count_nonzero(matched >= 0)) / len(c_gts))
        per_class.append(mean_or_zero(recalls))
    return mean_or_zero(per_class)


def rmap(map_method: float, map_baseline: float) -> float:
    """Relative mAP gap ``(method - baseline) / baseline``."""
    if map_baseline == 0:
        raise DomainError("RmAP undefined for a zero baseline mAP")
    return (map_method - map_baseline) / map_baseline
