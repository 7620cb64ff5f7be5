"""Criterion-pluggable detection evaluation: matching, AP/mAP/AR, RmAP and NMS."""

from boxcrit.evalkit.ap import average_precision, interpolated_precision, precision_recall_curve
from boxcrit.evalkit.evaluate import average_recall, cap_detections, evaluate, rmap
from boxcrit.evalkit.matching import Match, match_detections
from boxcrit.evalkit.nms import nms
from boxcrit.evalkit.types import (
    AR_THRESHOLDS,
    APStyle,
    ClassResult,
    Detection,
    EvalConfig,
    EvalReport,
    GroundTruthObject,
    SizeBucket,
    parse_thresholds,
)

__all__ = [
    "AR_THRESHOLDS",
    "APStyle",
    "ClassResult",
    "Detection",
    "EvalConfig",
    "EvalReport",
    "GroundTruthObject",
    "Match",
    "SizeBucket",
    "average_precision",
    "average_recall",
    "cap_detections",
    "evaluate",
    "interpolated_precision",
    "match_detections",
    "nms",
    "parse_thresholds",
    "precision_recall_curve",
    "rmap",
]
