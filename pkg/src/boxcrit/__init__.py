"""Bounding-box similarity criteria, criterion-pluggable detection evaluation
and Monte-Carlo / quadrature analysis of criterion distributions."""

from boxcrit.boxcore import (
    BoundingBox,
    CriterionKind,
    CriterionSpec,
    DomainError,
    LossVariant,
    ShiftMode,
    alpha_iou,
    criterion_loss,
    giou,
    gradient_ratio,
    gsiou,
    iou,
    loss_ratio,
    nwd,
    shift_sweep,
    siou,
    siou_exponent,
)

__all__ = [
    "BoundingBox",
    "CriterionKind",
    "CriterionSpec",
    "DomainError",
    "LossVariant",
    "ShiftMode",
    "alpha_iou",
    "criterion_loss",
    "giou",
    "gradient_ratio",
    "gsiou",
    "iou",
    "loss_ratio",
    "nwd",
    "shift_sweep",
    "siou",
    "siou_exponent",
]

__version__ = "0.1.0"
