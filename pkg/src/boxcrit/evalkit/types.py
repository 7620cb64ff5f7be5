from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Hashable, Optional, Sequence

from boxcrit.boxcore import BoundingBox, CriterionSpec

SMALL_MAX = 32.0
MEDIUM_MAX = 96.0
AR_THRESHOLDS: tuple[float, ...] = tuple(round(0.5 + 0.05 * i, 10) for i in range(10))


class APStyle(str, enum.Enum):
    ELEVEN_POINT = "11pt"
    CONTINUOUS_AUC = "auc"


class SizeBucket(str, enum.Enum):
    ALL = "all"
    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"

    @classmethod
    def of(cls, box: BoundingBox) -> "SizeBucket":
        side = box.side()
        if side <= SMALL_MAX:
            return cls.SMALL
        if side <= MEDIUM_MAX:
            return cls.MEDIUM
        return cls.LARGE


@dataclass(frozen=True)
class Detection:
    image_id: Hashable
    class_id: Hashable
    box: BoundingBox
    score: float

    def __post_init__(self) -> None:
        score = float(self.score)
        if not 0.0 <= score <= 1.0:
            raise ValueError(f"detection score must lie in [0, 1], got {score}")
        object.__setattr__(self, "score", score)


@dataclass(frozen=True)
class GroundTruthObject:
    image_id: Hashable
    class_id: Hashable
    box: BoundingBox


def parse_thresholds(text: str, step: float = 0.05) -> tuple[float, ...]:
    """Parse ``"0.5"`` or ``"0.5:0.95"`` into a threshold schedule."""
    text = text.strip()
    if ":" not in text:
        return (float(text),)
    lo_s, hi_s = text.split(":", 1)
    lo, hi = float(lo_s), float(hi_s)
    if hi < lo:
        raise ValueError(f"threshold range {text!r} is decreasing")
    count = int(round((hi - lo) / step)) + 1
    return tuple(round(lo + step * i, 10) for i in range(count))


def class_sort_key(class_id: Hashable) -> tuple:
    # ints before strings so mixed identifiers still sort deterministically
    return (isinstance(class_id, str), class_id)


@dataclass(frozen=True)
class EvalConfig:
    criterion: CriterionSpec = field(default_factory=CriterionSpec)
    thresholds: tuple[float, ...] = (0.5,)
    ap_style: APStyle = APStyle.CONTINUOUS_AUC
    size_breakdown: bool = False
    max_detections: Optional[int] = None
    threads: int = 1

    def __post_init__(self) -> None:
        thresholds = tuple(float(t) for t in self.thresholds)
        if not thresholds:
            raise ValueError("at least one threshold is required")
        if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
            raise ValueError(f"thresholds must be strictly increasing, got {thresholds}")
        object.__setattr__(self, "thresholds", thresholds)
        object.__setattr__(self, "ap_style", APStyle(self.ap_style))
        if self.max_detections is not None and self.max_detections < 1:
            raise ValueError("max_detections must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


@dataclass(frozen=True)
class ClassResult:
    """AP and TP/FP/FN counts of one class, one entry per threshold."""

    class_id: Hashable
    n_gt: int
    n_det: int
    ap: tuple[float, ...]
    tp: tuple[int, ...]
    fp: tuple[int, ...]
    fn: tuple[int, ...]


@dataclass
class EvalReport:
    criterion: dict
    thresholds: tuple[float, ...]
    ap_style: str
    classes: list[ClassResult]
    map_per_threshold: list[float]
    ar: float
    size_map: dict[str, list[float]] = field(default_factory=dict)

    @property
    def map(self) -> float:
        """mAP averaged over the threshold schedule."""
        if not self.map_per_threshold:
            return 0.0
        return math.fsum(self.map_per_threshold) / len(self.map_per_threshold)

    def map_at(self, threshold: float) -> float:
        for t, value in zip(self.thresholds, self.map_per_threshold):
            if abs(t - threshold) < 1e-9:
                return value
        raise KeyError(f"threshold {threshold} not in schedule {self.thresholds}")

    def class_map(self) -> dict[Hashable, float]:
        """Per-class AP averaged over thresholds."""
        return {c.class_id: math.fsum(c.ap) / len(c.ap) for c in self.classes}

    def size_map_mean(self) -> dict[str, float]:
        return {b: (math.fsum(v) / len(v) if v else 0.0) for b, v in self.size_map.items()}

    def classes_without_gt(self) -> list[Hashable]:
        return [c.class_id for c in self.classes if c.n_gt == 0]


def mean_or_zero(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values) if values else 0.0
