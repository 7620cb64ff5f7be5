"""Box geometry and similarity criteria.

Boxes use the ``[x, y, w, h]`` convention with ``(x, y)`` the top-left
corner, all in pixels. Every criterion has two entry points:

* a scalar function taking two :class:`BoundingBox` objects (``iou``,
  ``giou``, ...), and
* an array kernel working on ``(..., 4)`` arrays with numpy broadcasting
  (``iou_array``, ``giou_array``, ...), used by the evaluation and sampling
  code.

The scalar functions are thin wrappers around the array kernels, so both
paths return bit-identical values.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np



class DomainError(ValueError):
    """Raised when a value falls outside the domain of a formula."""


class CriterionKind(str, enum.Enum):
    IOU = "iou"
    GIOU = "giou"
    ALPHA_IOU = "alpha-iou"
    NWD = "nwd"
    SIOU = "siou"
    GSIOU = "gsiou"

    @classmethod
    def parse(cls, name: Union[str, "CriterionKind"]) -> "CriterionKind":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "-")
        aliases = {"alphaiou": "alpha-iou", "alpha": "alpha-iou"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown criterion {name!r} (expected one of {valid})") from None


class LossVariant(str, enum.Enum):
    LINEAR = "linear"
    LOG = "log"


class ShiftMode(str, enum.Enum):
    HORIZONTAL = "horizontal"
    DIAGONAL = "diagonal"


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box ``(x, y, w, h)`` with a top-left origin."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "w", "h"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"box coordinate {name}={value} is not finite")
            object.__setattr__(self, name, value)
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box must have positive width and height, got w={self.w}, h={self.h}")

    @classmethod
    def from_xyxy(cls, x1: float, y1: float, x2: float, y2: float) -> "BoundingBox":
        return cls(x1, y1, x2 - x1, y2 - y1)

    def area(self) -> float:
        return self.w * self.h

    def side(self) -> float:
        """Geometric-mean side length ``sqrt(w * h)``, used for size buckets."""
        return math.sqrt(self.w * self.h)

    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)

    def scaled(self, k: float) -> "BoundingBox":
        """Scale every coordinate by ``k`` (zoom about the image origin)."""
        return BoundingBox(self.x * k, self.y * k, self.w * k, self.h * k)

    def shifted(self, dx: float, dy: float = 0.0) -> "BoundingBox":
        return BoundingBox(self.x + dx, self.y + dy, self.w, self.h)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.w, self.h], dtype=np.float64)

    def as_list(self) -> list[float]:
        return [self.x, self.y, self.w, self.h]


BoxLike = Union[BoundingBox, Sequence[float], np.ndarray]


def as_box_array(boxes: Union[BoxLike, Iterable[BoxLike]]) -> np.ndarray:
    """Convert a box, a sequence of boxes, or an array to a float64 ``(..., 4)`` array."""
    if isinstance(boxes, BoundingBox):
        return boxes.as_array()
    if isinstance(boxes, np.ndarray):
        arr = boxes.astype(np.float64, copy=False)
    else:
        items = list(boxes)
        if items and isinstance(items[0], BoundingBox):
            arr = np.array([b.as_list() for b in items], dtype=np.float64)
        else:
            arr = np.asarray(items, dtype=np.float64)
    if arr.shape[-1:] != (4,):
        if arr.size == 0:
            return arr.reshape(0, 4)
        raise ValueError(f"expected boxes with 4 coordinates, got shape {arr.shape}")
    return arr


# ---------------------------------------------------------------------------
# Array kernels
# ---------------------------------------------------------------------------


def _overlap(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return (intersection area, union area)."""
    ax, ay, aw, ah = np.moveaxis(a, -1, 0)
    bx, by, bw, bh = np.moveaxis(b, -1, 0)
    # overlap from the offset d = b - a rather than from edge coordinates, so
    # identical boxes give exactly w * h with no (x + w) - x rounding
    dx, dy = bx - ax, by - ay
    ix = np.maximum(np.minimum(aw - np.maximum(dx, 0.0), bw + np.minimum(dx, 0.0)), 0.0)
    iy = np.maximum(np.minimum(ah - np.maximum(dy, 0.0), bh + np.minimum(dy, 0.0)), 0.0)
    inter = ix * iy
    union = aw * ah + bw * bh - inter
    return inter, union


def iou_array(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    inter, union = _overlap(a, b)
    return np.minimum(inter / union, 1.0)


def giou_array(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ax, ay, aw, ah = np.moveaxis(a, -1, 0)
    bx, by, bw, bh = np.moveaxis(b, -1, 0)
    inter, union = _overlap(a, b)
    dx, dy = bx - ax, by - ay
    hull_w = np.maximum(aw - np.minimum(dx, 0.0), bw + np.maximum(dx, 0.0))
    hull_h = np.maximum(ah - np.minimum(dy, 0.0), bh + np.maximum(dy, 0.0))
    hull = hull_w * hull_h
    return np.clip(np.minimum(inter / union, 1.0) - (hull - union) / hull, -1.0, 1.0)


def siou_exponent_array(a: np.ndarray, b: np.ndarray, gamma: float, kappa: float) -> np.ndarray:
    _check_siou_params(gamma, kappa)
    aw, ah = a[..., 2], a[..., 3]
    bw, bh = b[..., 2], b[..., 3]
    # sqrt(tau) with tau the mean area; equals omega for two squares of width omega
    root_tau = np.sqrt((aw * ah + bw * bh) / 2.0)
    return 1.0 - gamma * np.exp(-root_tau / kappa)


def _signed_power(value: np.ndarray, p: np.ndarray) -> np.ndarray:
    mag = np.abs(value)
    out = np.where(mag > 0.0, np.power(np.where(mag > 0.0, mag, 1.0), p), 0.0)
    return np.copysign(out, value)


def siou_array(a: np.ndarray, b: np.ndarray, gamma: float, kappa: float) -> np.ndarray:
    p = siou_exponent_array(a, b, gamma, kappa)
    return _signed_power(iou_array(a, b), p)


def gsiou_array(a: np.ndarray, b: np.ndarray, gamma: float, kappa: float) -> np.ndarray:
    p = siou_exponent_array(a, b, gamma, kappa)
    return _signed_power(giou_array(a, b), p)


def alpha_iou_array(a: np.ndarray, b: np.ndarray, alpha: float) -> np.ndarray:
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    return _signed_power(iou_array(a, b), alpha)


def nwd_array(a: np.ndarray, b: np.ndarray, c: float) -> np.ndarray:
    if not c > 0:
        raise ValueError(f"NWD constant must be > 0, got {c}")
    ax, ay, aw, ah = np.moveaxis(a, -1, 0)
    bx, by, bw, bh = np.moveaxis(b, -1, 0)
    dcx = (ax + aw / 2.0) - (bx + bw / 2.0)
    dcy = (ay + ah / 2.0) - (by + bh / 2.0)
    dw = (aw - bw) / 2.0
    dh = (ah - bh) / 2.0
    w2 = np.sqrt(dcx * dcx + dcy * dcy + dw * dw + dh * dh)
    return np.exp(-w2 / c)


def _check_siou_params(gamma: float, kappa: float) -> None:
    if not gamma <= 1.0:
        raise ValueError(f"gamma must be <= 1, got {gamma}")
    if not kappa > 0.0:
        raise ValueError(f"kappa must be > 0, got {kappa}")


# ---------------------------------------------------------------------------
# Criterion specification
# ---------------------------------------------------------------------------

_RANGES = {
    CriterionKind.IOU: (0.0, 1.0),
    CriterionKind.SIOU: (0.0, 1.0),
    CriterionKind.ALPHA_IOU: (0.0, 1.0),
    CriterionKind.NWD: (0.0, 1.0),
    CriterionKind.GIOU: (-1.0, 1.0),
    CriterionKind.GSIOU: (-1.0, 1.0),
}


@dataclass(frozen=True)
class CriterionSpec:
    """A criterion kind plus its parameters.

    Parameters that do not apply to ``kind`` are carried along but ignored.
    """

    kind: CriterionKind = CriterionKind.IOU
    gamma: float = 0.5
    kappa: float = 64.0
    alpha: float = 3.0
    nwd_constant: float = 32.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", CriterionKind.parse(self.kind))
        for name in ("gamma", "kappa", "alpha", "nwd_constant"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.kind in (CriterionKind.SIOU, CriterionKind.GSIOU):
            _check_siou_params(self.gamma, self.kappa)
        elif self.kind is CriterionKind.ALPHA_IOU and not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        elif self.kind is CriterionKind.NWD and not self.nwd_constant > 0:
            raise ValueError(f"NWD constant must be > 0, got {self.nwd_constant}")

    @property
    def bounds(self) -> tuple[float, float]:
        return _RANGES[self.kind]

    def params(self) -> dict[str, float]:
        """Parameters relevant to this kind (used for reporting)."""
        if self.kind in (CriterionKind.SIOU, CriterionKind.GSIOU):
            return {"gamma": self.gamma, "kappa": self.kappa}
        if self.kind is CriterionKind.ALPHA_IOU:
            return {"alpha": self.alpha}
        if self.kind is CriterionKind.NWD:
            return {"nwd_constant": self.nwd_constant}
        return {}

    def values(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Elementwise criterion between broadcastable ``(..., 4)`` arrays."""
        a = as_box_array(a)
        b = as_box_array(b)
        kind = self.kind
        if kind is CriterionKind.IOU:
            return iou_array(a, b)
        if kind is CriterionKind.GIOU:
            return giou_array(a, b)
        if kind is CriterionKind.SIOU:
            return siou_array(a, b, self.gamma, self.kappa)
        if kind is CriterionKind.GSIOU:
            return gsiou_array(a, b, self.gamma, self.kappa)
        if kind is CriterionKind.ALPHA_IOU:
            return alpha_iou_array(a, b, self.alpha)
        return nwd_array(a, b, self.nwd_constant)

    def pairwise(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """``(N, M)`` matrix of criterion values between two box sets."""
        a = as_box_array(a).reshape(-1, 4)
        b = as_box_array(b).reshape(-1, 4)
        return self.values(a[:, None, :], b[None, :, :])

    def __call__(self, b1: BoxLike, b2: BoxLike) -> float:
        return float(self.values(as_box_array(b1), as_box_array(b2)))


# ---------------------------------------------------------------------------
# Scalar API
# ---------------------------------------------------------------------------


def iou(b1: BoxLike, b2: BoxLike) -> float:
    """Intersection over union of two boxes, in ``[0, 1]``."""
    return float(iou_array(as_box_array(b1), as_box_array(b2)))


def giou(b1: BoxLike, b2: BoxLike) -> float:
    """Generalized IoU: IoU minus the fraction of the enclosing box left uncovered."""
    return float(giou_array(as_box_array(b1), as_box_array(b2)))


def siou_exponent(b1: BoxLike, b2: BoxLike, gamma: float, kappa: float) -> float:
    """Size-dependent exponent ``1 - gamma * exp(-sqrt(tau) / kappa)``.

    ``tau`` is the mean area of the two boxes. ``gamma <= 1`` and ``kappa > 0``
    keep the exponent non-negative.
    """
    return float(siou_exponent_array(as_box_array(b1), as_box_array(b2), gamma, kappa))


def siou(b1: BoxLike, b2: BoxLike, gamma: float, kappa: float) -> float:
    """Scale-adaptive IoU: IoU raised to :func:`siou_exponent`."""
    return float(siou_array(as_box_array(b1), as_box_array(b2), gamma, kappa))


def gsiou(b1: BoxLike, b2: BoxLike, gamma: float, kappa: float) -> float:
    """Sign-preserving power of GIoU with the SIoU exponent."""
    return float(gsiou_array(as_box_array(b1), as_box_array(b2), gamma, kappa))


def alpha_iou(b1: BoxLike, b2: BoxLike, alpha: float) -> float:
    return float(alpha_iou_array(as_box_array(b1), as_box_array(b2), alpha))


def nwd(b1: BoxLike, b2: BoxLike, c: float = 32.0) -> float:
    """Normalized Wasserstein distance similarity ``exp(-W2 / c)``.

    W2 is the 2-Wasserstein distance between the Gaussians
    ``N(center, diag(w^2/4, h^2/4))`` fitted to each box.
    """
    return float(nwd_array(as_box_array(b1), as_box_array(b2), c))


def criterion_loss(
    spec: CriterionSpec,
    b1: BoxLike,
    b2: BoxLike,
    variant: Union[LossVariant, str] = LossVariant.LINEAR,
) -> float:
    """Regression loss ``1 - C`` (linear) or ``-ln C`` (log)."""
    value = spec(b1, b2)
    if LossVariant(variant) is LossVariant.LINEAR:
        return 1.0 - value
    if value <= 0.0:
        raise DomainError(f"log loss undefined for criterion value {value}")
    return -math.log(value)


def loss_ratio(iou_value: float, p: float) -> float:
    """Ratio of SIoU to IoU linear losses, ``(1 - IoU^p) / (1 - IoU)``.

    Raises DomainError at ``iou_value == 1`` where the ratio is only defined as
    a limit (equal to ``p``).
    """
    if not 0.0 <= iou_value <= 1.0:
        raise DomainError(f"IoU must lie in [0, 1], got {iou_value}")
    if iou_value == 1.0:
        raise DomainError("loss ratio is a 0/0 limit at IoU = 1; its limit is p")
    return (1.0 - iou_value**p) / (1.0 - iou_value)


def gradient_ratio(iou_value: float, p: float) -> float:
    """Ratio of SIoU to IoU loss-gradient magnitudes, ``p * IoU^(p-1)``."""
    if not 0.0 < iou_value <= 1.0:
        raise DomainError(f"IoU must lie in (0, 1], got {iou_value}")
    return p * iou_value ** (p - 1.0)


def iou_gradient(b1: BoxLike, b2: BoxLike) -> np.ndarray:
    """Analytic gradient of IoU w.r.t. ``(x, y, w, h)`` of ``b1``.

    One-sided choices are made at kinks (coinciding edges).
    """
    x1, y1, w1, h1 = as_box_array(b1)
    x2, y2, w2, h2 = as_box_array(b2)
    ix = min(x1 + w1, x2 + w2) - max(x1, x2)
    iy = min(y1 + h1, y2 + h2) - max(y1, y2)
    if ix <= 0 or iy <= 0:
        return np.zeros(4)
    # d(ix)/d(x1, w1) and d(iy)/d(y1, h1)
    right_inner = 1.0 if x1 + w1 < x2 + w2 else 0.0
    left_inner = 1.0 if x1 > x2 else 0.0
    bottom_inner = 1.0 if y1 + h1 < y2 + h2 else 0.0
    top_inner = 1.0 if y1 > y2 else 0.0
    d_ix = np.array([right_inner - left_inner, 0.0, right_inner, 0.0])
    d_iy = np.array([0.0, bottom_inner - top_inner, 0.0, bottom_inner])
    inter = ix * iy
    union = w1 * h1 + w2 * h2 - inter
    d_inter = d_ix * iy + d_iy * ix
    d_area = np.array([0.0, 0.0, h1, w1])
    d_union = d_area - d_inter
    return (d_inter * union - inter * d_union) / (union * union)


def siou_loss_gradient(b1: BoxLike, b2: BoxLike, gamma: float, kappa: float) -> np.ndarray:
    """Gradient of ``1 - SIoU`` w.r.t. ``b1`` with the exponent held constant."""
    p = siou_exponent(b1, b2, gamma, kappa)
    value = iou(b1, b2)
    if value == 0.0:
        return np.zeros(4)
    return -p * value ** (p - 1.0) * iou_gradient(b1, b2)


def shift_sweep(
    spec: CriterionSpec,
    omega: float,
    shifts: Iterable[float],
    mode: Union[ShiftMode, str] = ShiftMode.HORIZONTAL,
) -> list[tuple[float, float]]:
    """Criterion between a square of width ``omega`` and shifted copies of it.

    Diagonal mode moves the copy by ``shift`` pixels along each axis.
    """
    if not omega > 0:
        raise ValueError(f"omega must be > 0, got {omega}")
    mode = ShiftMode(mode)
    shifts = [float(s) for s in shifts]
    if any(s < 0 for s in shifts):
        raise ValueError("shifts must be non-negative")
    eps = np.asarray(shifts, dtype=np.float64)
    ref = np.array([0.0, 0.0, omega, omega])
    moved = np.zeros((len(shifts), 4))
    moved[:, 0] = eps
    moved[:, 1] = eps if mode is ShiftMode.DIAGONAL else 0.0
    moved[:, 2:] = omega
    values = spec.values(ref[None, :], moved)
    return [(s, float(v)) for s, v in zip(shifts, values)]
