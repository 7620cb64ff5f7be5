"""Closed-form densities and quadrature moments for horizontally shifted squares.

Setting: two squares of width ``omega``, the second shifted horizontally by
``X ~ N(0, sigma^2)``. With ``u = |X| / omega`` GIoU equals
``(1 - u) / (1 + u)`` and IoU is the same expression clipped at 0. SIoU and
GSIoU raise these to the exponent ``p = 1 - gamma * exp(-omega / kappa)``.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Union

import numpy as np
from scipy import integrate, special

from boxcrit.boxcore import CriterionKind, siou_exponent

THEORY_KINDS = (CriterionKind.IOU, CriterionKind.GIOU, CriterionKind.SIOU, CriterionKind.GSIOU)
# Gaussian factor exp(-t^2/2) drops below 1e-16 past this many standard deviations
TRUNCATION = math.sqrt(2.0 * math.log(1e16))
ABS_TOL = 1e-9


class QuadratureError(RuntimeError):
    def __init__(self, message: str, error_estimate: float):
        super().__init__(f"{message} (error estimate {error_estimate:.3g})")
        self.error_estimate = error_estimate


class Moments(NamedTuple):
    mean: float
    second: float
    std: float
    error_estimate: float


def _kind(kind: Union[str, CriterionKind]) -> CriterionKind:
    kind = CriterionKind.parse(kind)
    if kind not in THEORY_KINDS:
        raise ValueError(f"no closed-form distribution for {kind.value}")
    return kind


def exponent_for(kind: CriterionKind, omega: float, gamma: float, kappa: float) -> float:
    if kind in (CriterionKind.SIOU, CriterionKind.GSIOU):
        square = (0.0, 0.0, omega, omega)
        return siou_exponent(square, square, gamma, kappa)
    return 1.0


def _giou_density(y: np.ndarray, omega: float, sigma: float) -> np.ndarray:
    """Density of GIoU on (-1, 1]; zero at the open end y = -1."""
    y = np.asarray(y, dtype=np.float64)
    out = np.zeros_like(y)
    inside = (y > -1.0) & (y <= 1.0)
    yi = y[inside]
    shift = omega * (1.0 - yi) / (1.0 + yi)
    gauss = np.exp(-0.5 * (shift / sigma) ** 2) / (math.sqrt(2.0 * math.pi) * sigma)
    out[inside] = 4.0 * omega / (1.0 + yi) ** 2 * gauss
    return out


def zero_atom_mass(
    kind: Union[str, CriterionKind], omega: float, sigma: float
) -> float:
    """Probability mass at z = 0: boxes do not overlap (IoU and SIoU only)."""
    kind = _kind(kind)
    if kind in (CriterionKind.IOU, CriterionKind.SIOU):
        return float(special.erfc(omega / (sigma * math.sqrt(2.0))))
    return 0.0


def theoretical_pdf(
    kind: Union[str, CriterionKind],
    z,
    omega: float,
    sigma: float,
    gamma: float = 0.0,
    kappa: float = 64.0,
):
    """Continuous part of the criterion density at ``z``.

    For IoU and SIoU the point mass at 0 is reported separately by
    :func:`zero_atom_mass`. Values of ``z`` outside the criterion range get 0.
    Accepts scalars or arrays.
    """
    kind = _kind(kind)
    if not (omega > 0 and sigma > 0):
        raise ValueError("omega and sigma must be > 0")
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))
    p = exponent_for(kind, omega, gamma, kappa)
    out = np.zeros_like(z)
    pos = (z > 0.0) & (z <= 1.0) if kind in (CriterionKind.IOU, CriterionKind.SIOU) else (z >= 0.0) & (z <= 1.0)
    neg = (z >= -1.0) & (z < 0.0) if kind in (CriterionKind.GIOU, CriterionKind.GSIOU) else np.zeros_like(pos)
    with np.errstate(divide="ignore", invalid="ignore"):
        for mask, sign in ((pos, 1.0), (neg, -1.0)):
            if not mask.any():
                continue
            mag = np.abs(z[mask])
            y = sign * mag ** (1.0 / p)
            jac = (1.0 / p) * mag ** (1.0 / p - 1.0) if p != 1.0 else 1.0
            out[mask] = _giou_density(y, omega, sigma) * jac
    out = np.nan_to_num(out, nan=0.0, posinf=np.inf)
    return float(out[0]) if scalar else out


def criterion_of_shift(kind: CriterionKind, u: np.ndarray, p: float) -> np.ndarray:
    """Criterion value for a normalized horizontal shift ``u = |x| / omega``."""
    g = (1.0 - u) / (1.0 + u)
    if kind is CriterionKind.GIOU:
        return g
    if kind is CriterionKind.IOU:
        return np.maximum(g, 0.0)
    if kind is CriterionKind.SIOU:
        return np.maximum(g, 0.0) ** p
    return np.sign(g) * np.abs(g) ** p


def theoretical_moments(
    kind: Union[str, CriterionKind],
    omega: float,
    sigma: float,
    gamma: float = 0.0,
    kappa: float = 64.0,
) -> Moments:
    """First two moments of the criterion by adaptive quadrature.

    With ``t = |x| / sigma`` and ``a = sigma / omega``,
    ``E[Z^k] = sqrt(2/pi) * integral_0^inf C(a t)^k exp(-t^2/2) dt``.
    The integral is split at the kink ``t = 1/a`` and truncated where the
    Gaussian factor falls below 1e-16.
    """
    kind = _kind(kind)
    if not (omega > 0 and sigma > 0):
        raise ValueError("omega and sigma must be > 0")
    a = sigma / omega
    p = exponent_for(kind, omega, gamma, kappa)
    kink = 1.0 / a
    pieces = [(0.0, min(kink, TRUNCATION))]
    if kink < TRUNCATION and kind in (CriterionKind.GIOU, CriterionKind.GSIOU):
        pieces.append((kink, TRUNCATION))

    def moment(k: int) -> tuple[float, float]:
        total, err = 0.0, 0.0
        for lo, hi in pieces:
            value, abserr, info = integrate.quad(
                lambda t: float(criterion_of_shift(kind, np.float64(a * t), p)) ** k * math.exp(-0.5 * t * t),
                lo,
                hi,
                epsabs=ABS_TOL,
                epsrel=1e-12,
                limit=200,
                full_output=True,
            )[:3]
            if abserr > 10 * ABS_TOL:
                raise QuadratureError(f"quadrature did not converge for {kind.value} moment {k}", abserr)
            total += value
            err += abserr
        scale = math.sqrt(2.0 / math.pi)
        return scale * total, scale * err

    mean, err1 = moment(1)
    second, err2 = moment(2)
    return Moments(mean, second, math.sqrt(max(second - mean * mean, 0.0)), max(err1, err2))
