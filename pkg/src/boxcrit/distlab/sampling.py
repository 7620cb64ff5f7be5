"""Monte-Carlo estimation of criterion distributions under random box shifts."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from boxcrit.boxcore import CriterionSpec, ShiftMode

DEFAULT_OMEGAS: tuple[float, ...] = (4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0)
DEFAULT_SIGMA = 16.0
# (gamma, kappa) presets used in the criterion-distribution figures
SIOU_PRESETS: tuple[tuple[float, float], ...] = ((0.5, 64.0), (-3.0, 16.0), (-4.0, 16.0))


class SizeMode(str, enum.Enum):
    SAME = "same"
    DIFFERENT = "different"


@dataclass(frozen=True)
class PerturbationModel:
    """Detector inaccuracy: Gaussian shift with std ``sigma0 + lam * omega``.

    In ``DIFFERENT`` size mode the predicted box is a square of width
    ``ratio * omega`` sharing the ground-truth center before the shift.
    Diagonal shifts move the prediction by the same draw along both axes.
    """

    sigma0: float = DEFAULT_SIGMA
    lam: float = 0.0
    shift_mode: ShiftMode = ShiftMode.HORIZONTAL
    size_mode: SizeMode = SizeMode.SAME
    ratio: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "shift_mode", ShiftMode(self.shift_mode))
        object.__setattr__(self, "size_mode", SizeMode(self.size_mode))
        if self.sigma0 < 0 or self.lam < 0:
            raise ValueError("sigma0 and lambda must be non-negative")
        if not self.ratio > 0:
            raise ValueError("size ratio must be > 0")

    def sigma(self, omega: float) -> float:
        s = self.sigma0 + self.lam * omega
        if not s > 0:
            raise ValueError(f"inaccuracy sigma({omega}) = {s} must be > 0")
        return s

    def pred_width(self, omega: float) -> float:
        return omega * self.ratio if self.size_mode is SizeMode.DIFFERENT else omega


@dataclass
class DistributionSummary:
    criterion: str
    params: dict
    omega: float
    sigma0: float
    lam: float
    n_samples: int
    mean: float
    std: float
    std_error: float
    seed: int
    workers: int = 1
    pdf_grid: list[tuple[float, float]] = field(default_factory=list)

    @property
    def sigma(self) -> float:
        return self.sigma0 + self.lam * self.omega


def shifted_box_pairs(
    omega: float, model: PerturbationModel, shifts: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Ground-truth square centered at the origin and predictions moved by ``shifts``."""
    gt = np.array([-omega / 2.0, -omega / 2.0, omega, omega])
    width = model.pred_width(omega)
    pred = np.empty((shifts.size, 4))
    pred[:, 0] = shifts - width / 2.0
    if model.shift_mode is ShiftMode.DIAGONAL:
        pred[:, 1] = shifts - width / 2.0
    else:
        pred[:, 1] = -width / 2.0
    pred[:, 2] = width
    pred[:, 3] = width
    return gt, pred


def split_counts(n: int, workers: int) -> list[int]:
    base, extra = divmod(n, workers)
    return [base + (1 if i < extra else 0) for i in range(workers)]


def draw_criterion_values(
    spec: CriterionSpec,
    omega: float,
    model: PerturbationModel,
    n: int,
    seed: int,
    workers: int = 1,
) -> np.ndarray:
    """Raw criterion samples; worker ``i`` uses child ``i`` of the seed sequence."""
    sigma = model.sigma(omega)
    children = np.random.SeedSequence(seed).spawn(workers)
    counts = split_counts(n, workers)

    def run(i: int) -> np.ndarray:
        rng = np.random.default_rng(children[i])
        shifts = rng.normal(0.0, sigma, size=counts[i])
        gt, pred = shifted_box_pairs(omega, model, shifts)
        return spec.values(gt[None, :], pred)

    if workers == 1:
        return run(0)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(run, range(workers)))
    return np.concatenate(parts)


def silverman_bandwidth(samples: np.ndarray) -> float:
    n = samples.size
    std = float(np.std(samples, ddof=1)) if n > 1 else 0.0
    q75, q25 = np.percentile(samples, [75, 25])
    spread = [s for s in (std, (q75 - q25) / 1.34) if s > 0]
    if not spread:
        return 0.0
    return 0.9 * min(spread) * n ** (-0.2)


def kde_grid(
    samples: np.ndarray,
    lower: float,
    upper: float,
    n_grid: int = 201,
    n_bins: int = 4096,
    reflect: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian KDE on a regular grid over ``[lower, upper]``.

    Samples are binned first so the cost does not grow with the sample count.
    With ``reflect`` the kernel mass spilling past either bound is folded back.
    """
    grid = np.linspace(lower, upper, n_grid)
    step = (upper - lower) / (n_grid - 1)
    h = max(silverman_bandwidth(samples), step)
    counts, edges = np.histogram(np.clip(samples, lower, upper), bins=n_bins, range=(lower, upper))
    centers = 0.5 * (edges[:-1] + edges[1:])
    used = counts > 0
    centers, weights = centers[used], counts[used] / samples.size
    sources = [centers]
    if reflect:
        sources += [2.0 * lower - centers, 2.0 * upper - centers]
    density = np.zeros(n_grid)
    norm = 1.0 / (h * math.sqrt(2.0 * math.pi))
    for src in sources:
        u = (grid[:, None] - src[None, :]) / h
        density += norm * (np.exp(-0.5 * u * u) @ weights)
    return grid, density


def summarize(
    spec: CriterionSpec,
    omega: float,
    model: PerturbationModel,
    values: np.ndarray,
    seed: int,
    workers: int,
    kde_points: int = 201,
) -> DistributionSummary:
    n = values.size
    mean = float(np.mean(values))
    std = float(np.std(values, ddof=1)) if n > 1 else 0.0
    pdf: list[tuple[float, float]] = []
    if kde_points:
        lo, hi = spec.bounds
        grid, density = kde_grid(values, lo, hi, n_grid=kde_points)
        pdf = [(float(z), float(d)) for z, d in zip(grid, density)]
    return DistributionSummary(
        criterion=spec.kind.value,
        params=spec.params(),
        omega=float(omega),
        sigma0=model.sigma0,
        lam=model.lam,
        n_samples=n,
        mean=mean,
        std=std,
        std_error=std / math.sqrt(n),
        seed=seed,
        workers=workers,
        pdf_grid=pdf,
    )


def sample_criterion(
    spec: CriterionSpec,
    omega: float,
    model: PerturbationModel,
    n: int,
    seed: int,
    workers: int = 1,
    kde_points: int = 201,
) -> DistributionSummary:
    """Monte-Carlo moments and KDE pdf of a criterion at box width ``omega``.

    Results are bit-reproducible for a fixed ``(seed, workers)`` pair.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if not omega > 0:
        raise ValueError("omega must be > 0")
    values = draw_criterion_values(spec, omega, model, n, seed, workers)
    return summarize(spec, omega, model, values, seed, workers, kde_points)


def omega_seed(seed: int, index: int) -> int:
    """Independent per-omega seed derived from the run seed."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1, dtype=np.uint32)[0])


def expectation_curve(
    spec: CriterionSpec,
    model: PerturbationModel,
    omegas: Sequence[float] = DEFAULT_OMEGAS,
    n: int = 100_000,
    seed: int = 0,
    workers: int = 1,
    kde_points: Optional[int] = 201,
) -> list[DistributionSummary]:
    """One summary per box width, each with its own derived seed."""
    return [
        sample_criterion(spec, w, model, n, omega_seed(seed, i), workers, kde_points or 0)
        for i, w in enumerate(omegas)
    ]


def parse_omegas(text: Union[str, Sequence[float]]) -> list[float]:
    if not isinstance(text, str):
        return [float(w) for w in text]
    return [float(tok) for tok in text.replace(" ", "").split(",") if tok]
