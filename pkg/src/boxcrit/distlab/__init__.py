"""Distribution laboratory: Monte-Carlo sampling, closed-form densities,
quadrature moments, order-preservation rates and Kendall tau."""

from boxcrit.distlab.order import OrderReport, order_violation_rate, sample_triples
from boxcrit.distlab.rank import kendall_tau
from boxcrit.distlab.sampling import (
    DEFAULT_OMEGAS,
    DEFAULT_SIGMA,
    SIOU_PRESETS,
    DistributionSummary,
    PerturbationModel,
    SizeMode,
    draw_criterion_values,
    expectation_curve,
    kde_grid,
    parse_omegas,
    sample_criterion,
    silverman_bandwidth,
)
from boxcrit.distlab.theory import (
    Moments,
    QuadratureError,
    theoretical_moments,
    theoretical_pdf,
    zero_atom_mass,
)

__all__ = [
    "DEFAULT_OMEGAS",
    "DEFAULT_SIGMA",
    "SIOU_PRESETS",
    "DistributionSummary",
    "Moments",
    "OrderReport",
    "PerturbationModel",
    "QuadratureError",
    "SizeMode",
    "draw_criterion_values",
    "expectation_curve",
    "kde_grid",
    "kendall_tau",
    "order_violation_rate",
    "parse_omegas",
    "sample_criterion",
    "sample_triples",
    "silverman_bandwidth",
    "theoretical_moments",
    "theoretical_pdf",
    "zero_atom_mass",
]
