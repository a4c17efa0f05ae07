"""Coverage analytics and Monte Carlo cross-validation for a UAV-assisted
cellular network whose base stations are disabled inside a circular area."""

from .channel import LinkState, Region, assign_region, los_probability
from .coverage import (AreaFractions, CoverageBreakdown, IntegrationError,
                       area_fractions, benchmark_ground_only_coverage,
                       benchmark_uav_only_coverage, conditional_coverage,
                       nse, nse_ground_only, nse_uav_only)
from .geometry import HoleGeometry, nearest_bs_cdf, nearest_bs_pdf
from .interference import LaplaceContext, laplace_i2, make_context
from .montecarlo import (DropOutcome, PppRealization, estimate_area_fractions,
                         estimate_coverage, estimate_nse, sample_ppp,
                         simulate_drop)
from .params import ConfigError, SystemParams, load_config, save_config, validate

__version__ = "0.1.0"

__all__ = [
    "AreaFractions", "ConfigError", "CoverageBreakdown", "DropOutcome",
    "HoleGeometry", "IntegrationError", "LaplaceContext", "LinkState",
    "PppRealization", "Region", "SystemParams", "area_fractions",
    "assign_region", "benchmark_ground_only_coverage",
    "benchmark_uav_only_coverage", "conditional_coverage",
    "estimate_area_fractions", "estimate_coverage", "estimate_nse",
    "laplace_i2", "load_config", "los_probability", "make_context",
    "nearest_bs_cdf", "nearest_bs_pdf", "nse", "nse_ground_only",
    "nse_uav_only", "sample_ppp", "save_config", "simulate_drop", "validate",
]
