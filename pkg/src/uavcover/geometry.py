"""Nearest-BS distance law over a PPP with a disc removed around the origin.

All base stations inside the central disc of radius ``radius_rc`` are
disabled, so the distance from a user at radius ``r0`` to its nearest
working BS follows an inhomogeneous exclusion geometry: the disc of
radius r around the user is partially swallowed by the hole.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .params import SystemParams


def _clamped_acos(x: float) -> float:
    # law-of-cosines arguments can spill past +-1 by rounding at tangency
    return math.acos(min(1.0, max(-1.0, x)))


@dataclass(frozen=True)
class HoleGeometry:
    """User radius, hole radius and BS density for one evaluation point."""

    r0: float
    radius_rc: float
    bs_density: float

    def __post_init__(self):
        if not self.radius_rc > 0:
            raise ValueError("radius_rc must be positive")
        if not 0.0 <= self.r0 <= self.radius_rc:
            raise ValueError(f"r0 must lie in [0, {self.radius_rc}], "
                             f"got {self.r0}")
        if not self.bs_density > 0:
            raise ValueError("bs_density must be positive")

    @classmethod
    def from_params(cls, params: SystemParams, r0: float) -> "HoleGeometry":
        return cls(r0=r0, radius_rc=params.radius_rc,
                   bs_density=params.bs_density)


def lens_exclusion_area(g: HoleGeometry, r: float) -> float:
    """Area of the disc of radius r around the user minus its overlap
    with the hole, i.e. the region where working BSs can appear."""
    if not r > 0:
        raise ValueError(f"r must be positive, got {r}")
    r0, rc = g.r0, g.radius_rc
    if r >= rc + r0:
        return math.pi * (r * r - rc * rc)
    if r <= rc - r0 or r0 == 0.0:
        return 0.0
    th1 = _clamped_acos((rc * rc + r0 * r0 - r * r) / (2.0 * rc * r0))
    th2 = _clamped_acos((r0 * r0 + r * r - rc * rc) / (2.0 * r0 * r))
    s0 = rc * rc * (th1 - math.sin(th1) * math.cos(th1))
    s1 = r * r * (th2 - math.sin(th2) * math.cos(th2))
    return math.pi * r * r - s0 - s1


def lens_exclusion_area_deriv(g: HoleGeometry, r: float) -> float:
    """d/dr of lens_exclusion_area.

    In the partial-overlap band the differentiated circular-segment form
    collapses exactly to 2*r*(pi - th2): the th1 terms cancel against the
    th2 product terms by the law of sines, leaving the arc length of the
    circle of radius r that lies outside the hole.
    """
    if not r > 0:
        raise ValueError(f"r must be positive, got {r}")
    r0, rc = g.r0, g.radius_rc
    if r >= rc + r0:
        return 2.0 * math.pi * r
    if r <= rc - r0 or r0 == 0.0:
        return 0.0
    th2 = _clamped_acos((r0 * r0 + r * r - rc * rc) / (2.0 * r0 * r))
    return 2.0 * r * (math.pi - th2)


def nearest_bs_cdf(g: HoleGeometry, r: float) -> float:
    """P(nearest working BS closer than r | user radius r0)."""
    if r < 0:
        raise ValueError(f"r must be non-negative, got {r}")
    if r == 0.0 or r <= g.radius_rc - g.r0:
        return 0.0
    return -math.expm1(-g.bs_density * lens_exclusion_area(g, r))


def nearest_bs_pdf(g: HoleGeometry, r: float) -> float:
    """Density of the nearest working-BS distance given the user radius."""
    if r < 0:
        raise ValueError(f"r must be non-negative, got {r}")
    if r == 0.0 or r <= g.radius_rc - g.r0:
        return 0.0
    lam = g.bs_density
    return (lam * lens_exclusion_area_deriv(g, r)
            * math.exp(-lam * lens_exclusion_area(g, r)))


def truncation_radius(g: HoleGeometry, tail: float = 1e-8) -> float:
    """Smallest radius whose CDF reaches 1 - tail.

    Used to truncate the semi-infinite nearest-BS integrals.  The target
    area is solved in closed form on the outer annulus branch; when the
    answer falls inside the partial-overlap band, a bracketed root search
    on the (continuous, strictly increasing) area finishes the job.
    """
    if not 0.0 < tail < 1.0:
        raise ValueError("tail must lie in (0, 1)")
    r0, rc, lam = g.r0, g.radius_rc, g.bs_density
    target = -math.log(tail) / lam
    r_annulus = math.sqrt(rc * rc + target / math.pi)
    if r_annulus >= rc + r0:
        return r_annulus
    lo = max(rc - r0, 0.0)
    return brentq(lambda r: lens_exclusion_area(g, r) - target,
                  lo + 1e-12 * rc, rc + r0, xtol=1e-9, rtol=1e-12)
