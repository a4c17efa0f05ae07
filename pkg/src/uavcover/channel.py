"""Air-to-ground link model and the user-centric service-region rule."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

from .params import M_NLOS, SystemParams


class Region(IntEnum):
    """Which stations serve a user, by average received power."""

    GROUND_ONLY = 1   # nearest ground BS alone
    COOPERATIVE = 2   # UAV and nearest ground BS jointly
    UAV_ONLY = 3


# BSs occupied per served user in each region (cooperation uses two).
BS_COUNT = {Region.GROUND_ONLY: 1, Region.COOPERATIVE: 2, Region.UAV_ONLY: 1}


@dataclass(frozen=True)
class LinkState:
    """Propagation state of the UAV link with its matching constants."""

    tag: str      # "los" or "nlos"
    alpha: float  # path-loss exponent of this state
    m: int        # Nakagami order of this state

    def __post_init__(self):
        if self.tag not in ("los", "nlos"):
            raise ValueError(f"unknown link tag {self.tag!r}")
        if self.m < 1:
            raise ValueError("Nakagami order must be >= 1")


def los_state(params: SystemParams) -> LinkState:
    return LinkState("los", params.alpha_los, params.m_los)


def nlos_state(params: SystemParams) -> LinkState:
    return LinkState("nlos", params.alpha_nlos, M_NLOS)


def los_probability(params: SystemParams, r0: float) -> float:
    """Probability that the UAV link is line-of-sight.

    The elevation angle enters in degrees; the environment constants are
    only meaningful under that convention (in radians the probability
    would collapse to ~0 everywhere).
    """
    if r0 < 0:
        raise ValueError(f"r0 must be non-negative, got {r0}")
    phi_deg = math.degrees(math.atan2(params.uav_height, r0))
    return 1.0 / (1.0 + params.env_c
                  * math.exp(-params.env_b * (phi_deg - params.env_c)))


def uav_mean_gain(state: LinkState, r0: float, height: float) -> float:
    """Distance factor of the UAV link gain, (H^2 + r0^2)^(-alpha/2)."""
    if r0 == 0.0 and height == 0.0:
        raise ValueError("UAV and user cannot be co-located")
    return (height * height + r0 * r0) ** (-state.alpha / 2.0)


def ground_mean_gain(r: float, alpha_nlos: float) -> float:
    """Distance factor of a ground link gain, r^(-alpha_nlos)."""
    if not r > 0:
        raise ValueError(f"ground distance must be positive, got {r}")
    return r ** (-alpha_nlos)


def region_thresholds(params: SystemParams, state: LinkState,
                      r0: float) -> tuple[float, float]:
    """Nearest-BS distance thresholds (A, B) splitting the three regions.

    A user is ground-served for r1 <= A, cooperatively served for
    A < r1 <= B, and UAV-served beyond B.  delta = 0 yields (0, inf):
    everyone cooperates.
    """
    d_pow = math.hypot(params.uav_height, r0) ** state.alpha
    if params.delta == 0.0:
        return 0.0, math.inf
    inv = 1.0 / params.alpha_nlos
    return (params.delta * d_pow) ** inv, (d_pow / params.delta) ** inv


def assign_region(params: SystemParams, state: LinkState,
                  r0: float, r1: float) -> Region:
    """Classify a user by comparing average received powers.

    Boundary ties go to the stronger-cooperation side (<=), matching the
    analytical region definitions; the tie sets have measure zero.
    """
    r1_pow = r1 ** params.alpha_nlos
    d_pow = math.hypot(params.uav_height, r0) ** state.alpha
    if r1_pow <= params.delta * d_pow:
        return Region.GROUND_ONLY
    if params.delta == 0.0 or r1_pow <= d_pow / params.delta:
        return Region.COOPERATIVE
    return Region.UAV_ONLY
