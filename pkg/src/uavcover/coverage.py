"""Coverage probabilities, service-region areas, and spectral efficiency.

Everything here is conditional-analytic: the per-region coverage terms
combine the interference Laplace transform with the nearest-BS distance
law, then outer integrals average over the nearest-BS distance, the
LoS/NLoS state, and finally the user position inside the disc.

The closed forms for single-region coverage are written with one set of
fading constants; they are evaluated per link state (LoS constants or
the Rayleigh/NLoS specialization) and the two states are mixed with the
elevation-dependent LoS probability.  The region thresholds used as
integration limits follow the same state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from scipy.integrate import quad
from scipy.optimize import brentq

from .channel import (LinkState, Region, BS_COUNT, los_probability,
                      los_state, nlos_state, region_thresholds)
from .geometry import (HoleGeometry, nearest_bs_cdf, nearest_bs_pdf,
                       truncation_radius)
from .interference import (LaplaceContext, laplace_h1_plus_i2_deriv,
                           laplace_i2, laplace_i2_derivs, make_context)
from .params import SystemParams

# Relative gap below which the two fading poles are treated as coincident.
_POLE_MERGE_RTOL = 1e-9
# Absolute tolerance of the probability-scale adaptive integrals.
_QUAD_TOL = 1e-5


class IntegrationError(RuntimeError):
    """Adaptive quadrature could not reach the requested tolerance."""


@dataclass(frozen=True)
class CoverageBreakdown:
    """Joint probabilities of (region i reached, SIR above threshold)."""

    pc1: float  # ground-served and covered
    pc2: float  # cooperatively served and covered
    pc3: float  # UAV-served and covered
    total: float

    @classmethod
    def build(cls, pc1: float, pc2: float, pc3: float) -> "CoverageBreakdown":
        return cls(pc1, pc2, pc3, pc1 + pc2 + pc3)


@dataclass(frozen=True)
class AreaFractions:
    """Expected service-region areas and their disc-normalized fractions."""

    c1: float
    c2: float
    c3: float
    f1: float
    f2: float
    f3: float


@dataclass(frozen=True)
class PartialFractionCoeffs:
    """Two-pole partial-fraction table for the combined fading gain.

    Decomposes beta0^a0 * beta1 / ((s+beta0)^a0 * (s+beta1)) into
    sum_k coeffs0[k-1]/(s+beta0)^k plus coeffs1[0]/(s+beta1); requires
    distinct poles.
    """

    alpha0: int
    beta0: float
    alpha1: int
    beta1: float
    coeffs0: tuple[float, ...]
    coeffs1: tuple[float, ...]
    u0: float
    u1: float

    def reconstruct(self, s: float) -> float:
        return (sum(a / (s + self.beta0) ** k
                    for k, a in enumerate(self.coeffs0, start=1))
                + sum(a / (s + self.beta1) ** k
                      for k, a in enumerate(self.coeffs1, start=1)))

    def target(self, s: float) -> float:
        return (self.beta0 ** self.alpha0 * self.beta1 ** self.alpha1
                / ((s + self.beta0) ** self.alpha0
                   * (s + self.beta1) ** self.alpha1))


def partial_fraction_coeffs(m0: int, beta0: float, beta1: float,
                            sir_threshold: float) -> PartialFractionCoeffs:
    """Coefficient table for a Gamma(m0, beta0) + Gamma(1, beta1) sum."""
    if m0 < 1:
        raise ValueError("Gamma order must be >= 1")
    if abs(beta0 - beta1) <= _POLE_MERGE_RTOL * max(abs(beta0), abs(beta1)):
        raise ValueError("poles coincide; use the single-pole fallback")
    alphas = (m0, 1)
    betas = (beta0, beta1)
    scale = beta0 ** m0 * beta1
    tables: list[list[float]] = [[], []]
    for j in (0, 1):
        a_j, a_o = alphas[j], alphas[1 - j]
        gap = betas[1 - j] - betas[j]
        for k in range(1, a_j + 1):
            tables[j].append((-1.0) ** (a_j - k) * scale
                             * math.factorial(a_o + a_j - k - 1)
                             / (math.factorial(a_j - k)
                                * math.factorial(a_o - 1))
                             * gap ** (k - a_o - a_j))
    return PartialFractionCoeffs(
        alpha0=m0, beta0=beta0, alpha1=1, beta1=beta1,
        coeffs0=tuple(tables[0]), coeffs1=tuple(tables[1]),
        u0=beta0 * sir_threshold, u1=beta1 * sir_threshold)


def _context(params: SystemParams, r0: float, r1: float,
             ctx: LaplaceContext | None) -> LaplaceContext:
    return ctx if ctx is not None else make_context(params, r0, r1)


def _uav_pow(params: SystemParams, state: LinkState, r0: float) -> float:
    # (H^2 + r0^2)^(alpha_s / 2): the mean-gain denominator of the UAV link
    return math.hypot(params.uav_height, r0) ** state.alpha


def p1(params: SystemParams, state: LinkState, r0: float, r1: float,
       ctx: LaplaceContext | None = None) -> float:
    """Coverage of a ground-served user: nearest-BS signal against the
    UAV (always transmitting) plus the far interference field."""
    ctx = _context(params, r0, r1, ctx)
    s = ctx.r1_pow * params.sir_threshold
    uav_term = (1.0 + s / (_uav_pow(params, state, r0) * state.m)) ** (-state.m)
    return laplace_i2(ctx, s) * uav_term


def p1_no_uav(params: SystemParams, r0: float, r1: float,
              ctx: LaplaceContext | None = None) -> float:
    """Coverage of a nearest-BS user when no UAV is deployed at all."""
    ctx = _context(params, r0, r1, ctx)
    return laplace_i2(ctx, ctx.r1_pow * params.sir_threshold)


def _erlang_tail_sum(ctx: LaplaceContext, orders: int, u: float) -> float:
    # sum_{l<orders} ((-u)^l / l!) L^(l)(u); terms are all positive
    derivs = laplace_i2_derivs(ctx, orders - 1, u)
    total = 0.0
    term = 1.0
    for l in range(orders):
        total += term * derivs[l]
        term *= -u / (l + 1)
    return total


def p2(params: SystemParams, state: LinkState, r0: float, r1: float,
       ctx: LaplaceContext | None = None) -> float:
    """Coverage of a cooperatively served user: combined UAV plus
    nearest-BS gain against the far interference field."""
    ctx = _context(params, r0, r1, ctx)
    eps = params.sir_threshold
    beta0 = state.m * _uav_pow(params, state, r0)
    beta1 = ctx.r1_pow
    if abs(beta0 - beta1) <= _POLE_MERGE_RTOL * max(beta0, beta1):
        # coincident poles: the gain sum is a single Gamma(m+1, beta)
        beta = 0.5 * (beta0 + beta1)
        return _erlang_tail_sum(ctx, state.m + 1, beta * eps)
    pf = partial_fraction_coeffs(state.m, beta0, beta1, eps)
    total = 0.0
    for k, a in enumerate(pf.coeffs0, start=1):
        total += a / beta0 ** k * _erlang_tail_sum(ctx, k, pf.u0)
    total += pf.coeffs1[0] / beta1 * _erlang_tail_sum(ctx, 1, pf.u1)
    return total


def p3(params: SystemParams, state: LinkState, r0: float, r1: float,
       ctx: LaplaceContext | None = None) -> float:
    """Coverage of a UAV-served user: UAV signal against every ground BS
    including the nearest one."""
    ctx = _context(params, r0, r1, ctx)
    u = state.m * _uav_pow(params, state, r0) * params.sir_threshold
    total = 0.0
    term = 1.0
    for l in range(state.m):
        total += term * laplace_h1_plus_i2_deriv(ctx, l, u)
        term *= -u / (l + 1)
    return total


def _integrate(f, lo: float, hi: float, breaks=(), tol: float = _QUAD_TOL,
               label: str = "integral") -> float:
    """Panelized adaptive quadrature; raises when the error bound fails.

    Interior breakpoints become panel boundaries so that piecewise
    integrands (distance-law branch switches, region limits) never face
    the adaptive rule with a hidden kink.
    """
    if not hi > lo:
        return 0.0
    edges = sorted({lo, hi, *(b for b in breaks if lo < b < hi)})
    total = 0.0
    err = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, abserr, *_rest = quad(f, a, b, epsabs=tol / 8.0, epsrel=1e-8,
                                   limit=200, full_output=1)
        total += val
        err += abserr
    if err > tol:
        raise IntegrationError(f"{label}: estimated error {err:.2e} "
                               f"exceeds tolerance {tol:.2e}")
    return total


def _state_mix(params: SystemParams, r0: float):
    pl = los_probability(params, r0)
    return ((los_state(params), pl), (nlos_state(params), 1.0 - pl))


@lru_cache(maxsize=4096)
def _conditional_coverage_cached(params: SystemParams,
                                 r0: float) -> CoverageBreakdown:
    geom = HoleGeometry.from_params(params, r0)
    lo = max(params.radius_rc - r0, 0.0)
    r_hi = truncation_radius(geom)
    case_break = (params.radius_rc + r0,)
    pcs = [0.0, 0.0, 0.0]
    for state, weight in _state_mix(params, r0):
        a_thr, b_thr = region_thresholds(params, state, r0)

        def f_ground(r1, _s=state):
            ctx = make_context(params, r0, r1)
            return p1(params, _s, r0, r1, ctx) * nearest_bs_pdf(geom, r1)

        def f_coop(r1, _s=state):
            ctx = make_context(params, r0, r1)
            return p2(params, _s, r0, r1, ctx) * nearest_bs_pdf(geom, r1)

        def f_uav(r1, _s=state):
            ctx = make_context(params, r0, r1)
            return p3(params, _s, r0, r1, ctx) * nearest_bs_pdf(geom, r1)

        pcs[0] += weight * _integrate(f_ground, lo, min(a_thr, r_hi),
                                      case_break, label="pc1")
        pcs[1] += weight * _integrate(f_coop, max(a_thr, lo),
                                      min(b_thr, r_hi), case_break,
                                      label="pc2")
        pcs[2] += weight * _integrate(f_uav, max(b_thr, lo), r_hi,
                                      case_break, label="pc3")
    return CoverageBreakdown.build(*pcs)


def conditional_coverage(params: SystemParams, r0: float) -> CoverageBreakdown:
    """Per-region coverage terms for a user at radius r0 (Theorem-level
    quantity before averaging over the user position)."""
    if not 0.0 <= r0 <= params.radius_rc:
        raise ValueError(f"r0 must lie in [0, {params.radius_rc}]")
    return _conditional_coverage_cached(params, float(r0))


def region_probabilities(params: SystemParams,
                         r0: float) -> tuple[float, float, float]:
    """P(user lands in each service region | r0), via the distance CDF."""
    geom = HoleGeometry.from_params(params, r0)
    probs = [0.0, 0.0, 0.0]
    for state, weight in _state_mix(params, r0):
        a_thr, b_thr = region_thresholds(params, state, r0)
        fa = nearest_bs_cdf(geom, a_thr) if a_thr > 0 else 0.0
        fb = 1.0 if math.isinf(b_thr) else nearest_bs_cdf(geom, b_thr)
        probs[0] += weight * fa
        probs[1] += weight * (fb - fa)
        probs[2] += weight * (1.0 - fb)
    return tuple(probs)


def _onset_radius(params: SystemParams, state: LinkState,
                  which: str) -> float | None:
    """User radius where a region threshold first exceeds the minimum
    feasible nearest-BS distance (an integrand kink in r0 sweeps)."""
    rc = params.radius_rc

    def gap(r0: float) -> float:
        a_thr, b_thr = region_thresholds(params, state, r0)
        thr = a_thr if which == "a" else b_thr
        return thr - (rc - r0)

    if math.isinf(gap(0.0)):
        return None
    if gap(0.0) >= 0.0 or gap(rc) <= 0.0:
        return None
    return brentq(gap, 0.0, rc, xtol=1e-9 * rc)


def _r0_breakpoints(params: SystemParams) -> tuple[float, ...]:
    pts = []
    for state in (los_state(params), nlos_state(params)):
        for which in ("a", "b"):
            root = _onset_radius(params, state, which)
            if root is not None:
                pts.append(root)
    return tuple(sorted(pts))


def area_fractions(params: SystemParams) -> AreaFractions:
    """Expected area fractions of the three service regions."""
    rc = params.radius_rc
    breaks = _r0_breakpoints(params)

    def radial_avg(per_state_term) -> float:
        def integrand(r0: float) -> float:
            geom = HoleGeometry.from_params(params, r0)
            acc = 0.0
            for state, weight in _state_mix(params, r0):
                a_thr, b_thr = region_thresholds(params, state, r0)
                fa = nearest_bs_cdf(geom, a_thr) if a_thr > 0 else 0.0
                fb = 1.0 if math.isinf(b_thr) else nearest_bs_cdf(geom, b_thr)
                acc += weight * per_state_term(fa, fb)
            return acc * 2.0 * r0 / (rc * rc)

        return _integrate(integrand, 0.0, rc, breaks, tol=1e-7,
                          label="area fraction")

    f1 = radial_avg(lambda fa, fb: fa)
    f2 = radial_avg(lambda fa, fb: fb - fa)
    f3 = radial_avg(lambda fa, fb: 1.0 - fb)
    disc = math.pi * rc * rc
    return AreaFractions(c1=f1 * disc, c2=f2 * disc, c3=f3 * disc,
                         f1=f1, f2=f2, f3=f3)


def benchmark_uav_only_coverage(params: SystemParams, r0: float) -> float:
    """Coverage when the user is always UAV-served regardless of the
    nearest-BS distance (single-server baseline)."""
    geom = HoleGeometry.from_params(params, r0)
    lo = max(params.radius_rc - r0, 0.0)
    r_hi = truncation_radius(geom)
    case_break = (params.radius_rc + r0,)
    total = 0.0
    for state, weight in _state_mix(params, r0):

        def f_uav(r1, _s=state):
            ctx = make_context(params, r0, r1)
            return p3(params, _s, r0, r1, ctx) * nearest_bs_pdf(geom, r1)

        total += weight * _integrate(f_uav, lo, r_hi, case_break,
                                     label="uav-only coverage")
    return total


def benchmark_ground_only_coverage(params: SystemParams, r0: float) -> float:
    """Coverage when no UAV is deployed and the nearest BS serves alone."""
    geom = HoleGeometry.from_params(params, r0)
    lo = max(params.radius_rc - r0, 0.0)
    r_hi = truncation_radius(geom)

    def f_ground(r1):
        ctx = make_context(params, r0, r1)
        return p1_no_uav(params, r0, r1, ctx) * nearest_bs_pdf(geom, r1)

    return _integrate(f_ground, lo, r_hi, (params.radius_rc + r0,),
                      label="ground-only coverage")


def _radial_density(params: SystemParams, r0: float) -> float:
    # uniform position on the disc yields the radial density 2 r0 / Rc^2
    return 2.0 * r0 / (params.radius_rc * params.radius_rc)


def coverage_components(params: SystemParams) -> tuple[float, float, float]:
    """Disc-averaged per-region coverage terms (the weights of the
    spectral-efficiency sum)."""
    breaks = _r0_breakpoints(params)

    def component(idx: int) -> float:
        def integrand(r0: float) -> float:
            pcs = _conditional_coverage_cached(params, r0)
            value = (pcs.pc1, pcs.pc2, pcs.pc3)[idx]
            return value * _radial_density(params, r0)

        return _integrate(integrand, 0.0, params.radius_rc, breaks,
                          label=f"coverage component {idx + 1}")

    return component(0), component(1), component(2)


def nse(params: SystemParams) -> float:
    """Normalized spectral efficiency of the cooperative scheme: per-region
    throughput discounted by the number of BSs each region occupies."""
    pc1, pc2, pc3 = coverage_components(params)
    rate = math.log1p(params.sir_threshold)
    return (pc1 * rate / BS_COUNT[Region.GROUND_ONLY]
            + pc2 * rate / BS_COUNT[Region.COOPERATIVE]
            + pc3 * rate / BS_COUNT[Region.UAV_ONLY])


def nse_uav_only(params: SystemParams) -> float:
    """Spectral efficiency of the always-UAV baseline (one BS per user)."""
    avg = _integrate(lambda r0: (benchmark_uav_only_coverage(params, r0)
                                 * _radial_density(params, r0)),
                     0.0, params.radius_rc, label="uav-only nse")
    return avg * math.log1p(params.sir_threshold)


def nse_ground_only(params: SystemParams) -> float:
    """Spectral efficiency of the no-UAV baseline (one BS per user)."""
    avg = _integrate(lambda r0: (benchmark_ground_only_coverage(params, r0)
                                 * _radial_density(params, r0)),
                     0.0, params.radius_rc, label="ground-only nse")
    return avg * math.log1p(params.sir_threshold)
