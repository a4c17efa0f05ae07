"""Seeded end-to-end network simulator and empirical estimators.

Every drop owns its own counter-based RNG stream derived from
(base_seed, drop_index), so serial and parallel execution produce
bit-identical results and any drop can be replayed in isolation.  The
in-drop draw order is fixed and part of the reproducibility contract:

    [user radius when sampled]  ->  LoS/NLoS uniform  ->  Poisson count
    ->  point radii  ->  point angles  ->  UAV fading  ->  ground fadings

Estimator reductions run over arrays indexed by drop, so the worker
count never changes the summation order.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from .channel import (BS_COUNT, LinkState, Region, assign_region,
                      los_probability, los_state, nlos_state)
from .coverage import AreaFractions
from .params import SystemParams

log = logging.getLogger(__name__)

SCHEMES = ("proposed", "uav-only", "ground-only")

# Truncation exponent for r1-only sampling: the chance that the nearest
# BS lies farther than the reduced window is below exp(-28) ~ 7e-13.
_NEAREST_WINDOW_LOG = 28.0


@dataclass(frozen=True)
class PppRealization:
    """One seeded draw of ground-BS positions in the working annulus."""

    points: np.ndarray  # shape (n, 2): radius from origin, angle
    seed: int
    count: int


@dataclass(frozen=True)
class DropOutcome:
    """Tagged-user outcome of a single network drop."""

    region: Region
    link_state: LinkState
    sir: float
    covered: bool
    r1: float


def _drop_rng(base_seed: int, drop_index: int,
              retry: int = 0) -> np.random.Generator:
    seq = np.random.SeedSequence(base_seed, spawn_key=(drop_index, retry))
    return np.random.Generator(np.random.Philox(seq))


def _annulus_points(rng: np.random.Generator, density: float, r_in: float,
                    r_out: float) -> tuple[np.ndarray, np.ndarray]:
    # area-correct radial inversion keeps the placement uniform
    mean = density * math.pi * (r_out * r_out - r_in * r_in)
    n = rng.poisson(mean)
    u = rng.random(n)
    radii = np.sqrt(r_in * r_in + u * (r_out * r_out - r_in * r_in))
    angles = rng.random(n) * (2.0 * math.pi)
    return radii, angles


def sample_ppp(params: SystemParams, seed: int) -> PppRealization:
    """Draw the working-BS process over the full simulation window."""
    rng = _drop_rng(seed, 0)
    radii, angles = _annulus_points(rng, params.bs_density,
                                    params.radius_rc, params.sim_radius)
    return PppRealization(points=np.column_stack([radii, angles]),
                          seed=seed, count=radii.size)


def sample_fading_power(m: int, rng: np.random.Generator) -> float:
    """Unit-mean Nakagami power gain: Gamma(m, 1/m); m = 1 is Rayleigh."""
    if not (isinstance(m, (int, np.integer)) and m >= 1):
        raise ValueError(f"Nakagami order must be an integer >= 1, got {m}")
    return float(rng.gamma(m, 1.0 / m))


def _distances_to_user(radii: np.ndarray, angles: np.ndarray,
                       r0: float) -> np.ndarray:
    return np.sqrt(radii * radii + r0 * r0
                   - 2.0 * r0 * radii * np.cos(angles))


def _ratio(num: float, den: float) -> float:
    return math.inf if den == 0.0 else num / den


def _drop_core(params: SystemParams, r0: float, rng: np.random.Generator,
               scheme: str) -> tuple[float, Region, LinkState, float] | None:
    """Draws following the fixed order; None signals an empty realization."""
    u_state = rng.random()
    state = (los_state(params) if u_state < los_probability(params, r0)
             else nlos_state(params))
    radii, angles = _annulus_points(rng, params.bs_density,
                                    params.radius_rc, params.sim_radius)
    if radii.size == 0:
        return None
    dist = _distances_to_user(radii, angles, r0)
    i_near = int(np.argmin(dist))
    r1 = float(dist[i_near])
    g_uav = rng.gamma(state.m, 1.0 / state.m)
    g_ground = rng.standard_exponential(dist.size)
    gains = g_ground * dist ** (-params.alpha_nlos)
    h1 = float(gains[i_near])
    i2 = float(np.sum(gains)) - h1
    h0 = g_uav * math.hypot(params.uav_height, r0) ** (-state.alpha)
    if scheme == "uav-only":
        return _ratio(h0, h1 + i2), Region.UAV_ONLY, state, r1
    if scheme == "ground-only":
        # the UAV fading is still drawn so streams line up across schemes
        return _ratio(h1, i2), Region.GROUND_ONLY, state, r1
    region = assign_region(params, state, r0, r1)
    if region is Region.GROUND_ONLY:
        sir = _ratio(h1, h0 + i2)
    elif region is Region.COOPERATIVE:
        sir = _ratio(h0 + h1, i2)
    else:
        sir = _ratio(h0, h1 + i2)
    return sir, region, state, r1


def simulate_drop(params: SystemParams, r0: float, base_seed: int,
                  drop_index: int = 0,
                  scheme: str = "proposed") -> DropOutcome:
    """One seeded drop: link state, PPP, region assignment, SIR."""
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if not 0.0 <= r0 <= params.radius_rc:
        raise ValueError(f"r0 must lie in [0, {params.radius_rc}]")
    retry = 0
    while True:
        rng = _drop_rng(base_seed, drop_index, retry)
        out = _drop_core(params, r0, rng, scheme)
        if out is not None:
            break
        retry += 1
        log.warning("empty realization at drop %d, resampling (retry %d)",
                    drop_index, retry)
    sir, region, state, r1 = out
    return DropOutcome(region=region, link_state=state, sir=sir,
                       covered=sir > params.sir_threshold, r1=r1)


# ---------------------------------------------------------------------------
# indexed parallel evaluation


def _eval_chunk(args):
    fn, start, stop = args
    return [fn(i) for i in range(start, stop)]


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: explicit argument, else UAVCOVER_WORKERS, else CPUs."""
    if workers is None:
        env = os.environ.get("UAVCOVER_WORKERS", "").strip()
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, workers)


def _map_indexed(fn, n: int, workers: int | None) -> list:
    """Evaluate fn(0..n-1) with in-order assembly; fn must be picklable."""
    workers = resolve_workers(workers)
    if workers == 1 or n < 2 * workers:
        return [fn(i) for i in range(n)]
    chunk = max(16, -(-n // (workers * 8)))
    tasks = [(fn, s, min(s + chunk, n)) for s in range(0, n, chunk)]
    out: list = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_eval_chunk, tasks):
            out.extend(part)
    return out


# ---------------------------------------------------------------------------
# estimators


def _sir_drop(params, r0, scheme, base_seed, i):
    d = simulate_drop(params, r0, base_seed, i, scheme)
    return d.sir, int(d.region), d.link_state.tag == "los"


def simulate_sir_batch(params: SystemParams, r0: float, drops: int,
                       base_seed: int, scheme: str = "proposed",
                       workers: int | None = None):
    """SIR, region and LoS-flag arrays for seeded independent drops."""
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    rows = _map_indexed(partial(_sir_drop, params, r0, scheme, base_seed),
                        drops, workers)
    sirs = np.array([r[0] for r in rows])
    regions = np.array([r[1] for r in rows], dtype=np.uint8)
    los_flags = np.array([r[2] for r in rows], dtype=bool)
    return sirs, regions, los_flags


def coverage_halfwidth(p_hat: float, drops: int) -> float:
    """95% normal-approximation half-width of a coverage estimate."""
    return 1.96 * math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / drops)


def estimate_coverage(params: SystemParams, r0: float, drops: int,
                      base_seed: int, scheme: str = "proposed",
                      workers: int | None = None) -> tuple[float, float]:
    """Empirical coverage probability and its 95% half-width."""
    sirs, _, _ = simulate_sir_batch(params, r0, drops, base_seed, scheme,
                                    workers)
    p_hat = float(np.mean(sirs > params.sir_threshold))
    return p_hat, coverage_halfwidth(p_hat, drops)


def estimate_coverage_multi(params: SystemParams, r0: float, drops: int,
                            base_seed: int, thresholds,
                            scheme: str = "proposed",
                            workers: int | None = None):
    """Coverage estimates for several SIR thresholds from one drop set.

    Thresholding is the only place the SIR threshold enters a drop, so a
    single batch of realizations serves a whole threshold sweep.
    """
    sirs, _, _ = simulate_sir_batch(params, r0, drops, base_seed, scheme,
                                    workers)
    out = []
    for eps in thresholds:
        p_hat = float(np.mean(sirs > eps))
        out.append((p_hat, coverage_halfwidth(p_hat, drops)))
    return out


def _nearest_window(params: SystemParams) -> float:
    # reduced annulus that still contains the nearest BS with overwhelming
    # probability; bias below exp(-_NEAREST_WINDOW_LOG)
    rc = params.radius_rc
    reach = math.sqrt(rc * rc + _NEAREST_WINDOW_LOG
                      / (params.bs_density * math.pi))
    return min(params.sim_radius, rc + reach)


def _nearest_drop(params, r0, window, base_seed, i):
    retry = 0
    while True:
        rng = _drop_rng(base_seed, i, retry)
        radii, angles = _annulus_points(rng, params.bs_density,
                                        params.radius_rc, window)
        if radii.size:
            return float(np.min(_distances_to_user(radii, angles, r0)))
        retry += 1
        log.warning("empty nearest-BS window at drop %d (retry %d)", i, retry)


def nearest_distance_samples(params: SystemParams, r0: float, n: int,
                             base_seed: int,
                             workers: int | None = None) -> np.ndarray:
    """Seeded draws of the nearest working-BS distance.

    Samples a reduced window: points beyond it change the minimum only
    when the full window is empty closer in, an event of probability
    under 1e-12 at any valid density.
    """
    window = _nearest_window(params)
    return np.array(_map_indexed(
        partial(_nearest_drop, params, r0, window, base_seed), n, workers))


def _af_drop(params, window, base_seed, i):
    retry = 0
    while True:
        rng = _drop_rng(base_seed, i, retry)
        r0 = params.radius_rc * math.sqrt(rng.random())
        u_state = rng.random()
        state = (los_state(params) if u_state < los_probability(params, r0)
                 else nlos_state(params))
        radii, angles = _annulus_points(rng, params.bs_density,
                                        params.radius_rc, window)
        if radii.size:
            break
        retry += 1
        log.warning("empty classification window at drop %d (retry %d)",
                    i, retry)
    r1 = float(np.min(_distances_to_user(radii, angles, r0)))
    return int(assign_region(params, state, r0, r1))


def estimate_area_fractions(params: SystemParams, drops: int, base_seed: int,
                            workers: int | None = None) -> AreaFractions:
    """Empirical service-region fractions; they sum to one exactly.

    The user radius is sampled with the uniform-disc radial density and
    only the nearest-BS distance matters, so the reduced window of
    nearest_distance_samples applies here too.
    """
    window = _nearest_window(params)
    regions = np.array(_map_indexed(
        partial(_af_drop, params, window, base_seed), drops, workers))
    f1 = float(np.count_nonzero(regions == 1)) / drops
    f2 = float(np.count_nonzero(regions == 2)) / drops
    f3 = 1.0 - f1 - f2
    disc = math.pi * params.radius_rc ** 2
    return AreaFractions(c1=f1 * disc, c2=f2 * disc, c3=f3 * disc,
                         f1=f1, f2=f2, f3=f3)


def _nse_drop(params, scheme, base_seed, i):
    retry = 0
    while True:
        rng = _drop_rng(base_seed, i, retry)
        r0 = params.radius_rc * math.sqrt(rng.random())
        out = _drop_core(params, r0, rng, scheme)
        if out is not None:
            break
        retry += 1
        log.warning("empty realization at drop %d, resampling (retry %d)",
                    i, retry)
    sir, region, _, _ = out
    if sir > params.sir_threshold:
        return math.log1p(params.sir_threshold) / BS_COUNT[region]
    return 0.0


def estimate_nse(params: SystemParams, drops: int, base_seed: int,
                 scheme: str = "proposed",
                 workers: int | None = None) -> float:
    """Empirical normalized spectral efficiency over uniform disc users."""
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    values = np.array(_map_indexed(
        partial(_nse_drop, params, scheme, base_seed), drops, workers))
    return float(np.mean(values))


# ---------------------------------------------------------------------------
# conditional samplers used for cross-validating the analytical pieces


def sample_interference_beyond(params: SystemParams, r0: float, r1: float,
                               rng: np.random.Generator) -> float:
    """One draw of the interference from working BSs farther than r1.

    Conditioning on the nearest-BS distance restricts the process to the
    region beyond r1, which for a PPP is plain thinning of a fresh
    realization over the full window.
    """
    radii, angles = _annulus_points(rng, params.bs_density,
                                    params.radius_rc, params.sim_radius)
    dist = _distances_to_user(radii, angles, r0)
    dist = dist[dist > r1]
    if dist.size == 0:
        return 0.0
    g = rng.standard_exponential(dist.size)
    return float(np.sum(g * dist ** (-params.alpha_nlos)))


def _cond_i2_drop(params, r0, r1, base_seed, i):
    return sample_interference_beyond(params, r0, r1,
                                      _drop_rng(base_seed, i))


def conditional_interference_samples(params: SystemParams, r0: float,
                                     r1: float, n: int, base_seed: int,
                                     workers: int | None = None) -> np.ndarray:
    return np.array(_map_indexed(
        partial(_cond_i2_drop, params, r0, r1, base_seed), n, workers))


def conditional_laplace_estimate(params: SystemParams, r0: float, r1: float,
                                 s: float, n: int, base_seed: int,
                                 workers: int | None = None) -> float:
    """Empirical mean of exp(-s * interference) given (r0, r1)."""
    i2 = conditional_interference_samples(params, r0, r1, n, base_seed,
                                          workers)
    return float(np.mean(np.exp(-s * i2)))


_EVENTS = ("ground_served", "cooperative", "uav_served", "ground_no_uav")


def _cond_event_drop(params, state, r0, r1, event, base_seed, i):
    rng = _drop_rng(base_seed, i)
    i2 = sample_interference_beyond(params, r0, r1, rng)
    g_uav = rng.gamma(state.m, 1.0 / state.m)
    g_ground = rng.standard_exponential()
    h0 = g_uav * math.hypot(params.uav_height, r0) ** (-state.alpha)
    h1 = g_ground * r1 ** (-params.alpha_nlos)
    eps = params.sir_threshold
    if event == "ground_served":
        return 1.0 if h1 > eps * (h0 + i2) else 0.0
    if event == "cooperative":
        return 1.0 if h0 + h1 > eps * i2 else 0.0
    if event == "uav_served":
        return 1.0 if h0 > eps * (h1 + i2) else 0.0
    return 1.0 if h1 > eps * i2 else 0.0  # ground_no_uav


def conditional_coverage_estimate(params: SystemParams, state: LinkState,
                                  r0: float, r1: float, event: str, n: int,
                                  base_seed: int,
                                  workers: int | None = None) -> float:
    """Empirical conditional coverage with (r0, r1) pinned and everything
    else redrawn per trial; `event` picks which SIR definition applies."""
    if event not in _EVENTS:
        raise ValueError(f"unknown event {event!r}")
    vals = _map_indexed(
        partial(_cond_event_drop, params, state, r0, r1, event, base_seed),
        n, workers)
    return float(np.mean(vals))
