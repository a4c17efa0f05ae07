"""Laplace transform of the aggregate interference beyond the nearest BS.

The interferers form a PPP restricted to lie outside the central hole and
farther from the user than the nearest BS.  Conditioned on the user
radius r0 and the nearest-BS distance r1, the log-Laplace exponent
eta(s) splits into two geometric cases: when the exclusion circle of
radius r1 around the user pokes out of the hole (partial overlap) the
angular integral is handled by Chebyshev-Gauss quadrature; once r1
clears the hole entirely the exponent is a single closed-form term.
"""

from __future__ import annotations

import math

import numpy as np

from .numerics import cheb_nodes, falling_factorial_coeffs, upper_incomplete_beta
from .params import SystemParams

CASE_OVERLAP = "overlap"
CASE_OUTSIDE = "outside"


class LaplaceContext:
    """Frozen (r0, r1) evaluation point with precomputed quadrature data.

    Instances memoize derivative stacks keyed by the Laplace argument;
    a context belongs to a single worker and must not be shared across
    processes mid-use.
    """

    __slots__ = ("params", "r0", "r1", "case", "big_theta", "r1_pow",
                 "node_weights", "z_pow", "_deriv_cache")

    def __init__(self, params: SystemParams, r0: float, r1: float):
        rc = params.radius_rc
        if not 0.0 <= r0 <= rc:
            raise ValueError(f"r0 must lie in [0, {rc}], got {r0}")
        if r1 <= rc - r0:
            raise ValueError(f"no BS can be closer than {rc - r0}, "
                             f"got r1 = {r1}")
        self.params = params
        self.r0 = r0
        self.r1 = r1
        self.r1_pow = r1 ** params.alpha_nlos
        self._deriv_cache: dict[float, list[float]] = {}
        if r1 >= rc + r0:
            self.case = CASE_OUTSIDE
            self.big_theta = None
            self.node_weights = None
            self.z_pow = None
            return
        self.case = CASE_OVERLAP
        arg = (r0 * r0 + r1 * r1 - rc * rc) / (2.0 * r0 * r1)
        self.big_theta = math.acos(min(1.0, max(-1.0, arg)))
        nodes = cheb_nodes(params.quad_n).nodes
        self.node_weights = np.sqrt(1.0 - nodes * nodes)
        c = 0.5 * self.big_theta * (nodes - 1.0) + math.pi
        z = (np.sqrt(np.maximum(rc * rc - (r0 * np.sin(c)) ** 2, 0.0))
             - r0 * np.cos(c))
        self.z_pow = z ** params.alpha_nlos


def make_context(params: SystemParams, r0: float, r1: float) -> LaplaceContext:
    return LaplaceContext(params, r0, r1)


def eta(ctx: LaplaceContext, s: float) -> float:
    """Log of the conditional Laplace transform of the interference."""
    if s < 0:
        raise ValueError(f"s must be non-negative, got {s}")
    if s == 0.0:
        return 0.0
    p = ctx.params
    a = 2.0 / p.alpha_nlos
    b = 1.0 - a
    s_pow = s ** a
    lam = p.bs_density
    tail = upper_incomplete_beta(ctx.r1_pow / (ctx.r1_pow + s), a, b)
    if ctx.case == CASE_OUTSIDE:
        return -2.0 * lam * math.pi * s_pow * tail / p.alpha_nlos
    theta = ctx.big_theta
    node_tails = upper_incomplete_beta(ctx.z_pow / (ctx.z_pow + s), a, b)
    node_sum = float(np.dot(ctx.node_weights, node_tails))
    return (-lam * s_pow / p.alpha_nlos
            * (2.0 * (math.pi - theta) * tail
               + theta * math.pi / p.quad_n * node_sum))


def eta_deriv(ctx: LaplaceContext, t: int, s: float) -> float:
    """t-th derivative of eta at s > 0; carries the sign (-1)^t."""
    if t < 1:
        raise ValueError(f"derivative order must be >= 1, got {t}")
    if not s > 0:
        raise ValueError(f"derivatives need s > 0, got {s}")
    p = ctx.params
    a = 2.0 / p.alpha_nlos
    b = t - a
    lam = p.bs_density
    prefac = math.factorial(t) * (-1.0) ** t * lam * s ** (a - t)
    tail = upper_incomplete_beta(ctx.r1_pow / (ctx.r1_pow + s), a + 1.0, b)
    if ctx.case == CASE_OUTSIDE:
        return prefac * 2.0 * math.pi * tail / p.alpha_nlos
    theta = ctx.big_theta
    node_tails = upper_incomplete_beta(ctx.z_pow / (ctx.z_pow + s),
                                       a + 1.0, b)
    node_sum = float(np.dot(ctx.node_weights, node_tails))
    return (prefac / p.alpha_nlos
            * (2.0 * (math.pi - theta) * tail
               + theta * math.pi / p.quad_n * node_sum))


def laplace_i2(ctx: LaplaceContext, s: float) -> float:
    """Conditional Laplace transform exp(eta(s)); 1 at s = 0."""
    return math.exp(eta(ctx, s))


def laplace_i2_derivs(ctx: LaplaceContext, k: int, s: float) -> list[float]:
    """Derivatives of laplace_i2 of orders 0..k at one argument.

    Uses the binomial recursion over eta derivatives; all lower orders
    come along for free and are memoized on the context because the
    coverage integrands request the full stack at the same argument.
    """
    if k < 0:
        raise ValueError(f"order must be >= 0, got {k}")
    if k >= 1 and not s > 0:
        raise ValueError(f"derivatives need s > 0, got {s}")
    cached = ctx._deriv_cache.get(s)
    if cached is not None and len(cached) > k:
        return cached[:k + 1]
    stack = [laplace_i2(ctx, s)]
    eta_d = [0.0]  # order 0 unused by the recursion
    for order in range(1, k + 1):
        eta_d.append(eta_deriv(ctx, order, s))
        coeffs = falling_factorial_coeffs(order)
        stack.append(sum(coeffs[l] * eta_d[order - l] * stack[l]
                         for l in range(order)))
    if cached is None or len(stack) > len(cached):
        ctx._deriv_cache[s] = stack
    return stack


def laplace_i2_deriv(ctx: LaplaceContext, k: int, s: float) -> float:
    """k-th derivative of the conditional Laplace transform; k = 0 is
    the transform itself.  Sign alternates as (-1)^k."""
    return laplace_i2_derivs(ctx, k, s)[k]


def laplace_h1_deriv(r1: float, t: int, u: float, alpha_nlos: float) -> float:
    """t-th derivative of the Laplace transform of the nearest-BS gain.

    The gain is exponential with rate r1^alpha_nlos, so every order has
    the closed form b * t! * (-1)^t / (u + b)^(t+1).
    """
    if t < 0:
        raise ValueError(f"order must be >= 0, got {t}")
    if u < 0:
        raise ValueError(f"u must be non-negative, got {u}")
    b = r1 ** alpha_nlos
    return b * math.factorial(t) * (-1.0) ** t / (u + b) ** (t + 1)


def laplace_h1_plus_i2_deriv(ctx: LaplaceContext, l: int, u: float) -> float:
    """l-th derivative of the Laplace transform of (nearest-BS gain +
    remaining interference), by the Leibniz product rule."""
    if l < 0:
        raise ValueError(f"order must be >= 0, got {l}")
    if not u > 0:
        raise ValueError(f"u must be positive, got {u}")
    i2 = laplace_i2_derivs(ctx, l, u)
    alpha = ctx.params.alpha_nlos
    return sum(math.comb(l, p) * i2[p]
               * laplace_h1_deriv(ctx.r1, l - p, u, alpha)
               for p in range(l + 1))
