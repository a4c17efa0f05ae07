"""Special functions and quadrature primitives for the analytical pipeline."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special


def upper_incomplete_beta(x, a: float, b: float):
    """Integral of t^(a-1) * (1-t)^(b-1) over [x, 1], unregularized.

    ``x`` may be a scalar or an ndarray.  Routed through the regularized
    incomplete beta (continued-fraction implementation) instead of direct
    quadrature because it sits in the innermost loop of nested integrals;
    the complement identity keeps the small upper tail well conditioned.
    Requires b > 0: for b <= 0 the integrand is non-integrable at t = 1.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError(f"x must lie in [0, 1], got {x!r}")
    if a <= 0:
        raise ValueError(f"a must be positive, got {a!r}")
    if b <= 0:
        raise ValueError(f"b must be positive (integral diverges at t=1), "
                         f"got {b!r}")
    out = math.exp(special.betaln(a, b)) * special.betainc(b, a, 1.0 - arr)
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class ChebNodes:
    """Chebyshev-Gauss nodes cos((2n-1)*pi/(2N)), n = 1..N, decreasing."""

    n: int
    nodes: np.ndarray

    def __post_init__(self):
        if self.nodes.shape != (self.n,):
            raise ValueError("node count mismatch")


@lru_cache(maxsize=64)
def cheb_nodes(n: int) -> ChebNodes:
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    k = np.arange(1, n + 1)
    nodes = np.cos((2 * k - 1) * np.pi / (2 * n))
    nodes.flags.writeable = False
    return ChebNodes(n=n, nodes=nodes)


def falling_factorial_coeffs(k: int) -> list[int]:
    """Binomial row C(k-1, l) for l = 0..k-1, exact integers."""
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    return [math.comb(k - 1, l) for l in range(k)]
