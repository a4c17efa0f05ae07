"""Model parameters shared by the analytical engine and the simulator."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

# NLoS links are always Rayleigh, i.e. Nakagami order 1.  Not configurable.
M_NLOS = 1

# Upper bound on the LoS Nakagami order: keeps the factorial-based
# partial-fraction coefficients well inside double-precision range.
M_LOS_MAX = 20


class ConfigError(ValueError):
    """Unreadable, malformed, or unknown-key configuration input."""


@dataclass(frozen=True)
class SystemParams:
    """Scalar model parameters.  Defaults reproduce the reference setup.

    Distances are in meters, the BS density in 1/m^2, and the SIR
    threshold is linear (the CLI converts from dB).  The elevation angle
    inside the LoS model is handled in degrees, which is the convention
    the environment constants ``env_b``/``env_c`` were fitted under.
    """

    env_b: float = 0.136        # LoS-curve steepness (suburban fit)
    env_c: float = 11.95        # LoS-curve offset (suburban fit)
    radius_rc: float = 500.0    # malfunction-disc radius, m
    uav_height: float = 300.0   # UAV altitude above the disc center, m
    bs_density: float = 2e-5    # ground-BS density, 1/m^2
    alpha_los: float = 2.5      # LoS path-loss exponent
    alpha_nlos: float = 3.0     # NLoS path-loss exponent
    m_los: int = 4              # Nakagami order of LoS links
    delta: float = 0.2          # cooperation parameter in [0, 1]
    sir_threshold: float = 0.5  # linear SIR threshold
    quad_n: int = 32            # Chebyshev-Gauss node count
    sim_radius: float = 40000.0  # Monte Carlo simulation window radius, m
    sim_drops: int = 20000      # Monte Carlo drop count

    def with_overrides(self, **kwargs) -> "SystemParams":
        return replace(self, **kwargs)


def validate(params: SystemParams) -> list[str]:
    """Return one message per violated invariant; empty means valid.

    Never raises: callers decide whether a violation is fatal.
    """
    bad: list[str] = []
    if not params.radius_rc > 0:
        bad.append("radius_rc: must be positive")
    if not params.uav_height >= 0:
        bad.append("uav_height: must be non-negative")
    if not params.bs_density > 0:
        bad.append("bs_density: must be positive")
    if not params.sim_radius > params.radius_rc:
        bad.append("sim_radius: must exceed radius_rc")
    if not 0.0 <= params.delta <= 1.0:
        bad.append("delta: must lie in [0, 1]")
    if not params.alpha_los > 2:
        bad.append("alpha_los: must exceed 2")
    if not params.alpha_nlos > 2:
        bad.append("alpha_nlos: must exceed 2 for the interference "
                   "integrals to converge")
    if not (isinstance(params.m_los, int) and params.m_los >= 1):
        bad.append("m_los: must be an integer >= 1")
    elif params.m_los > M_LOS_MAX:
        bad.append(f"m_los: must be <= {M_LOS_MAX}")
    if not params.sir_threshold > 0:
        bad.append("sir_threshold: must be positive")
    if not (isinstance(params.quad_n, int) and params.quad_n >= 1):
        bad.append("quad_n: must be an integer >= 1")
    if not (isinstance(params.sim_drops, int) and params.sim_drops >= 1):
        bad.append("sim_drops: must be an integer >= 1")
    return bad


def require_valid(params: SystemParams) -> SystemParams:
    """Raise ConfigError when any invariant is violated."""
    bad = validate(params)
    if bad:
        raise ConfigError("invalid parameters: " + "; ".join(bad))
    return params


_FIELD_TYPES = {f.name: f.type for f in fields(SystemParams)}
_INT_FIELDS = {"m_los", "quad_n", "sim_drops"}


def parse_config(text: str, source: str = "<config>") -> SystemParams:
    """Parse a flat ``key = value`` document into SystemParams.

    Blank lines and ``#`` comments are ignored.  Unknown keys are an
    error so typos never silently fall back to defaults; keys that are
    absent keep their default values.
    """
    values: dict[str, float | int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', "
                              f"got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            if key in _INT_FIELDS:
                values[key] = int(value)
            else:
                values[key] = float(value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for "
                              f"{key!r}: {value!r}") from exc
    params = SystemParams(**values)
    for v in (params.env_b, params.env_c, params.radius_rc,
              params.uav_height, params.bs_density, params.alpha_los,
              params.alpha_nlos, params.delta, params.sir_threshold,
              params.sim_radius):
        if not math.isfinite(v):
            raise ConfigError(f"{source}: non-finite value {v!r}")
    return params


def load_config(path) -> SystemParams:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, source=str(path))


def dump_config(params: SystemParams) -> str:
    """Serialize to the flat key-value format; round-trips exactly."""
    lines = [f"{f.name} = {getattr(params, f.name)!r}"
             for f in fields(SystemParams)]
    return "\n".join(lines) + "\n"


def save_config(params: SystemParams, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_config(params))
