"""Command-line surface: sweeps, figure data files, and the validation gate.

Output files are plain CSV with a ``#``-prefixed header recording every
resolved parameter, so each file is reproducible on its own; ``--json``
switches to a JSON document with the same content.  Exit codes: 0 ok,
1 validation-gate failure, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import click
import numpy as np
from scipy.special import kolmogi

from . import coverage as cov
from . import geometry as geo
from . import montecarlo as mc
from .interference import laplace_i2, make_context
from .params import (ConfigError, SystemParams, load_config, validate)

EXIT_OK = 0
EXIT_GATE = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3

SWEEP_VARIABLES = ("r0", "H", "R_c", "lambda", "delta", "epsilon_db")


@dataclass(frozen=True)
class SweepSpec:
    """One-dimensional parameter grid: VAR:START:STOP:STEPS[:log]."""

    variable: str
    start: float
    stop: float
    steps: int
    scale: str = "linear"

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ConfigError(f"unknown sweep variable {self.variable!r}; "
                              f"expected one of {', '.join(SWEEP_VARIABLES)}")
        if not self.start < self.stop:
            raise ConfigError("sweep start must be below stop")
        if self.steps < 2:
            raise ConfigError("sweep needs at least 2 steps")
        if self.scale not in ("linear", "log"):
            raise ConfigError(f"unknown sweep scale {self.scale!r}")
        if self.scale == "log" and self.start <= 0:
            raise ConfigError("log sweeps need start > 0")

    def grid(self) -> list[float]:
        n = self.steps
        if self.scale == "log":
            ratio = (self.stop / self.start) ** (1.0 / (n - 1))
            return [self.start * ratio ** i for i in range(n)]
        step = (self.stop - self.start) / (n - 1)
        return [self.start + step * i for i in range(n)]


def parse_sweep(text: str, allowed=SWEEP_VARIABLES) -> SweepSpec:
    parts = text.split(":")
    if len(parts) not in (4, 5):
        raise ConfigError(f"bad sweep {text!r}; expected "
                          "VAR:START:STOP:STEPS[:log]")
    var = parts[0]
    try:
        start, stop = float(parts[1]), float(parts[2])
        steps = int(parts[3])
    except ValueError as exc:
        raise ConfigError(f"bad sweep numbers in {text!r}") from exc
    scale = parts[4] if len(parts) == 5 else "linear"
    spec = SweepSpec(var, start, stop, steps, scale)
    if var not in allowed:
        raise ConfigError(f"sweep variable {var!r} not supported here; "
                          f"expected one of {', '.join(allowed)}")
    return spec


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def _apply_sweep_value(params: SystemParams, r0: float, var: str,
                       value: float) -> tuple[SystemParams, float]:
    if var == "r0":
        return params, value
    field = {"H": "uav_height", "R_c": "radius_rc", "lambda": "bs_density",
             "delta": "delta"}.get(var)
    if field is not None:
        return params.with_overrides(**{field: value}), r0
    return params.with_overrides(sir_threshold=db_to_linear(value)), r0


def _load_params(config_path) -> SystemParams:
    params = load_config(config_path) if config_path else SystemParams()
    bad = validate(params)
    if bad:
        raise ConfigError("invalid parameters: " + "; ".join(bad))
    return params


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".8g")
    return str(value)


def _header_lines(params: SystemParams, meta: dict) -> list[str]:
    lines = [f"# {f.name} = {getattr(params, f.name)!r}"
             for f in fields(SystemParams)]
    lines += [f"# {k} = {v}" for k, v in meta.items()]
    return lines


def _emit(out_path, as_json: bool, params: SystemParams, meta: dict,
          columns: list[str], rows: list[list]) -> None:
    if as_json:
        doc = {
            "params": {f.name: getattr(params, f.name)
                       for f in fields(SystemParams)},
            "meta": meta,
            "columns": columns,
            "rows": [[(None if v is None else v) for v in row]
                     for row in rows],
        }
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        lines = _header_lines(params, meta)
        lines.append(",".join(columns))
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        text = "\n".join(lines) + "\n"
    if out_path in (None, "-"):
        click.echo(text, nl=False)
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
def main():
    """Coverage analytics and Monte Carlo cross-validation for a
    UAV-assisted network with a circular BS outage area."""


# ---------------------------------------------------------------------------
# coverage sweeps


def _coverage_analytic_point(task):
    params, r0, scheme = task
    try:
        if scheme == "proposed":
            br = cov.conditional_coverage(params, r0)
            return br.pc1, br.pc2, br.pc3, br.total
        if scheme == "uav-only":
            return None, None, None, cov.benchmark_uav_only_coverage(params, r0)
        return None, None, None, cov.benchmark_ground_only_coverage(params, r0)
    except cov.IntegrationError as exc:
        return ("error", str(exc))


@main.command("coverage")
@click.option("--config", type=click.Path(), default=None,
              help="Key-value parameter file; defaults when omitted.")
@click.option("--sweep", "sweep_text", required=True,
              help="VAR:START:STOP:STEPS[:log], VAR in "
                   "r0,H,R_c,lambda,delta,epsilon_db.")
@click.option("--r0", "r0_opt", type=float, default=200.0, show_default=True,
              help="User radius in meters when r0 is not the sweep variable.")
@click.option("--scheme", type=click.Choice(mc.SCHEMES), default="proposed",
              show_default=True)
@click.option("--mode", type=click.Choice(["analytic", "simulate", "both"]),
              default="analytic", show_default=True)
@click.option("--seed", type=int, default=1, show_default=True)
@click.option("--drops", type=int, default=None,
              help="Monte Carlo drops per grid point (default sim_drops).")
@click.option("--out", "out_path", type=click.Path(), default="-",
              help="Output file; '-' writes to stdout.")
@click.option("--json", "as_json", is_flag=True, help="Emit JSON not CSV.")
def cmd_coverage(config, sweep_text, r0_opt, scheme, mode, seed, drops,
                 out_path, as_json):
    """Coverage probability along a one-variable sweep."""
    try:
        base = _load_params(config)
        sweep = parse_sweep(sweep_text)
        grid = sweep.grid()
        points = [_apply_sweep_value(base, r0_opt, sweep.variable, v)
                  for v in grid]
        for (p, r0), v in zip(points, grid):
            bad = validate(p)
            if bad:
                raise ConfigError(f"sweep value {v!r}: " + "; ".join(bad))
            if not 0.0 <= r0 <= p.radius_rc:
                raise ConfigError(f"r0 = {r0} outside [0, {p.radius_rc}]")
    except ConfigError as exc:
        _fail(EXIT_INPUT, str(exc))
    n_drops = drops if drops is not None else base.sim_drops

    analytic = [None] * len(grid)
    if mode in ("analytic", "both"):
        tasks = [(p, r0, scheme) for p, r0 in points]
        workers = mc.resolve_workers()
        if workers > 1 and len(tasks) > 1 and mode == "analytic":
            with ProcessPoolExecutor(max_workers=workers) as pool:
                analytic = list(pool.map(_coverage_analytic_point, tasks))
        else:
            analytic = [_coverage_analytic_point(t) for t in tasks]
        for v, res in zip(grid, analytic):
            if res and res[0] == "error":
                _fail(EXIT_NUMERIC,
                      f"integration failed at {sweep.variable} = {v}: "
                      f"{res[1]}")

    simulated = [None] * len(grid)
    if mode in ("simulate", "both"):
        try:
            if sweep.variable == "epsilon_db":
                # one drop set serves the whole threshold sweep
                thresholds = [db_to_linear(v) for v in grid]
                simulated = mc.estimate_coverage_multi(
                    base, r0_opt, n_drops, seed, thresholds, scheme)
            else:
                simulated = [mc.estimate_coverage(p, r0, n_drops, seed,
                                                  scheme)
                             for p, r0 in points]
        except ValueError as exc:
            _fail(EXIT_INPUT, str(exc))

    columns = [sweep.variable, "pc1", "pc2", "pc3", "total", "estimate",
               "ci_halfwidth", "scheme", "seed"]
    rows = []
    for i, v in enumerate(grid):
        a = analytic[i] or (None, None, None, None)
        s = simulated[i] or (None, None)
        rows.append([v, a[0], a[1], a[2], a[3], s[0], s[1], scheme, seed])
    meta = {"command": "coverage", "sweep": sweep_text, "r0": r0_opt,
            "scheme": scheme, "mode": mode, "seed": seed, "drops": n_drops}
    _emit(out_path, as_json, base, meta, columns, rows)


# ---------------------------------------------------------------------------
# area fractions


@main.command("area-fractions")
@click.option("--config", type=click.Path(), default=None)
@click.option("--sweep", "sweep_text", required=True,
              help="VAR:START:STOP:STEPS[:log], VAR in H,R_c,delta,lambda.")
@click.option("--mode", type=click.Choice(["analytic", "simulate", "both"]),
              default="analytic", show_default=True)
@click.option("--seed", type=int, default=1, show_default=True)
@click.option("--drops", type=int, default=None)
@click.option("--out", "out_path", type=click.Path(), default="-")
@click.option("--json", "as_json", is_flag=True)
def cmd_area_fractions(config, sweep_text, mode, seed, drops, out_path,
                       as_json):
    """Expected service-region fractions along a sweep."""
    try:
        base = _load_params(config)
        sweep = parse_sweep(sweep_text,
                            allowed=("H", "R_c", "delta", "lambda"))
        grid = sweep.grid()
        points = [_apply_sweep_value(base, 0.0, sweep.variable, v)[0]
                  for v in grid]
        for p, v in zip(points, grid):
            bad = validate(p)
            if bad:
                raise ConfigError(f"sweep value {v!r}: " + "; ".join(bad))
    except ConfigError as exc:
        _fail(EXIT_INPUT, str(exc))
    n_drops = drops if drops is not None else base.sim_drops

    rows = []
    for v, p in zip(grid, points):
        row = [v, None, None, None, None, None, None, seed]
        if mode in ("analytic", "both"):
            try:
                af = cov.area_fractions(p)
            except cov.IntegrationError as exc:
                _fail(EXIT_NUMERIC,
                      f"integration failed at {sweep.variable} = {v}: {exc}")
            row[1:4] = [af.f1, af.f2, af.f3]
        if mode in ("simulate", "both"):
            emp = mc.estimate_area_fractions(p, n_drops, seed)
            row[4:7] = [emp.f1, emp.f2, emp.f3]
        rows.append(row)
    columns = [sweep.variable, "f1", "f2", "f3", "emp_f1", "emp_f2",
               "emp_f3", "seed"]
    meta = {"command": "area-fractions", "sweep": sweep_text, "mode": mode,
            "seed": seed, "drops": n_drops}
    _emit(out_path, as_json, base, meta, columns, rows)


# ---------------------------------------------------------------------------
# normalized spectral efficiency


def _nse_point(task):
    params, = task
    try:
        return (cov.nse(params), cov.nse_uav_only(params),
                cov.nse_ground_only(params))
    except cov.IntegrationError as exc:
        return ("error", str(exc))


@main.command("nse")
@click.option("--config", type=click.Path(), default=None)
@click.option("--sweep", "sweep_text", required=True,
              help="R_c:START:STOP:STEPS[:log].")
@click.option("--out", "out_path", type=click.Path(), default="-")
@click.option("--json", "as_json", is_flag=True)
def cmd_nse(config, sweep_text, out_path, as_json):
    """Normalized spectral efficiency of all three schemes vs R_c."""
    try:
        base = _load_params(config)
        sweep = parse_sweep(sweep_text, allowed=("R_c",))
        grid = sweep.grid()
        points = [_apply_sweep_value(base, 0.0, "R_c", v)[0] for v in grid]
        for p, v in zip(points, grid):
            bad = validate(p)
            if bad:
                raise ConfigError(f"sweep value {v!r}: " + "; ".join(bad))
    except ConfigError as exc:
        _fail(EXIT_INPUT, str(exc))

    tasks = [(p,) for p in points]
    workers = mc.resolve_workers()
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_nse_point, tasks))
    else:
        results = [_nse_point(t) for t in tasks]
    for v, res in zip(grid, results):
        if res and res[0] == "error":
            _fail(EXIT_NUMERIC,
                  f"integration failed at R_c = {v}: {res[1]}")

    columns = ["R_c", "nse_proposed", "nse_uav_only", "nse_ground_only"]
    rows = [[v, res[0], res[1], res[2]] for v, res in zip(grid, results)]
    meta = {"command": "nse", "sweep": sweep_text}
    _emit(out_path, as_json, base, meta, columns, rows)


# ---------------------------------------------------------------------------
# validation gate


def _ks_statistic(samples: np.ndarray, cdf_values: np.ndarray) -> float:
    n = samples.size
    d_plus = float(np.max(np.arange(1, n + 1) / n - cdf_values))
    d_minus = float(np.max(cdf_values - np.arange(0, n) / n))
    return max(d_plus, d_minus)


def _validate_checks(params: SystemParams, seed: int, tolerance: float,
                     drops: int) -> list[tuple[str, str, float, float, float,
                                               float, bool]]:
    """Run every analytic-vs-simulation check; returns report tuples
    (check, point, analytic, empirical, delta, limit, ok)."""
    rc = params.radius_rc
    checks = []

    # nearest-BS distance law: KS statistic against the analytic CDF
    n_ks = min(50000, max(5000, drops))
    ks_limit = kolmogi(0.01) / math.sqrt(n_ks)
    for r0 in (0.0, 0.6 * rc):
        samples = np.sort(mc.nearest_distance_samples(params, r0, n_ks,
                                                      seed))
        g = geo.HoleGeometry.from_params(params, r0)
        cdf = np.array([geo.nearest_bs_cdf(g, float(r)) for r in samples])
        stat = _ks_statistic(samples, cdf)
        checks.append(("nearest-distance-ks", f"r0={r0:g}", 0.0, stat, stat,
                       ks_limit, stat <= ks_limit))

    # conditional Laplace transform of the far interference; the argument
    # factors keep the transform mid-range so the check has teeth
    n_lap = min(3000, max(1000, drops // 6))
    lap_points = ((0.6 * rc, 0.7 * rc, 0.003), (0.6 * rc, 1.8 * rc, 0.001))
    for r0, r1, s_factor in lap_points:
        s = s_factor * r1 ** params.alpha_nlos
        analytic = laplace_i2(make_context(params, r0, r1), s)
        empirical = mc.conditional_laplace_estimate(params, r0, r1, s,
                                                    n_lap, seed)
        delta = abs(analytic - empirical)
        checks.append(("laplace-interference", f"r0={r0:g},r1={r1:g}",
                       analytic, empirical, delta, tolerance,
                       delta <= tolerance))

    # expected service-region fractions
    af = cov.area_fractions(params)
    emp = mc.estimate_area_fractions(params, drops, seed)
    for name, a, e in (("f1", af.f1, emp.f1), ("f2", af.f2, emp.f2),
                       ("f3", af.f3, emp.f3)):
        delta = abs(a - e)
        checks.append(("area-fractions", name, a, e, delta, tolerance,
                       delta <= tolerance))

    # end-to-end coverage at a fixed user radius, three thresholds
    r0_cov = 0.4 * rc
    eps_dbs = (-5.0, 0.0, 5.0)
    thresholds = [db_to_linear(db) for db in eps_dbs]
    sims = mc.estimate_coverage_multi(params, r0_cov, drops, seed,
                                      thresholds)
    for db, eps, (est, _hw) in zip(eps_dbs, thresholds, sims):
        analytic = cov.conditional_coverage(
            params.with_overrides(sir_threshold=eps), r0_cov).total
        delta = abs(analytic - est)
        checks.append(("coverage", f"eps_db={db:g}", analytic, est, delta,
                       tolerance, delta <= tolerance))
    return checks


@main.command("validate")
@click.option("--config", type=click.Path(), default=None)
@click.option("--seed", type=int, default=1, show_default=True)
@click.option("--tolerance", type=float, default=0.02, show_default=True)
@click.option("--drops", type=int, default=None,
              help="Drops for the coverage/area checks (default sim_drops).")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Also write the report to this file.")
@click.option("--json", "as_json", is_flag=True)
def cmd_validate(config, seed, tolerance, drops, out_path, as_json):
    """Cross-validate the analytics against seeded simulations."""
    try:
        params = _load_params(config)
    except ConfigError as exc:
        _fail(EXIT_INPUT, str(exc))
    n_drops = drops if drops is not None else params.sim_drops
    try:
        checks = _validate_checks(params, seed, tolerance, n_drops)
    except cov.IntegrationError as exc:
        _fail(EXIT_NUMERIC, str(exc))

    columns = ["check", "point", "analytic", "empirical", "delta", "limit",
               "status"]
    rows = [[c[0], c[1], c[2], c[3], c[4], c[5],
             "pass" if c[6] else "FAIL"] for c in checks]
    all_ok = all(c[6] for c in checks)
    meta = {"command": "validate", "seed": seed, "tolerance": tolerance,
            "drops": n_drops, "overall": "pass" if all_ok else "FAIL"}
    if out_path:
        _emit(out_path, as_json, params, meta, columns, rows)
    _emit("-", as_json, params, meta, columns, rows)
    if not all_ok:
        failed = [f"{c[0]}[{c[1]}] delta={c[4]:.6f} limit={c[5]:.6f}"
                  for c in checks if not c[6]]
        click.echo("failed checks: " + "; ".join(failed), err=True)
        sys.exit(EXIT_GATE)


if __name__ == "__main__":
    main()
