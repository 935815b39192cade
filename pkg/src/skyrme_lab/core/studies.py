# src/skyrme_lab/core/studies.py

"""
Studies module: Config-driven experiments behind the CLI commands.

Every study is a pure function of a validated LabConfig. Independent resolutions run
in a ThreadPoolExecutor bounded by ``threads``; results are collected in submission
order, so reports do not depend on scheduling.
"""

import logging
import math
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from skyrme_lab.core.config import config_hash
from skyrme_lab.core.diagnostics import C_BOUND, estimate_d_bound_constant
from skyrme_lab.core.dynamics import potential_bound
from skyrme_lab.core.enums import RunStatus
from skyrme_lab.core.grid import FieldState, FloatArray, RadialGrid, make_grid
from skyrme_lab.core.identities import IdentityReport, convergence_orders, oracle_battery, residual_study
from skyrme_lab.core.initdata import build_initial
from skyrme_lab.core.integrator import RunSummary, evolve
from skyrme_lab.core.ledger import (
    DiagnosticsObserver,
    FluxLedger,
    cone_average_series,
    is_non_increasing,
    section_series,
)
from skyrme_lab.core.models import ConeSpec, LabConfig, Params, RunConfig

logger = logging.getLogger(__name__)

AVERAGED_DENSITIES = ["e", "d_ut2", "d_ur2", "d_sinur", "d_sinut", "c_sin", "pot"]
MONITORED_SERIES = [
    "E",
    "E_annulus",
    "E_weighted",
    "avg_d_ut2",
    "avg_d_ur2",
    "avg_d_sinur",
    "avg_d_sinut",
    "avg_c_sin",
]
BOUND_FLAGS = ["pot_bound", "u_ut_slice_bound", "u_mantle_bound"]
FLUX_FLOOR = 1e-6
DECAY_SLACK = 10.0


@dataclass
class SimulationResult:
    config: LabConfig
    grid: RadialGrid
    summary: RunSummary
    observer: DiagnosticsObserver
    energy_drift: float
    reversal_error: Optional[float] = None

    @property
    def domain_ledger(self) -> FluxLedger:
        return self.observer.ledgers[0]

    @property
    def cone_ledgers(self) -> List[FluxLedger]:
        return self.observer.ledgers[1:]


def domain_cone(config: LabConfig) -> ConeSpec:
    """Cone whose base stops ``domain_margin * R`` short of the frozen outer boundary."""
    return ConeSpec(t_apex=config.grid.R * (1.0 - config.checks.domain_margin), lambda_frac=0.5)


def time_reversal_error(state0: FieldState, grid: RadialGrid, params: Params, run: RunConfig, T: float) -> float:
    """
    Evolve for T, negate the velocity and evolve for T again.

    Returns:
        float: max |u_back - u0| / max |u0| over cells the outer boundary cannot reach
        in either leg; the absolute error when u0 vanishes there.

    Raises:
        ValueError: If T leaves no cell uncontaminated or a leg stops early.
    """
    if not T > 0:
        raise ValueError(f"Reversal time must be positive, got {T}")
    mask = grid.r <= grid.R - 2.0 * T - 2.0 * grid.dr
    if not np.any(mask):
        raise ValueError(f"Reversal time T={T} is too long for R={grid.R}")
    leg = run.model_copy(update={"t_end": state0.t + T})
    forward = evolve(state0, grid, params, leg)
    if forward.status is not RunStatus.completed:
        raise ValueError(f"Forward leg of the reversal check stopped: {forward.status.value}")
    flipped = FieldState(t=state0.t, u=forward.final_state.u, v=-forward.final_state.v, outer=state0.outer_values)
    backward = evolve(flipped, grid, params, leg)
    if backward.status is not RunStatus.completed:
        raise ValueError(f"Backward leg of the reversal check stopped: {backward.status.value}")
    diff = float(np.max(np.abs(backward.final_state.u[mask] - state0.u[mask])))
    scale = float(np.max(np.abs(state0.u[mask])))
    return diff / scale if scale > 0 else diff


def run_simulation(config: LabConfig, threads: int = 1) -> SimulationResult:
    """
    Evolve the configured initial data with every diagnostic attached.

    The first ledger always belongs to the domain cone used for the energy drift
    max |E(t) - E(0) + F(0, t)| / E(0); the configured cones follow as cone_1, cone_2, ...
    An optional time-reversal check runs concurrently when ``checks.reversal_time`` is set.
    """
    grid = make_grid(config.grid.R, config.grid.N)
    state0 = build_initial(config.initial, grid, config.params)
    cones = [domain_cone(config)] + list(config.cones)
    labels = ["domain"] + [f"cone_{i + 1}" for i in range(len(config.cones))]
    observer = DiagnosticsObserver(grid, config.params, cones, labels)

    reversal: Optional[Future[float]] = None
    with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
        if config.checks.reversal_time is not None:
            reversal = pool.submit(
                time_reversal_error, state0, grid, config.params, config.run, config.checks.reversal_time
            )
        summary = evolve(state0, grid, config.params, config.run, observers=[observer])
        reversal_error = reversal.result() if reversal is not None else None

    domain = observer.ledgers[0]
    e0 = domain.initial_energy
    drift = domain.max_abs_balance / e0 if e0 > 0 else 0.0
    logger.info("Run %s: energy drift %.3e over the domain cone", summary.status.value, drift)
    return SimulationResult(config, grid, summary, observer, drift, reversal_error)


def _or_nan(value: Optional[float]) -> float:
    return np.nan if value is None else value


def _stamped(df: pd.DataFrame, config: LabConfig) -> pd.DataFrame:
    df.insert(0, "config_hash", config_hash(config))
    return df


def _ledger_rows(result: SimulationResult, ledger: FluxLedger) -> List[Dict[str, Any]]:
    averages = {name: cone_average_series(ledger, name) for name in AVERAGED_DENSITIES}
    flux_section = section_series(ledger, "flux")
    u_section = section_series(ledger, "u_flux")
    rows: List[Dict[str, Any]] = []
    for i, rec in enumerate(ledger.records):
        obs = result.observer.rows[i]
        row: Dict[str, Any] = {
            "t": obs.t,
            "step": obs.step,
            "cone": ledger.label,
            "t_apex": ledger.cone.t_apex,
            "T": rec.T,
            "E": rec.energy,
            "E_annulus": rec.annulus,
            "annulus_empty": rec.annulus_empty,
            "F_accum": rec.flux,
            "balance": rec.balance,
            "E_weighted": rec.weighted_energy,
            "F_section": _or_nan(flux_section[i]),
            "u_ut_slice": rec.slices["u_ut"] / rec.T if rec.T > 0 else np.nan,
            "u_mantle": _or_nan(u_section[i]) / rec.T if rec.T > 0 else np.nan,
            "u_max": rec.u_max,
        }
        for name in AVERAGED_DENSITIES:
            value = averages[name][i]
            row[f"avg_{name}"] = _or_nan(value)
        row.update(
            {
                "E_total": obs.energy,
                "ratio_cs": obs.decay.ratio_cs,
                "ratio_sqrt": obs.decay.ratio_sqrt,
                "ratio_li": obs.decay.ratio_li,
                "max_d_ratio": obs.check.max_d_ratio,
                "min_d_slack": obs.check.min_d_slack,
            }
        )
        rows.append(row)
    return rows


def timeseries_frame(result: SimulationResult) -> pd.DataFrame:
    """One row per observation and cone while the cone is open, plus its closing row."""
    rows: List[Dict[str, Any]] = []
    for ledger in result.observer.ledgers:
        rows.extend(_ledger_rows(result, ledger))
    return _stamped(pd.DataFrame(rows), result.config)


def simulation_payload(result: SimulationResult) -> Dict[str, Any]:
    config = result.config
    summary = result.summary
    observer = result.observer
    check = observer.check
    rows = observer.rows
    e_total0 = rows[0].energy if rows else 0.0
    decay_limit = 1.0 + DECAY_SLACK * result.grid.dr
    max_cs = max((row.decay.ratio_cs for row in rows), default=0.0)
    max_sqrt = max((row.decay.ratio_sqrt for row in rows), default=0.0)
    max_li = max((row.decay.ratio_li for row in rows), default=0.0)

    cones = []
    for ledger in observer.ledgers:
        base = ledger.initial_energy
        cones.append(
            {
                "label": ledger.label,
                "t_apex": ledger.cone.t_apex,
                "lambda_frac": ledger.cone.lambda_frac,
                "mantle_sign": ledger.mantle_sign,
                "closed": ledger.closed,
                "initial_energy": base,
                "final_flux": ledger.records[-1].flux if ledger.records else 0.0,
                "min_flux": ledger.min_flux,
                "max_abs_balance": ledger.max_abs_balance,
                "flux_non_negative": ledger.min_flux >= -FLUX_FLOOR * max(e_total0, 0.0),
            }
        )

    pointwise: Dict[str, Any] = {}
    if check is not None:
        pointwise = {
            "min_e": check.min_e,
            "max_momentum_excess": check.max_momentum_excess,
            "max_null_flux_excess": check.max_null_flux_excess,
            "max_potential_excess": check.max_potential_excess,
            "potential_bound": potential_bound(config.params),
            "c_bound": C_BOUND,
            "max_d_ratio": check.max_d_ratio,
            "min_d_slack": check.min_d_slack,
            "d_bound_holds": check.max_d_ratio <= C_BOUND,
        }

    payload: Dict[str, Any] = {
        "status": summary.status.value,
        "t_final": summary.t_final,
        "steps": summary.steps,
        "peak_grad": summary.peak_grad,
        "peak_value": summary.peak_value,
        "blowup_radius": summary.blowup_radius,
        "grid": {"R": result.grid.R, "N": result.grid.N, "dr": result.grid.dr},
        "energy": {
            "initial_total": e_total0,
            "final_total": rows[-1].energy if rows else 0.0,
            "drift": result.energy_drift,
            "drift_tolerance": config.checks.energy_drift_tolerance,
            "drift_passed": result.energy_drift < config.checks.energy_drift_tolerance,
        },
        "cones": cones,
        "pointwise": pointwise,
        "decay": {
            "max_ratio_cs": max_cs,
            "ratio_cs_limit": decay_limit,
            "max_ratio_sqrt": max_sqrt,
            "max_ratio_li": max_li,
            "passed": max_cs <= decay_limit and max_li <= decay_limit,
        },
    }
    if result.reversal_error is not None:
        payload["time_reversal"] = {"T": config.checks.reversal_time, "relative_error": result.reversal_error}
    return payload


@dataclass
class IdentityCheckResult:
    report: IdentityReport
    d_bound_estimate: float
    order_ceiling: float

    @property
    def passed(self) -> bool:
        return self.report.passed


def run_identity_check(config: LabConfig, threads: int = 1) -> IdentityCheckResult:
    """
    Oracle battery on random jets, the brute-force D-bound constant and, when
    ``discrete_presets`` is not empty, the discrete residual study.
    """
    checks = config.checks
    oracle = oracle_battery(
        config.params,
        presets=[p.value for p in checks.presets],
        alphas=checks.oracle_alphas,
        samples=checks.oracle_samples,
        seed=checks.seed,
        random_multipliers=checks.random_multipliers,
        threshold=checks.oracle_threshold,
    )
    if checks.discrete_presets:
        report = residual_study(
            config.initial,
            config.grid.R,
            config.params,
            config.run,
            presets=[p.value for p in checks.discrete_presets],
            resolutions=checks.resolutions,
            margin=checks.domain_margin,
            threads=threads,
        )
    else:
        report = IdentityReport()
    report.oracle = oracle
    report.order_floor = checks.order_floor
    d_bound = estimate_d_bound_constant(checks.d_bound_samples, seed=checks.seed, alpha=config.params.alpha)
    return IdentityCheckResult(report=report, d_bound_estimate=d_bound, order_ceiling=checks.order_ceiling)


def _order_label(order: Optional[float]) -> Any:
    return "exact" if order is None else order


def identity_payload(result: IdentityCheckResult) -> Dict[str, Any]:
    report = result.report
    oracle = report.oracle
    presets: Dict[str, Any] = {}
    for name, entries in report.residuals.items():
        orders = report.orders[name]
        presets[name] = {
            "resolutions": [
                {"N": e.N, "t_center": e.t_center, "residual_norm": e.norm, "residual_max": e.max_abs} for e in entries
            ],
            "orders": [_order_label(o) for o in orders],
            "max_oracle_defect": oracle.defects.get(name) if oracle else None,
        }
    return {
        "passed": result.passed,
        "oracle": {
            "threshold": oracle.threshold if oracle else None,
            "max_defect": oracle.max_defect if oracle else None,
            "defects": oracle.defects if oracle else {},
            "passed": oracle.passed if oracle else True,
        },
        "discrete": {
            "order_floor": report.order_floor,
            "order_ceiling": result.order_ceiling,
            "passed": report.orders_passed,
            "presets": presets,
        },
        "d_bound": {"c_bound": C_BOUND, "estimate": result.d_bound_estimate},
    }


def restrict(fine: FloatArray) -> FloatArray:
    """Restrict a cell-centered field to the grid with half as many cells by pair averaging."""
    if fine.size % 2:
        raise ValueError(f"Cannot restrict an odd number of cells ({fine.size})")
    return np.asarray(fine.reshape(-1, 2).mean(axis=1), dtype=np.float64)


@dataclass
class ConvergenceReport:
    resolutions: List[int]
    region_radius: float
    l2_differences: List[float] = field(default_factory=list)
    max_differences: List[float] = field(default_factory=list)
    orders: List[Optional[float]] = field(default_factory=list)
    max_orders: List[Optional[float]] = field(default_factory=list)
    order_floor: float = 1.7

    @property
    def passed(self) -> bool:
        return all(o is None or o >= self.order_floor for o in self.orders)

    def payload(self) -> Dict[str, Any]:
        return {
            "resolutions": self.resolutions,
            "region_radius": self.region_radius,
            "l2_differences": self.l2_differences,
            "max_differences": self.max_differences,
            "orders": [_order_label(o) for o in self.orders],
            "max_orders": [_order_label(o) for o in self.max_orders],
            "order_floor": self.order_floor,
            "passed": self.passed,
        }


def run_convergence(config: LabConfig, threads: int = 1) -> ConvergenceReport:
    """
    Self-convergence of the solver over successively doubled resolutions.

    The solution at N is compared with the pair-averaged solution at 2N on cells with
    r <= R - t_end - domain_margin * R; differences use the r dr measure.

    Raises:
        ValueError: With fewer than three resolutions, resolutions that do not double,
            an empty comparison region or a run that stops early.
    """
    resolutions = list(config.checks.resolutions)
    if len(resolutions) < 3:
        raise ValueError(f"Convergence study needs at least 3 resolutions, got {resolutions}")
    for coarse, fine in zip(resolutions, resolutions[1:]):
        if fine != 2 * coarse:
            raise ValueError(f"Resolutions must double from one to the next, got {coarse} then {fine}")
    R = config.grid.R
    region = R - config.run.t_end - config.checks.domain_margin * R
    if region <= 0:
        raise ValueError(f"t_end={config.run.t_end} leaves no cell outside the outer boundary's influence")

    def final_u(N: int) -> FloatArray:
        grid = make_grid(R, N)
        state = build_initial(config.initial, grid, config.params)
        summary = evolve(state, grid, config.params, config.run)
        if summary.status is not RunStatus.completed:
            raise ValueError(f"Run at N={N} stopped early: {summary.status.value}")
        return summary.final_state.u

    with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
        solutions = list(pool.map(final_u, resolutions))

    report = ConvergenceReport(resolutions=resolutions, region_radius=region, order_floor=config.checks.order_floor)
    for k in range(len(resolutions) - 1):
        grid = make_grid(R, resolutions[k])
        mask = grid.r <= region
        diff = (solutions[k] - restrict(solutions[k + 1]))[mask]
        report.l2_differences.append(float(math.sqrt(np.sum(diff * diff * grid.r[mask]) * grid.dr)))
        report.max_differences.append(float(np.max(np.abs(diff))))
    report.orders = convergence_orders(report.l2_differences, resolutions[:-1])
    report.max_orders = convergence_orders(report.max_differences, resolutions[:-1])
    logger.info("Solver self-convergence orders: %s", report.orders)
    return report


@dataclass
class ConcentrationResult:
    simulation: SimulationResult
    frames: Dict[str, pd.DataFrame]
    flags: Dict[str, Dict[str, bool]]
    tolerance: float


def _toward_zero_flags(df: pd.DataFrame, dr: float, tolerance: float) -> Dict[str, bool]:
    """
    Cauchy-Schwarz bounds for the boundary terms of the u u_t identity, where
    |u| <= pi/2 on the cone section so that |u| <= (pi/2)|sin u|:
    |(1/T) int u u_t| <= pi (1 + dr/T) E(T) and |(1/T) int_C r u (u_t - u_r)| <= pi (1 + dr/T) F,
    F being the mantle flux from T to the apex.
    """
    T = df["T"].to_numpy(dtype=np.float64)
    u_max = df["u_max"].to_numpy(dtype=np.float64)
    # max |u| over the slices from each row to the apex covers the mantle section
    u_section = np.maximum.accumulate(np.nan_to_num(u_max, nan=np.inf)[::-1])[::-1]
    open_rows = T > 0
    factor = np.pi * (1.0 + dr / np.where(open_rows, T, 1.0))

    slice_rows = open_rows & (u_max <= 0.5 * np.pi)
    slice_term = np.abs(df["u_ut_slice"].to_numpy(dtype=np.float64))
    energy = df["E"].to_numpy(dtype=np.float64)
    slice_ok = slice_term[slice_rows] <= factor[slice_rows] * energy[slice_rows] + tolerance

    mantle_term = np.abs(df["u_mantle"].to_numpy(dtype=np.float64))
    flux = df["F_section"].to_numpy(dtype=np.float64)
    mantle_rows = open_rows & (u_section <= 0.5 * np.pi) & ~np.isnan(mantle_term)
    mantle_ok = mantle_term[mantle_rows] <= factor[mantle_rows] * flux[mantle_rows] + tolerance
    return {"u_ut_slice_bound": bool(np.all(slice_ok)), "u_mantle_bound": bool(np.all(mantle_ok))}


def run_concentration_study(config: LabConfig, threads: int = 1) -> ConcentrationResult:
    """
    Energy, annulus energy, weighted energy and cone averages versus T for every
    configured cone, with a non-increasing flag per series (tolerance
    ``monotone_tolerance * E(0)``). The signed boundary terms of the u u_t identity get
    bound flags instead; their bounds vanish at the apex.

    Raises:
        ValueError: Without cones, or when a cone's apex lies beyond t_end.
    """
    if not config.cones:
        raise ValueError("Concentration study needs at least one cone")
    for cone in config.cones:
        if cone.t_apex > config.run.t_end:
            raise ValueError(f"Cone apex t_apex={cone.t_apex} lies beyond t_end={config.run.t_end}")
    no_reversal = config.checks.model_copy(update={"reversal_time": None})
    result = run_simulation(config.model_copy(update={"checks": no_reversal}), threads)
    e0 = result.observer.rows[0].energy if result.observer.rows else 0.0
    tolerance = config.checks.monotone_tolerance * e0
    pot_sup = potential_bound(config.params)
    dr = result.grid.dr

    frames: Dict[str, pd.DataFrame] = {}
    flags: Dict[str, Dict[str, bool]] = {}
    for ledger in result.cone_ledgers:
        df = pd.DataFrame(_ledger_rows(result, ledger))
        frames[ledger.label] = df
        cone_flags = {
            name: is_non_increasing([None if pd.isna(v) else float(v) for v in df[name]], tolerance)
            for name in MONITORED_SERIES
        }
        pot = df["avg_pot"].to_numpy(dtype=np.float64)
        T = df["T"].to_numpy(dtype=np.float64)
        defined = ~np.isnan(pot)
        # (1/T) int int r dr dt over the cone section is T^2/6; widened by the partial cells
        volume = (T[defined] + 2.0 * dr) ** 3 / (6.0 * T[defined])
        cone_flags["pot_bound"] = bool(np.all(pot[defined] <= pot_sup * volume))
        cone_flags.update(_toward_zero_flags(df, dr, tolerance))
        flags[ledger.label] = cone_flags
        logger.info("Cone %s monotonicity: %s", ledger.label, cone_flags)
    return ConcentrationResult(simulation=result, frames=frames, flags=flags, tolerance=tolerance)


def concentration_frame(result: ConcentrationResult) -> pd.DataFrame:
    return _stamped(pd.concat(list(result.frames.values()), ignore_index=True), result.simulation.config)


def concentration_payload(result: ConcentrationResult) -> Dict[str, Any]:
    cones = []
    for ledger in result.simulation.cone_ledgers:
        cones.append(
            {
                "label": ledger.label,
                "t_apex": ledger.cone.t_apex,
                "lambda_frac": ledger.cone.lambda_frac,
                "non_increasing": result.flags[ledger.label],
                "passed": all(result.flags[ledger.label].values()),
            }
        )
    return {
        "status": result.simulation.summary.status.value,
        "tolerance": result.tolerance,
        "cones": cones,
        "passed": all(cone["passed"] for cone in cones),
    }
