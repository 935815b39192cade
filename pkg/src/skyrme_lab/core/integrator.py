# src/skyrme_lab/core/integrator.py

"""
Integrator module: Method-of-lines time evolution of (u, v) with classical RK4,
CFL-controlled step sizes, observer callbacks and blow-up detection.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Protocol, Sequence

import numpy as np

from skyrme_lab.core.dynamics import NonFiniteStateError, semilinear_accel
from skyrme_lab.core.enums import RunStatus
from skyrme_lab.core.grid import FieldState, FloatArray, RadialGrid, spatial_derivs
from skyrme_lab.core.models import Params, RunConfig

logger = logging.getLogger(__name__)


class Observer(Protocol):
    def __call__(self, state: FieldState, step: int) -> None: ...


@dataclass(frozen=True)
class BlowupCheck:
    status: RunStatus
    peak_grad: float
    peak_value: float
    radius: Optional[float] = None

    @property
    def flagged(self) -> bool:
        return self.status is not RunStatus.completed


@dataclass(frozen=True)
class RunSummary:
    status: RunStatus
    t_final: float
    steps: int
    peak_grad: float
    peak_value: float
    blowup_radius: Optional[float]
    final_state: FieldState


def cfl_dt(grid: RadialGrid, cfl: float) -> float:
    """
    Time step dt = cfl * dr for characteristic speed one.

    Raises:
        ValueError: If cfl is outside (0, 1].
    """
    if not 0 < cfl <= 1:
        raise ValueError(f"cfl must lie in (0, 1], got {cfl}")
    return cfl * grid.dr


def rk4_step(state: FieldState, grid: RadialGrid, params: Params, dt: float) -> FieldState:
    """
    One classical four-stage Runge-Kutta step of (u', v') = (v, u_tt).

    Raises:
        ValueError: If dt is not positive.
        NonFiniteStateError: If a stage or the result is not finite.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    u0, v0, t0 = state.u, state.v, state.t

    def stage(u: FloatArray, v: FloatArray, t: float) -> FloatArray:
        return semilinear_accel(state.replace(t, u, v), grid, params)

    k1u, k1v = v0, stage(u0, v0, t0)
    k2u = v0 + 0.5 * dt * k1v
    k2v = stage(u0 + 0.5 * dt * k1u, k2u, t0 + 0.5 * dt)
    k3u = v0 + 0.5 * dt * k2v
    k3v = stage(u0 + 0.5 * dt * k2u, k3u, t0 + 0.5 * dt)
    k4u = v0 + dt * k3v
    k4v = stage(u0 + dt * k3u, k4u, t0 + dt)

    with np.errstate(over="ignore", invalid="ignore"):
        u1 = u0 + dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        v1 = v0 + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    result = state.replace(t0 + dt, u1, v1)
    if not result.is_finite():
        raise NonFiniteStateError(f"non-finite state after step to t={t0 + dt:.6g}")
    return result


def detect_blowup(state: FieldState, grid: RadialGrid, config: RunConfig) -> BlowupCheck:
    """
    Flag a suspected singularity when |u_r| or |v| exceeds its threshold.

    The reported radius is the location of the larger relative exceedance; genuine
    candidates concentrate near r = 0.
    """
    if not state.is_finite():
        bad = ~(np.isfinite(state.u) & np.isfinite(state.v))
        return BlowupCheck(RunStatus.non_finite, math.inf, math.inf, float(grid.r[int(np.argmax(bad))]))

    ur, _ = spatial_derivs(state, grid)
    grad = np.abs(ur)
    vel = np.abs(state.v)
    j_grad = int(np.argmax(grad))
    j_vel = int(np.argmax(vel))
    peak_grad = float(grad[j_grad])
    peak_value = float(vel[j_vel])
    if not (np.isfinite(peak_grad) and np.isfinite(peak_value)):
        return BlowupCheck(RunStatus.non_finite, peak_grad, peak_value, float(grid.r[j_grad]))

    grad_ratio = peak_grad / config.blowup_grad_threshold
    value_ratio = peak_value / config.blowup_value_threshold
    if grad_ratio > 1 or value_ratio > 1:
        where = j_grad if grad_ratio >= value_ratio else j_vel
        return BlowupCheck(RunStatus.blowup_suspected, peak_grad, peak_value, float(grid.r[where]))
    return BlowupCheck(RunStatus.completed, peak_grad, peak_value)


def evolve(
    state0: FieldState,
    grid: RadialGrid,
    params: Params,
    config: RunConfig,
    observers: Sequence[Observer] = (),
) -> RunSummary:
    """
    Evolve from state0.t to config.t_end.

    The step count is n = ceil((t_end - t0) / dt_cfl) and the step is equalised to
    (t_end - t0) / n so that t_end is hit exactly. Observers receive read-only snapshots
    at step 0, every ``observe_every`` steps and at the final step.

    Args:
        state0 (FieldState): Initial state.
        grid (RadialGrid): Spatial grid.
        params (Params): Physical parameters.
        config (RunConfig): Stepping controls and blow-up thresholds.
        observers (Sequence[Observer]): Callables invoked as ``observer(snapshot, step)``.

    Returns:
        RunSummary: Termination cause and peak values.
    """
    duration = config.t_end - state0.t
    if duration < 0:
        raise ValueError(f"t_end={config.t_end} lies before the initial time t={state0.t}")
    dt_max = cfl_dt(grid, config.cfl)
    n_steps = max(int(math.ceil(duration / dt_max - 1e-9)), 0)
    dt = duration / n_steps if n_steps else 0.0
    logger.info(
        "Evolving N=%d from t=%.6g to t=%.6g in %d steps (dt=%.3e)", grid.N, state0.t, config.t_end, n_steps, dt
    )

    def notify(current: FieldState, step: int) -> None:
        if observers:
            snap = current.snapshot()
            for observer in observers:
                observer(snap, step)

    state = state0
    peak_grad = 0.0
    peak_value = 0.0
    step = 0
    while True:
        check = detect_blowup(state, grid, config)
        peak_grad = max(peak_grad, check.peak_grad)
        peak_value = max(peak_value, check.peak_value)
        if check.flagged:
            logger.warning(
                "Run stopped at t=%.6g (step %d): %s near r=%s", state.t, step, check.status.value, check.radius
            )
            return RunSummary(check.status, state.t, step, peak_grad, peak_value, check.radius, state)

        if step % config.observe_every == 0 or step == n_steps:
            notify(state, step)
        if step == n_steps:
            break

        try:
            state = rk4_step(state, grid, params, dt)
        except NonFiniteStateError as e:
            logger.warning("Non-finite values during step %d: %s", step + 1, e)
            return RunSummary(RunStatus.non_finite, state.t, step, math.inf, math.inf, None, state)
        step += 1
        if step == n_steps:
            # land exactly on t_end
            state = state.replace(config.t_end, state.u, state.v)

    logger.info("Run completed at t=%.6g after %d steps", state.t, step)
    return RunSummary(RunStatus.completed, state.t, step, peak_grad, peak_value, None, state)
