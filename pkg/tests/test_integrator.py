# tests/test_integrator.py

from typing import List

import numpy as np
import pytest
from pytest_mock import MockerFixture

from skyrme_lab.core.dynamics import NonFiniteStateError
from skyrme_lab.core.enums import RunStatus
from skyrme_lab.core.grid import FieldState, make_grid
from skyrme_lab.core.integrator import cfl_dt, detect_blowup, evolve, rk4_step
from skyrme_lab.core.models import Params, RunConfig


def _bump_state(N: int, R: float = 1.0, amplitude: float = 1.0) -> FieldState:
    grid = make_grid(R, N)
    profile = amplitude * grid.r * np.exp(-((grid.r / 0.3) ** 2))
    outer = amplitude * grid.ghost_r * np.exp(-((grid.ghost_r / 0.3) ** 2))
    return FieldState(t=0.0, u=profile, v=np.zeros(N), outer=outer)


@pytest.mark.parametrize("cfl", [0.0, -0.5, 1.5])
def test_cfl_dt_rejects_out_of_range(cfl: float) -> None:
    with pytest.raises(ValueError):
        cfl_dt(make_grid(1.0, 16), cfl)


def test_rk4_step_rejects_non_positive_dt() -> None:
    with pytest.raises(ValueError):
        rk4_step(_bump_state(16), make_grid(1.0, 16), Params(), 0.0)


def test_zero_data_stays_zero() -> None:
    grid = make_grid(1.0, 32)
    state = FieldState(t=0.0, u=np.zeros(32), v=np.zeros(32), outer=np.zeros(2))
    summary = evolve(state, grid, Params(), RunConfig(t_end=0.3))
    assert summary.status is RunStatus.completed
    assert np.all(summary.final_state.u == 0.0)
    assert np.all(summary.final_state.v == 0.0)


def test_evolve_lands_on_t_end_with_equalised_steps() -> None:
    grid = make_grid(1.0, 16)
    summary = evolve(_bump_state(16), grid, Params(), RunConfig(t_end=0.3, cfl=0.5))
    assert summary.t_final == 0.3
    assert summary.steps == int(np.ceil(0.3 / (0.5 / 16)))


def test_observers_see_step_zero_every_k_and_final() -> None:
    grid = make_grid(1.0, 16)
    steps: List[int] = []
    times: List[float] = []

    def observer(state: FieldState, step: int) -> None:
        steps.append(step)
        times.append(state.t)
        with pytest.raises(ValueError):
            state.u[0] = 1.0

    evolve(_bump_state(16), grid, Params(), RunConfig(t_end=0.25, cfl=0.5, observe_every=3), observers=[observer])
    assert steps == [0, 3, 6, 8]
    assert times[0] == 0.0
    assert times[-1] == 0.25


def test_detect_blowup_flags_threshold() -> None:
    grid = make_grid(1.0, 32)
    state = _bump_state(32)
    check = detect_blowup(state, grid, RunConfig(blowup_grad_threshold=0.5))
    assert check.status is RunStatus.blowup_suspected
    assert check.radius is not None and check.radius < 0.2
    assert not detect_blowup(state, grid, RunConfig()).flagged


def test_evolve_stops_on_blowup() -> None:
    grid = make_grid(1.0, 32)
    summary = evolve(_bump_state(32), grid, Params(), RunConfig(t_end=0.2, blowup_grad_threshold=0.5))
    assert summary.status is RunStatus.blowup_suspected
    assert summary.steps == 0
    assert summary.blowup_radius is not None


def test_evolve_reports_non_finite(mocker: MockerFixture) -> None:
    mocker.patch("skyrme_lab.core.integrator.semilinear_accel", side_effect=NonFiniteStateError("overflow"))
    grid = make_grid(1.0, 16)
    summary = evolve(_bump_state(16), grid, Params(), RunConfig(t_end=0.1))
    assert summary.status is RunStatus.non_finite
    assert summary.steps == 0


def test_rk4_is_fourth_order_in_time() -> None:
    grid = make_grid(1.0, 64)
    params = Params()
    finals = []
    for steps in (128, 256, 512):
        state = _bump_state(64)
        dt = 0.2 / steps
        for _ in range(steps):
            state = rk4_step(state, grid, params, dt)
        finals.append(state.u)
    order = np.log2(np.max(np.abs(finals[0] - finals[1])) / np.max(np.abs(finals[1] - finals[2])))
    assert 3.3 < order < 4.7
