# tests/test_studies.py

import math
from typing import Any, Dict

import numpy as np
import pytest

from skyrme_lab.core.config import config_hash
from skyrme_lab.core.diagnostics import C_BOUND
from skyrme_lab.core.grid import make_grid
from skyrme_lab.core.initdata import build_initial
from skyrme_lab.core.models import LabConfig
from skyrme_lab.core.studies import (
    BOUND_FLAGS,
    MONITORED_SERIES,
    concentration_frame,
    concentration_payload,
    domain_cone,
    identity_payload,
    restrict,
    run_concentration_study,
    run_convergence,
    run_identity_check,
    run_simulation,
    simulation_payload,
    time_reversal_error,
    timeseries_frame,
)

ZERO_INITIAL: Dict[str, Any] = {"profile": {"family": "zero"}, "velocity": {"family": "zero"}}


def _config(**sections: Any) -> LabConfig:
    return LabConfig.model_validate(sections)


def test_domain_cone_stops_short_of_boundary() -> None:
    config = _config(grid={"R": 2.0, "N": 64}, checks={"domain_margin": 0.1})
    assert domain_cone(config).t_apex == pytest.approx(1.8)


def test_zero_data_simulation() -> None:
    config = _config(
        grid={"R": 1.0, "N": 64},
        run={"t_end": 0.25},
        initial=ZERO_INITIAL,
        cones=[{"t_apex": 0.25}],
    )
    result = run_simulation(config)

    assert result.summary.status.value == "completed"
    assert result.energy_drift == 0.0
    df = timeseries_frame(result)
    assert set(df["cone"]) == {"domain", "cone_1"}
    assert (df["E"] == 0.0).all()
    assert (df["F_accum"] == 0.0).all()
    assert result.cone_ledgers[0].closed
    payload = simulation_payload(result)
    assert payload["energy"]["drift_passed"]
    assert "time_reversal" not in payload


def test_timeseries_layout() -> None:
    config = _config(grid={"R": 1.0, "N": 64}, run={"t_end": 0.3}, cones=[{"t_apex": 0.2}])
    result = run_simulation(config)
    df = timeseries_frame(result)

    domain = df[df["cone"] == "domain"]
    cone = df[df["cone"] == "cone_1"]
    assert len(domain) == len(result.observer.rows)
    assert len(cone) < len(domain)
    assert cone["T"].iloc[-1] == 0.0
    assert cone["avg_e"].isna().iloc[-1]
    assert not cone["avg_e"].isna().iloc[0]
    for column in ["t", "step", "t_apex", "E_annulus", "annulus_empty", "balance", "E_total", "ratio_li"]:
        assert column in df.columns
    assert df.columns[0] == "config_hash"
    assert (df["config_hash"] == config_hash(config)).all()
    assert cone["F_section"].iloc[-1] == 0.0
    assert cone["u_mantle"].isna().iloc[-1]
    assert domain["F_section"].isna().all()


def test_energy_drift_converges() -> None:
    drifts = []
    for N in (256, 512):
        # 0.9375 R sits on a cell face at both resolutions
        config = _config(grid={"R": 1.0, "N": N}, run={"t_end": 0.5}, checks={"domain_margin": 0.0625})
        drifts.append(run_simulation(config).energy_drift)
    assert drifts[1] < drifts[0] / 2.0
    assert drifts[1] < 1e-4


def test_simulation_checks_hold() -> None:
    config = _config(
        grid={"R": 1.0, "N": 256},
        params={"alpha": 0.8, "potential": "v2", "lambda_pot": 0.6},
        run={"t_end": 0.4},
        initial={
            "profile": {"family": "arctan", "amplitude": 1.0, "scale": 0.4},
            "velocity": {"family": "bump", "amplitude": 0.5, "scale": 0.3},
        },
        cones=[{"t_apex": 0.4, "lambda_frac": 0.3}],
    )
    payload = simulation_payload(run_simulation(config))

    assert payload["status"] == "completed"
    assert payload["pointwise"]["min_e"] >= 0.0
    assert payload["pointwise"]["max_potential_excess"] <= 0.0
    assert payload["pointwise"]["d_bound_holds"]
    assert payload["decay"]["passed"]
    assert all(cone["flux_non_negative"] for cone in payload["cones"])
    assert payload["cones"][1]["closed"]


@pytest.mark.parametrize("N", [256, 1024])
def test_time_reversal_recovers_initial_data(N: int) -> None:
    config = LabConfig()
    grid = make_grid(1.0, N)
    state0 = build_initial(config.initial, grid, config.params)
    assert time_reversal_error(state0, grid, config.params, config.run, 0.25) < 1e-4


def test_time_reversal_rejects_long_times() -> None:
    config = LabConfig()
    grid = make_grid(1.0, 64)
    state0 = build_initial(config.initial, grid, config.params)
    with pytest.raises(ValueError, match="too long"):
        time_reversal_error(state0, grid, config.params, config.run, 0.5)
    with pytest.raises(ValueError, match="positive"):
        time_reversal_error(state0, grid, config.params, config.run, 0.0)


def test_simulation_reports_time_reversal() -> None:
    config = _config(grid={"R": 1.0, "N": 128}, run={"t_end": 0.2}, checks={"reversal_time": 0.2})
    payload = simulation_payload(run_simulation(config, threads=2))
    assert payload["time_reversal"]["T"] == 0.2
    assert payload["time_reversal"]["relative_error"] < 1e-4


def test_restrict() -> None:
    assert np.array_equal(restrict(np.array([1.0, 3.0, 5.0, 7.0])), np.array([2.0, 6.0]))
    with pytest.raises(ValueError):
        restrict(np.arange(5.0))


def test_convergence_of_zero_data_is_exact() -> None:
    config = _config(run={"t_end": 0.2}, initial=ZERO_INITIAL, checks={"resolutions": [64, 128, 256]})
    report = run_convergence(config)
    assert report.l2_differences == [0.0, 0.0]
    assert report.orders == [None]
    assert report.payload()["orders"] == ["exact"]
    assert report.passed


@pytest.mark.parametrize(
    ("checks", "run", "message"),
    [
        ({"resolutions": [64, 128]}, {"t_end": 0.2}, "at least 3"),
        ({"resolutions": [64, 128, 512]}, {"t_end": 0.2}, "double"),
        ({"resolutions": [64, 128, 256]}, {"t_end": 1.0}, "outer boundary"),
    ],
)
def test_convergence_rejects_bad_setups(checks: Dict[str, Any], run: Dict[str, Any], message: str) -> None:
    with pytest.raises(ValueError, match=message):
        run_convergence(_config(run=run, checks=checks))


def test_convergence_is_second_order() -> None:
    config = _config(run={"t_end": 0.3}, checks={"resolutions": [128, 256, 512]})
    report = run_convergence(config)
    assert len(report.orders) == 1
    order = report.orders[0]
    assert order is not None
    assert 1.7 <= order <= 2.3
    assert report.passed
    assert report.region_radius == pytest.approx(1.0 - 0.3 - 0.05)


def test_identity_check_without_discrete_presets() -> None:
    config = _config(
        checks={
            "discrete_presets": [],
            "oracle_samples": 500,
            "random_multipliers": 2,
            "d_bound_samples": 20_000,
        }
    )
    result = run_identity_check(config)
    assert result.passed
    assert 0.0 < result.d_bound_estimate <= C_BOUND

    payload = identity_payload(result)
    assert payload["passed"]
    assert payload["oracle"]["max_defect"] <= 1e-10
    assert payload["discrete"]["presets"] == {}
    assert payload["d_bound"]["c_bound"] == C_BOUND


def _small_data_config(**overrides: Any) -> LabConfig:
    base: Dict[str, Any] = {
        "grid": {"R": 2.0, "N": 256},
        "params": {"potential": "v1", "lambda_pot": 0.5},
        "run": {"t_end": 0.5},
        "initial": {"profile": {"family": "arctan", "amplitude": 0.05, "scale": 2.0}},
        "cones": [{"t_apex": 0.5, "lambda_frac": 0.5}],
    }
    base.update(overrides)
    return LabConfig.model_validate(base)


def test_concentration_study_small_data() -> None:
    result = run_concentration_study(_small_data_config())
    flags = result.flags["cone_1"]

    assert set(flags) == set(MONITORED_SERIES) | set(BOUND_FLAGS)
    assert all(flags.values()), flags
    payload = concentration_payload(result)
    assert payload["passed"]
    assert payload["tolerance"] > 0
    df = concentration_frame(result)
    assert set(df["cone"]) == {"cone_1"}
    assert df["T"].iloc[0] == pytest.approx(0.5)
    assert df["E"].iloc[0] > df["E"].iloc[len(df) // 2] > 0


def test_concentration_study_requires_cones() -> None:
    with pytest.raises(ValueError, match="at least one cone"):
        run_concentration_study(_small_data_config(cones=[]))
    with pytest.raises(ValueError, match="beyond t_end"):
        run_concentration_study(_small_data_config(cones=[{"t_apex": 0.6}]))


def test_concentration_ignores_reversal_time() -> None:
    config = _small_data_config(checks={"reversal_time": 0.3})
    result = run_concentration_study(config)
    assert result.simulation.reversal_error is None
    assert not math.isnan(result.tolerance)


def test_concentration_boundary_terms_shrink_toward_apex() -> None:
    config = _small_data_config()
    result = run_concentration_study(config)
    df = concentration_frame(result)
    assert (df["config_hash"] == config_hash(config)).all()

    open_rows = df[df["T"] > 0]
    dr = result.simulation.grid.dr
    assert (open_rows["E_weighted"] <= open_rows["E"] * (1 + dr / (2 * open_rows["T"])) * (1 + 1e-12)).all()
    assert (open_rows["u_max"] < 0.5 * math.pi).all()
    # zero initial velocity
    assert open_rows["u_ut_slice"].iloc[0] == 0.0
    bound = math.pi * (1 + dr / open_rows["T"]) * open_rows["E"] + result.tolerance
    assert (open_rows["u_ut_slice"].abs() <= bound).all()
    assert abs(open_rows["u_mantle"].iloc[-1]) < abs(open_rows["u_mantle"].iloc[0])
    assert result.flags["cone_1"]["u_ut_slice_bound"]
    assert result.flags["cone_1"]["u_mantle_bound"]
    assert result.flags["cone_1"]["E_weighted"]
