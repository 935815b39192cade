# tests/test_ledger.py

import math

import numpy as np
import pytest

from skyrme_lab.core.diagnostics import DENSITY_NAMES, Densities
from skyrme_lab.core.enums import ProfileFamily, VelocityFamily
from skyrme_lab.core.grid import FieldState, RadialGrid, make_grid
from skyrme_lab.core.initdata import build_initial
from skyrme_lab.core.integrator import evolve
from skyrme_lab.core.ledger import (
    ConeMonitor,
    DiagnosticsObserver,
    FluxLedger,
    cone_average,
    cone_average_series,
    is_non_increasing,
    section_series,
)
from skyrme_lab.core.models import ConeSpec, InitialDataSpec, Params, ProfileSpec, RunConfig, VelocitySpec


def _ones(grid: RadialGrid) -> Densities:
    values = np.ones(grid.N)
    return Densities(**{name: values for name in DENSITY_NAMES})


def _constant_ledger(t_start: float = 0.0, t_stop: float = 1.0, count: int = 101) -> FluxLedger:
    grid = make_grid(1.0, 256)
    monitor = ConeMonitor(ConeSpec(t_apex=1.0), grid, "unit")
    dens = _ones(grid)
    for t in np.linspace(t_start, t_stop, count):
        monitor.record(float(t), dens)
    return monitor.ledger


def _moving_bump(grid: RadialGrid) -> FieldState:
    spec = InitialDataSpec(
        profile=ProfileSpec(family=ProfileFamily.arctan, amplitude=0.8, scale=0.3),
        velocity=VelocitySpec(family=VelocityFamily.bump, amplitude=1.0, scale=0.3),
    )
    return build_initial(spec, grid, Params())


def test_zero_field_ledger_is_zero() -> None:
    grid = make_grid(1.0, 64)
    state = FieldState(t=0.0, u=np.zeros(64), v=np.zeros(64), outer=np.zeros(2))
    observer = DiagnosticsObserver(grid, Params(), cones=[ConeSpec(t_apex=0.5)])
    evolve(state, grid, Params(), RunConfig(t_end=0.5), observers=[observer])

    ledger = observer.ledgers[0]
    assert ledger.label == "cone_1"
    assert ledger.closed
    assert ledger.records[-1].T == 0.0
    for rec in ledger.records:
        assert rec.energy == 0.0
        assert rec.flux == 0.0
        assert rec.balance == 0.0
    assert all(row.energy == 0.0 for row in observer.rows)


def test_constant_density_slices() -> None:
    ledger = _constant_ledger()
    first = ledger.records[0]
    assert first.T == pytest.approx(1.0)
    assert first.slices["e"] == pytest.approx(0.5, rel=1e-12)
    assert first.annulus == pytest.approx(0.375, rel=1e-12)
    assert ledger.closed
    assert len(ledger.records) == 101


def test_cone_average_of_constant_density() -> None:
    ledger = _constant_ledger()
    for T in (0.3, 0.5, 1.0):
        assert cone_average(ledger, "e", T) == pytest.approx(T * T / 6.0, rel=2e-3)


def test_cone_average_between_observations() -> None:
    ledger = _constant_ledger()
    assert cone_average(ledger, "pot", 0.505) == pytest.approx(0.505**2 / 6.0, rel=1e-3)


def test_cone_average_rejects_short_sections() -> None:
    ledger = _constant_ledger()
    with pytest.raises(ValueError, match="two observation intervals"):
        cone_average(ledger, "e", 0.015)


def test_cone_average_requires_closed_cone() -> None:
    ledger = _constant_ledger(t_stop=0.5, count=51)
    assert not ledger.closed
    with pytest.raises(ValueError, match="never reached its apex"):
        cone_average(ledger, "e", 0.3)
    assert cone_average_series(ledger, "e") == [None] * 51


def test_cone_average_rejects_unknown_density_and_long_sections() -> None:
    ledger = _constant_ledger(t_start=0.2, count=81)
    with pytest.raises(ValueError, match="Unknown density"):
        cone_average(ledger, "entropy", 0.5)
    with pytest.raises(ValueError, match="before the first observation"):
        cone_average(ledger, "e", 0.9)


def test_cone_average_series_marks_undefined_entries() -> None:
    ledger = _constant_ledger()
    series = cone_average_series(ledger, "e")
    assert len(series) == len(ledger.records)
    assert series[-1] is None
    assert series[-2] is None
    assert series[0] == pytest.approx(1.0 / 6.0, rel=1e-3)


def test_balance_converges_at_second_order() -> None:
    balances = []
    for N in (125, 250):
        grid = make_grid(1.0, N)
        observer = DiagnosticsObserver(grid, Params(), cones=[ConeSpec(t_apex=0.8)])
        summary = evolve(_moving_bump(grid), grid, Params(), RunConfig(t_end=0.8), observers=[observer])
        assert summary.status.value == "completed"
        ledger = observer.ledgers[0]
        assert ledger.closed
        assert ledger.min_flux >= -1e-6 * ledger.initial_energy
        balances.append(ledger.max_abs_balance / ledger.initial_energy)
    assert balances[0] / balances[1] > 2.5


def test_flux_drains_the_cone() -> None:
    grid = make_grid(1.0, 128)
    observer = DiagnosticsObserver(grid, Params(), cones=[ConeSpec(t_apex=0.8)], labels=["inner"])
    evolve(_moving_bump(grid), grid, Params(), RunConfig(t_end=0.8), observers=[observer])
    ledger = observer.ledgers[0]
    flux = ledger.series("flux")
    assert ledger.label == "inner"
    assert all(b >= a for a, b in zip(flux, flux[1:]))
    assert ledger.records[-1].flux == pytest.approx(ledger.initial_energy, rel=1e-2)


def test_cone_beyond_run_stays_open() -> None:
    grid = make_grid(1.0, 64)
    observer = DiagnosticsObserver(grid, Params(), cones=[ConeSpec(t_apex=0.9)])
    evolve(_moving_bump(grid), grid, Params(), RunConfig(t_end=0.3), observers=[observer])
    assert not observer.ledgers[0].closed
    assert observer.check is not None
    assert observer.check.min_e >= 0.0


def test_is_non_increasing() -> None:
    assert is_non_increasing([3.0, 2.0, 2.0005, 1.0], 1e-3)
    assert not is_non_increasing([3.0, 2.0, 2.1], 1e-3)
    assert is_non_increasing([None, 2.0, None, 1.5], 0.0)
    assert is_non_increasing([], 0.0)


def test_observer_rejects_mismatched_labels() -> None:
    grid = make_grid(1.0, 16)
    with pytest.raises(ValueError):
        DiagnosticsObserver(grid, Params(), cones=[ConeSpec(t_apex=0.5)], labels=["a", "b"])


def test_cone_average_of_energy_lies_between_slice_energies() -> None:
    grid = make_grid(1.0, 128)
    observer = DiagnosticsObserver(grid, Params(), cones=[ConeSpec(t_apex=0.8)])
    evolve(_moving_bump(grid), grid, Params(), RunConfig(t_end=0.8), observers=[observer])
    ledger = observer.ledgers[0]
    delta = ledger.observation_interval()
    for T in (0.2, 0.4, 0.8):
        window = [rec.energy for rec in ledger.records if rec.t >= 0.8 - T - delta]
        average = cone_average(ledger, "e", T)
        assert min(window) <= average <= max(window)


def test_weighted_energy_and_u_terms_for_constant_densities() -> None:
    ledger = _constant_ledger()
    first = ledger.records[0]
    assert first.weighted_energy == pytest.approx(1.0 / 3.0, rel=1e-4)
    assert first.slices["u_ut"] == pytest.approx(0.5, rel=1e-12)
    assert first.u_mantle == pytest.approx(1.0)
    assert math.isnan(first.u_max)
    assert ledger.records[-1].u_max == 0.0

    u_section = section_series(ledger, "u_flux")
    # int_t^1 (1 - s) ds, exact for the trapezoid rule
    assert u_section[0] == pytest.approx(0.5, rel=1e-12)
    assert u_section[50] == pytest.approx(0.125, rel=1e-12)
    assert u_section[-1] == 0.0
    assert all(value == 0.0 for value in section_series(ledger, "flux"))


def test_section_series_needs_closed_cone_and_known_attribute() -> None:
    ledger = _constant_ledger(t_stop=0.5, count=51)
    assert section_series(ledger, "u_flux") == [None] * 51
    with pytest.raises(ValueError, match="Unknown accumulated attribute"):
        section_series(ledger, "energy")


def test_observer_records_max_abs_u_on_the_slice() -> None:
    grid = make_grid(1.0, 128)
    observer = DiagnosticsObserver(grid, Params(), cones=[ConeSpec(t_apex=0.5)])
    state = _moving_bump(grid)
    evolve(state, grid, Params(), RunConfig(t_end=0.5), observers=[observer])
    first = observer.ledgers[0].records[0]
    covered = grid.r - 0.5 * grid.dr < 0.5
    assert first.u_max == pytest.approx(float(np.max(np.abs(state.u[covered]))))
    assert all(not math.isnan(rec.u_max) for rec in observer.ledgers[0].records)
