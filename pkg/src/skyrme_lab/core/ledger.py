# src/skyrme_lab/core/ledger.py

"""
Ledger module: Incremental bookkeeping of backward light cones during a run.

A ConeMonitor follows the cone with apex (t_apex, 0). At every observation it records
the slice energy E over r <= T (T = t_apex - t), the annulus energy over
lambda T <= r <= T, the mantle flux F accumulated since the first observation, the
slice integral of every density, the weighted energy int (r/T) e r dr and the mantle
integral of r u (u_t - u_r) that pairs with the slice integral of u u_t. Only scalars
are stored, so memory stays O(N) plus one record per observation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from skyrme_lab.core.diagnostics import (
    DENSITY_NAMES,
    MANTLE_SIGN,
    DecayReport,
    Densities,
    PointwiseCheck,
    annulus_energy,
    decay_report,
    densities,
    interval_weights,
    mantle_flux_step,
    mantle_u_value,
    mantle_value,
    pointwise_checks,
    slice_energy,
    slice_integral,
)
from skyrme_lab.core.grid import FieldState, FloatArray, RadialGrid
from skyrme_lab.core.models import ConeSpec, Params

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LedgerRecord:
    t: float
    T: float
    energy: float
    annulus: float
    annulus_empty: bool
    flux: float
    balance: float
    mantle: float
    slices: Dict[str, float]
    weighted_energy: float = 0.0
    u_mantle: float = 0.0
    u_flux: float = 0.0
    u_max: float = math.nan


@dataclass
class FluxLedger:
    cone: ConeSpec
    label: str
    mantle_sign: int = MANTLE_SIGN
    records: List[LedgerRecord] = field(default_factory=list)
    closed: bool = False

    @property
    def initial_energy(self) -> float:
        return self.records[0].energy if self.records else 0.0

    @property
    def min_flux(self) -> float:
        return min((rec.flux for rec in self.records), default=0.0)

    @property
    def max_abs_balance(self) -> float:
        return max((abs(rec.balance) for rec in self.records), default=0.0)

    def observation_interval(self) -> float:
        if len(self.records) < 2:
            raise ValueError(f"Cone '{self.label}' has fewer than two observations")
        return self.records[1].t - self.records[0].t

    def series(self, attribute: str) -> List[float]:
        return [float(getattr(rec, attribute)) for rec in self.records]


class ConeMonitor:
    """Observer-side accumulator for a single backward cone."""

    def __init__(self, cone: ConeSpec, grid: RadialGrid, label: str) -> None:
        self.cone = cone
        self.grid = grid
        self.ledger = FluxLedger(cone=cone, label=label)

    def record(self, t: float, dens: Densities, u: Optional[FloatArray] = None) -> None:
        """
        Append the record of the slice at time ``t``.

        ``u`` is only used for max |u| over the slice; without it the record carries NaN.
        """
        ledger = self.ledger
        if ledger.closed:
            return
        T = self.cone.t_apex - t
        previous = ledger.records[-1] if ledger.records else None

        if T <= 0:
            # apex reached: the slice is empty and both mantle integrands vanish at r = 0
            flux = previous.flux if previous else 0.0
            u_flux = previous.u_flux if previous else 0.0
            if previous is not None:
                flux += mantle_flux_step(previous.t, previous.mantle, self.cone.t_apex, 0.0)
                u_flux += mantle_flux_step(previous.t, previous.u_mantle, self.cone.t_apex, 0.0)
            e0 = ledger.initial_energy
            ledger.records.append(
                LedgerRecord(
                    t=self.cone.t_apex,
                    T=0.0,
                    energy=0.0,
                    annulus=0.0,
                    annulus_empty=True,
                    flux=flux,
                    balance=0.0 - e0 + flux,
                    mantle=0.0,
                    slices={name: 0.0 for name in DENSITY_NAMES},
                    u_flux=u_flux,
                    u_max=0.0,
                )
            )
            ledger.closed = True
            logger.debug("Cone '%s' closed at t=%.6g with F=%.6e", ledger.label, self.cone.t_apex, flux)
            return

        energy = slice_energy(dens, self.grid, T)
        annulus = annulus_energy(dens, self.grid, self.cone, t)
        g = mantle_value(dens, self.grid, T)
        g_u = mantle_u_value(dens, self.grid, T)
        flux = 0.0
        u_flux = 0.0
        if previous is not None:
            flux = previous.flux + mantle_flux_step(previous.t, previous.mantle, t, g)
            u_flux = previous.u_flux + mantle_flux_step(previous.t, previous.u_mantle, t, g_u)
        e0 = energy if previous is None else ledger.initial_energy
        u_max = math.nan
        if u is not None:
            covered = interval_weights(self.grid, 0.0, T) > 0
            u_max = float(np.max(np.abs(u[covered])))
        ledger.records.append(
            LedgerRecord(
                t=t,
                T=T,
                energy=energy,
                annulus=annulus.value,
                annulus_empty=annulus.empty,
                flux=flux,
                balance=energy - e0 + flux,
                mantle=g,
                slices={name: slice_integral(dens.get(name), self.grid, T) for name in DENSITY_NAMES},
                weighted_energy=slice_integral(self.grid.r * dens.e, self.grid, T) / T,
                u_mantle=g_u,
                u_flux=u_flux,
                u_max=u_max,
            )
        )


def cone_average(ledger: FluxLedger, name: str, T: float) -> float:
    """
    Space-time average (1/T) int int density r dr dt over the cone section
    t_apex - T <= t <= t_apex, r <= t_apex - t.

    The time integral is the trapezoid rule over the recorded slice integrals; a lower
    limit between two observations is interpolated linearly.

    Args:
        ledger (FluxLedger): Ledger of a run that reached the apex.
        name (str): Density name, one of ``DENSITY_NAMES``.
        T (float): Height of the cone section.

    Returns:
        float: The average.

    Raises:
        ValueError: If the apex was not reached, the name is unknown, or T is shorter than
            two observation intervals or longer than the recorded history.
    """
    if name not in DENSITY_NAMES:
        raise ValueError(f"Unknown density '{name}'. Choose from {', '.join(DENSITY_NAMES)}")
    if not ledger.closed:
        raise ValueError(f"Cone '{ledger.label}' never reached its apex t_apex={ledger.cone.t_apex}")
    delta = ledger.observation_interval()
    if T < 2.0 * delta * (1 - 1e-9):
        raise ValueError(f"T={T} is shorter than two observation intervals ({2 * delta})")
    t_apex = ledger.cone.t_apex
    t_lo = t_apex - T
    times = np.array([rec.t for rec in ledger.records], dtype=np.float64)
    values = np.array([rec.slices[name] for rec in ledger.records], dtype=np.float64)
    if t_lo < times[0] - 1e-12 * max(1.0, t_apex):
        raise ValueError(f"T={T} reaches before the first observation at t={times[0]}")

    inside = times > t_lo
    t_pts = np.concatenate([[t_lo], times[inside]])
    v_pts = np.concatenate([[np.interp(t_lo, times, values)], values[inside]])
    integral = float(np.sum(0.5 * (v_pts[1:] + v_pts[:-1]) * np.diff(t_pts)))
    return integral / T


def cone_average_series(ledger: FluxLedger, name: str) -> List[Optional[float]]:
    """cone_average at the T of every record, None where it is undefined."""
    if not ledger.closed or len(ledger.records) < 2:
        return [None] * len(ledger.records)
    delta = ledger.observation_interval()
    out: List[Optional[float]] = []
    for rec in ledger.records:
        out.append(cone_average(ledger, name, rec.T) if rec.T >= 2.0 * delta * (1 - 1e-9) else None)
    return out


def section_series(ledger: FluxLedger, attribute: str) -> List[Optional[float]]:
    """
    Mantle integral from each record's time up to the apex, for the accumulated
    attributes ``flux`` and ``u_flux``; None throughout while the cone is open.
    """
    if attribute not in ("flux", "u_flux"):
        raise ValueError(f"Unknown accumulated attribute '{attribute}'")
    if not ledger.closed:
        return [None] * len(ledger.records)
    total = float(getattr(ledger.records[-1], attribute))
    return [total - float(getattr(rec, attribute)) for rec in ledger.records]


def is_non_increasing(values: Sequence[Optional[float]], tolerance: float) -> bool:
    """True when no value exceeds any earlier one by more than ``tolerance``."""
    finite = [v for v in values if v is not None]
    running_min = np.inf
    for v in finite:
        if v > running_min + tolerance:
            return False
        running_min = min(running_min, v)
    return True


@dataclass(frozen=True)
class ObservationRow:
    t: float
    step: int
    energy: float
    decay: DecayReport
    check: PointwiseCheck


class DiagnosticsObserver:
    """
    Computes densities once per observation and feeds the cone monitors, the pointwise
    checks and the decay ratios.
    """

    def __init__(self, grid: RadialGrid, params: Params, cones: Sequence[ConeSpec] = (), labels: Sequence[str] = ()):
        if labels and len(labels) != len(cones):
            raise ValueError("labels must match the cones one to one")
        self.grid = grid
        self.params = params
        names = list(labels) or [f"cone_{i + 1}" for i in range(len(cones))]
        self.monitors = [ConeMonitor(cone, grid, name) for cone, name in zip(cones, names)]
        self.rows: List[ObservationRow] = []
        self.check: Optional[PointwiseCheck] = None

    def __call__(self, state: FieldState, step: int) -> None:
        dens = densities(state, self.grid, self.params)
        energy = slice_energy(dens, self.grid, self.grid.R)
        decay = decay_report(state, self.grid, self.params, energy=energy)
        check = pointwise_checks(state, self.grid, self.params, dens)
        self.check = check.merged(self.check)
        self.rows.append(ObservationRow(t=state.t, step=step, energy=energy, decay=decay, check=check))
        for monitor in self.monitors:
            monitor.record(state.t, dens, state.u)

    @property
    def ledgers(self) -> List[FluxLedger]:
        return [monitor.ledger for monitor in self.monitors]
