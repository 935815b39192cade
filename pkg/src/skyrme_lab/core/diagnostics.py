# src/skyrme_lab/core/diagnostics.py

"""
Diagnostics module: Energy and momentum densities, slice and annulus energies, the
mantle flux integrand, the functional I(z) = int_0^z |sin w| dw with the decay ratios it
controls, and the null quantity D with its bound D^2 <= C (e+m)(e-m).

All per-cell quantities are array expressions over the grid; integrals use the
midpoint rule with the measure r dr and overlap-fraction weights for partially covered
cells.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from skyrme_lab.core.dynamics import coeff_bundle, potential_bound, potential_density
from skyrme_lab.core.grid import ArrayLike, FieldState, FloatArray, RadialGrid, spatial_derivs
from skyrme_lab.core.models import ConeSpec, Params

logger = logging.getLogger(__name__)

# Flux through a backward cone's mantle uses r (e + MANTLE_SIGN * m): with the mantle
# r = t_apex - t moving inward, energy leaves the cone at rate r (e - m) >= 0.
MANTLE_SIGN = -1

# Constant in D^2 <= C_BOUND (e+m)(e-m): empirical sup 9 of D^2 / ((e+m)(e-m)) over the
# sampling box of estimate_d_bound_constant, rounded up.
C_BOUND = 10.0


@dataclass(frozen=True)
class Densities:
    e: FloatArray
    m: FloatArray
    c_ut: FloatArray
    c_ur: FloatArray
    c_sin: FloatArray
    d_ut2: FloatArray
    d_ur2: FloatArray
    d_sinur: FloatArray
    d_sinut: FloatArray
    pot: FloatArray
    u_ut: FloatArray
    u_null: FloatArray

    def get(self, name: str) -> FloatArray:
        if name not in DENSITY_NAMES:
            raise ValueError(f"Unknown density '{name}'. Choose from {', '.join(DENSITY_NAMES)}")
        value: FloatArray = getattr(self, name)
        return value


DENSITY_NAMES = tuple(f.name for f in fields(Densities))


@dataclass(frozen=True)
class AnnulusEnergy:
    value: float
    empty: bool


@dataclass(frozen=True)
class DecayReport:
    ratio_cs: float
    ratio_sqrt: float
    ratio_li: float


@dataclass(frozen=True)
class NullReport:
    D: FloatArray
    slack: FloatArray
    max_ratio: float


@dataclass(frozen=True)
class PointwiseCheck:
    min_e: float
    max_momentum_excess: float
    max_null_flux_excess: float
    max_potential_excess: float
    max_d_ratio: float
    min_d_slack: float

    def merged(self, other: Optional[PointwiseCheck]) -> PointwiseCheck:
        if other is None:
            return self
        return PointwiseCheck(
            min_e=min(self.min_e, other.min_e),
            max_momentum_excess=max(self.max_momentum_excess, other.max_momentum_excess),
            max_null_flux_excess=max(self.max_null_flux_excess, other.max_null_flux_excess),
            max_potential_excess=max(self.max_potential_excess, other.max_potential_excess),
            max_d_ratio=max(self.max_d_ratio, other.max_d_ratio),
            min_d_slack=min(self.min_d_slack, other.min_d_slack),
        )


def densities(state: FieldState, grid: RadialGrid, params: Params) -> Densities:
    """
    Energy density e, momentum density m and their components at every cell, plus the
    products u u_t and u (u_t - u_r) that enter the u_r^2 non-concentration argument.

    Args:
        state (FieldState): Field state.
        grid (RadialGrid): Grid of the state.
        params (Params): Physical parameters; the potential adds ``pot`` to e.

    Returns:
        Densities: Per-cell arrays.
    """
    ur, _ = spatial_derivs(state, grid)
    r = grid.r
    u, v = state.u, state.v
    coeffs = coeff_bundle(u, r, params)
    w = np.asarray(coeffs.w)
    beta = np.asarray(coeffs.beta)
    c_ut = 0.5 * w * v * v
    c_ur = 0.5 * w * ur * ur
    c_sin = np.sin(u) ** 2 / (2.0 * r * r)
    pot = np.asarray(potential_density(u, params), dtype=np.float64) * np.ones_like(u)
    return Densities(
        e=c_ut + c_ur + c_sin + pot,
        m=w * v * ur,
        c_ut=c_ut,
        c_ur=c_ur,
        c_sin=c_sin,
        d_ut2=v * v,
        d_ur2=ur * ur,
        d_sinur=beta * ur * ur,
        d_sinut=beta * v * v,
        pot=pot,
        u_ut=u * v,
        u_null=u * (v + MANTLE_SIGN * ur),
    )


def interval_weights(grid: RadialGrid, lo: float, hi: float) -> FloatArray:
    """Fraction of each cell covered by [lo, hi]."""
    left = grid.r - 0.5 * grid.dr
    right = grid.r + 0.5 * grid.dr
    overlap = np.clip(np.minimum(right, hi) - np.maximum(left, lo), 0.0, None)
    return np.asarray(overlap / grid.dr, dtype=np.float64)


def slice_integral(values: FloatArray, grid: RadialGrid, r_max: float, r_min: float = 0.0) -> float:
    """
    Midpoint rule for int_{r_min}^{r_max} values(r) r dr.

    Raises:
        ValueError: If the interval is not inside (0, R].
    """
    if not 0 < r_max <= grid.R * (1 + 1e-12):
        raise ValueError(f"r_max must lie in (0, R={grid.R}], got {r_max}")
    if not 0 <= r_min <= r_max:
        raise ValueError(f"r_min must lie in [0, r_max], got {r_min}")
    weights = interval_weights(grid, r_min, r_max)
    return float(np.sum(values * grid.r * weights) * grid.dr)


def slice_energy(dens: Densities, grid: RadialGrid, r_max: float) -> float:
    """Energy E = int_0^{r_max} e r dr of one time slice."""
    return slice_integral(dens.e, grid, r_max)


def annulus_energy(dens: Densities, grid: RadialGrid, cone: ConeSpec, t: float) -> AnnulusEnergy:
    """
    Energy in the annulus lambda T <= r <= T, T = t_apex - t.

    An annulus no wider than one cell is reported as empty with value 0.

    Raises:
        ValueError: If the slice lies at or beyond the apex.
    """
    T = cone.t_apex - t
    if not T > 0:
        raise ValueError(f"annulus requires t < t_apex, got t={t}, t_apex={cone.t_apex}")
    if T <= grid.dr:
        return AnnulusEnergy(0.0, True)
    return AnnulusEnergy(slice_integral(dens.e, grid, T, r_min=cone.lambda_frac * T), False)


def radial_value(values: FloatArray, grid: RadialGrid, radius: float) -> float:
    """
    ``values`` at ``radius`` by linear interpolation in r, taking 0 at r = 0.

    Beyond the last center the value is extrapolated from the last two cells.

    Raises:
        ValueError: If ``radius`` lies outside [0, R].
    """
    if not 0 <= radius <= grid.R * (1 + 1e-12):
        raise ValueError(f"mantle radius {radius} lies outside the grid [0, {grid.R}]")
    r_last = grid.r[-1]
    if radius > r_last:
        slope = (values[-1] - values[-2]) / grid.dr
        return float(values[-1] + slope * (radius - r_last))
    return float(np.interp(radius, np.concatenate([[0.0], grid.r]), np.concatenate([[0.0], values])))


def mantle_value(dens: Densities, grid: RadialGrid, radius: float) -> float:
    """Flux integrand r (e - m) at ``radius``."""
    return radial_value(grid.r * (dens.e + MANTLE_SIGN * dens.m), grid, radius)


def mantle_u_value(dens: Densities, grid: RadialGrid, radius: float) -> float:
    """Mantle integrand r u (u_t - u_r) of the u u_t identity at ``radius``."""
    return radial_value(grid.r * dens.u_null, grid, radius)


def mantle_flux_step(t1: float, g1: float, t2: float, g2: float) -> float:
    """Trapezoid increment of the mantle flux between two observations."""
    return 0.5 * (g1 + g2) * (t2 - t1)


def I_functional(z: ArrayLike) -> ArrayLike:
    """
    I(z) = int_0^z |sin w| dw, odd in z.

    On [0, pi] it equals 1 - cos z and every further half period adds 2.
    """
    z_arr = np.asarray(z, dtype=np.float64)
    z_abs = np.abs(z_arr)
    k = np.floor(z_abs / math.pi)
    rem = z_abs - k * math.pi
    value = np.sign(z_arr) * (2.0 * k + 1.0 - np.cos(rem))
    if np.ndim(value) == 0:
        return float(value)
    return np.asarray(value, dtype=np.float64)


def decay_report(state: FieldState, grid: RadialGrid, params: Params, energy: Optional[float] = None) -> DecayReport:
    """
    Ratios controlled by the a-priori decay bounds.

    ratio_cs = max alpha |I(u)| / (r sqrt(E)) is at most one up to quadrature error,
    ratio_sqrt = max |u| / sqrt(r) stays bounded, and ratio_li = max |I(u)| / (2 E) is at
    most one for any finite-energy slice.
    """
    if energy is None:
        energy = slice_energy(densities(state, grid, params), grid, grid.R)
    if energy <= 0:
        return DecayReport(0.0, 0.0, 0.0)
    r = grid.r
    i_abs = np.abs(np.asarray(I_functional(state.u)))
    return DecayReport(
        ratio_cs=float(np.max(params.alpha * i_abs / (r * math.sqrt(energy)))),
        ratio_sqrt=float(np.max(np.abs(state.u) / np.sqrt(r))),
        ratio_li=float(np.max(i_abs) / (2.0 * energy)),
    )


def null_d(u: ArrayLike, ut: ArrayLike, ur: ArrayLike, r: ArrayLike, params: Params) -> ArrayLike:
    """D = -(1 - beta)(u_t^2 - u_r^2)/2 + sin^2 u / (2 r^2) - sin(2u) u_r / r."""
    beta = params.alpha**2 * np.sin(u) ** 2 / np.square(r)
    return (
        -(1.0 - beta) * (np.square(ut) - np.square(ur)) / 2.0
        + np.sin(u) ** 2 / (2.0 * np.square(r))
        - np.sin(2.0 * np.asarray(u)) * ur / r
    )


def null_product(u: ArrayLike, ut: ArrayLike, ur: ArrayLike, r: ArrayLike, params: Params) -> ArrayLike:
    """(e + m)(e - m) without the potential, each factor summed from non-negative terms."""
    w = 1.0 + params.alpha**2 * np.sin(u) ** 2 / np.square(r)
    c_sin = np.sin(u) ** 2 / (2.0 * np.square(r))
    plus = 0.5 * w * np.square(np.asarray(ut) + ur) + c_sin
    minus = 0.5 * w * np.square(np.asarray(ut) - ur) + c_sin
    return plus * minus


def _max_ratio(D: FloatArray, product: FloatArray) -> float:
    positive = product > 0
    if not np.any(positive):
        return 0.0
    return float(np.max(D[positive] ** 2 / product[positive]))


def null_quantity_D(state: FieldState, grid: RadialGrid, params: Params) -> NullReport:
    """
    Null quantity D per cell with slack C_BOUND (e+m)(e-m) - D^2.

    D is the right-hand side of the momentum identity, so the null derivatives of
    r (e + m) and r (e - m) are +-D/2.
    """
    ur, _ = spatial_derivs(state, grid)
    D = np.asarray(null_d(state.u, state.v, ur, grid.r, params), dtype=np.float64)
    product = np.asarray(null_product(state.u, state.v, ur, grid.r, params), dtype=np.float64)
    return NullReport(D=D, slack=C_BOUND * product - D * D, max_ratio=_max_ratio(D, product))


def estimate_d_bound_constant(
    samples: int = 1_000_000, seed: int = 0, alpha: float = 1.0, chunk: int = 250_000
) -> float:
    """
    Brute-force sup of D^2 / ((e+m)(e-m)) over random pointwise states.

    Samples u in [-pi, pi], u_t and u_r in [-10, 10] and r in (0, 10].
    """
    rng = np.random.default_rng(seed)
    params = Params(alpha=alpha)
    best = 0.0
    remaining = samples
    while remaining > 0:
        n = min(chunk, remaining)
        u = rng.uniform(-math.pi, math.pi, n)
        ut = rng.uniform(-10.0, 10.0, n)
        ur = rng.uniform(-10.0, 10.0, n)
        r = 10.0 * (1.0 - rng.random(n))
        D = np.asarray(null_d(u, ut, ur, r, params))
        product = np.asarray(null_product(u, ut, ur, r, params))
        best = max(best, _max_ratio(D, product))
        remaining -= n
    logger.debug("Brute-force D-bound constant over %d samples (alpha=%g): %.6f", samples, alpha, best)
    return best


def pointwise_checks(state: FieldState, grid: RadialGrid, params: Params, dens: Densities) -> PointwiseCheck:
    """
    Pointwise inequalities on one slice.

    Excess values are positive only when an inequality fails: |m| <= e,
    |w (u_t + u_r)^2 / 2 - sin^2 u / (2 r^2)| <= e + m and pot <= sup V.
    """
    ur, _ = spatial_derivs(state, grid)
    w = np.asarray(coeff_bundle(state.u, grid.r, params).w)
    null_flux = 0.5 * w * (state.v + ur) ** 2 - dens.c_sin
    null = null_quantity_D(state, grid, params)
    return PointwiseCheck(
        min_e=float(np.min(dens.e)),
        max_momentum_excess=float(np.max(np.abs(dens.m) - dens.e)),
        max_null_flux_excess=float(np.max(np.abs(null_flux) - (dens.e + dens.m))),
        max_potential_excess=float(np.max(dens.pot) - potential_bound(params)),
        max_d_ratio=null.max_ratio,
        min_d_slack=float(np.min(null.slack)),
    )
