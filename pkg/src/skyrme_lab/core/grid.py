# src/skyrme_lab/core/grid.py

"""
Grid module: Staggered radial grids, field states, pointwise jets and discrete
spatial derivatives.

Cell centers sit at r_j = (j + 1/2) dr, so r = 0 is never a sample point and every
sin^2(u)/r^2 weight is finite. The boundary condition u(t, 0) = 0 is carried by the
odd extension u(-r) = -u(r) into the two ghost cells left of the origin; the two ghost
cells right of R hold frozen Dirichlet values.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np
import numpy.typing as npt

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
ArrayLike = Union[float, FloatArray]

GHOSTS = 2
MIN_CELLS = 8


@dataclass(frozen=True)
class RadialGrid:
    R: float
    N: int

    @property
    def dr(self) -> float:
        return self.R / self.N

    @property
    def r(self) -> FloatArray:
        return (np.arange(self.N, dtype=np.float64) + 0.5) * self.dr

    @property
    def ghost_r(self) -> FloatArray:
        """Centers of the two outer ghost cells, j = N and j = N + 1."""
        return (np.arange(self.N, self.N + GHOSTS, dtype=np.float64) + 0.5) * self.dr


def make_grid(R: float, N: int) -> RadialGrid:
    """
    Build a staggered cell-centered grid on [0, R].

    Args:
        R (float): Outer radius, must be positive.
        N (int): Number of cells, at least 8.

    Returns:
        RadialGrid: Grid with dr = R / N and centers (j + 1/2) dr.

    Raises:
        ValueError: If the grid would be degenerate.
    """
    if not R > 0:
        raise ValueError(f"Outer radius must be positive, got R={R}")
    if N < MIN_CELLS:
        raise ValueError(f"Grid needs at least {MIN_CELLS} cells, got N={N}")
    return RadialGrid(R=float(R), N=int(N))


def extrapolate_outer(u: FloatArray) -> FloatArray:
    """Cubic extrapolation of the last four cells into the two outer ghost cells."""
    tail = np.asarray(u[-4:], dtype=np.float64)
    coeffs = np.polynomial.polynomial.polyfit(np.arange(4.0), tail, 3)
    return np.asarray(np.polynomial.polynomial.polyval(np.array([4.0, 5.0]), coeffs), dtype=np.float64)


@dataclass
class FieldState:
    """Field u and velocity v = u_t at the cell centers, at time t."""

    t: float
    u: FloatArray
    v: FloatArray
    outer: Optional[FloatArray] = field(default=None)

    def __post_init__(self) -> None:
        self.u = np.asarray(self.u, dtype=np.float64)
        self.v = np.asarray(self.v, dtype=np.float64)
        if self.u.ndim != 1 or self.u.shape != self.v.shape:
            raise ValueError(f"u and v must be 1-D arrays of equal length, got {self.u.shape} and {self.v.shape}")
        if self.u.size < MIN_CELLS:
            raise ValueError(f"State needs at least {MIN_CELLS} cells, got {self.u.size}")
        if self.outer is None:
            self.outer = extrapolate_outer(self.u)
        else:
            self.outer = np.asarray(self.outer, dtype=np.float64)
            if self.outer.shape != (GHOSTS,):
                raise ValueError(f"outer ghost values must have shape ({GHOSTS},), got {self.outer.shape}")

    @property
    def outer_values(self) -> FloatArray:
        assert self.outer is not None
        return self.outer

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v)))

    def replace(self, t: float, u: FloatArray, v: FloatArray) -> FieldState:
        """New state on the same grid, carrying over the frozen outer values."""
        return FieldState(t=t, u=u, v=v, outer=self.outer_values)

    def snapshot(self) -> FieldState:
        """Read-only copy for observers."""
        u = self.u.copy()
        v = self.v.copy()
        outer = self.outer_values.copy()
        for arr in (u, v, outer):
            arr.flags.writeable = False
        return FieldState(t=self.t, u=u, v=v, outer=outer)


@dataclass(frozen=True)
class Jet:
    """
    Second-order jet of u at (t, r).

    Every field may be a float or an array of a common shape, so a batch of jets is a
    single Jet holding arrays.
    """

    t: ArrayLike
    r: ArrayLike
    u: ArrayLike
    ut: ArrayLike
    ur: ArrayLike
    utt: ArrayLike
    utr: ArrayLike
    urr: ArrayLike

    def __post_init__(self) -> None:
        if np.any(np.asarray(self.r) <= 0):
            raise ValueError("Jet radius must be strictly positive")


def extend_with_ghosts(state: FieldState) -> FloatArray:
    """
    Return u on cells j = -2 .. N + 1.

    Left ghosts use the corotational parity u_{-1-k} = -u_k; right ghosts are the frozen
    Dirichlet values stored with the state.
    """
    u = state.u
    left = -u[GHOSTS - 1 :: -1]
    return np.concatenate([left, u, state.outer_values])


def spatial_derivs(state: FieldState, grid: RadialGrid) -> Tuple[FloatArray, FloatArray]:
    """
    Second-order centered approximations of u_r and u_rr at every cell center.

    Args:
        state (FieldState): Field state on ``grid``.
        grid (RadialGrid): The grid the state lives on.

    Returns:
        Tuple[FloatArray, FloatArray]: Freshly allocated (ur, urr).
    """
    if state.u.size != grid.N:
        raise ValueError(f"State has {state.u.size} cells but the grid has N={grid.N}")
    ext = extend_with_ghosts(state)
    dr = grid.dr
    lo = ext[GHOSTS - 1 : GHOSTS - 1 + grid.N]
    mid = ext[GHOSTS : GHOSTS + grid.N]
    hi = ext[GHOSTS + 1 : GHOSTS + 1 + grid.N]
    ur = (hi - lo) / (2.0 * dr)
    urr = (hi - 2.0 * mid + lo) / (dr * dr)
    return ur, urr
