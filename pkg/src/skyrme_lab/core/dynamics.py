# src/skyrme_lab/core/dynamics.py

"""
Dynamics module: The equivariant Skyrme equation in residual form and in explicit
semilinear form u_tt = RHS.

The residual of the main equation is

    w (u_tt - u_rr) - (1 - beta) u_r / r + sin(2u) / (2 r^2) [alpha^2 (u_t^2 - u_r^2) + 1] + V'(u),

with beta = alpha^2 sin^2(u) / r^2 and w = 1 + beta >= 1. Since w never degenerates the
equation can always be divided by it, which gives the semilinear form used by the
time integrator.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from skyrme_lab.core.enums import Potential
from skyrme_lab.core.grid import ArrayLike, FieldState, FloatArray, Jet, RadialGrid, spatial_derivs
from skyrme_lab.core.models import Params

logger = logging.getLogger(__name__)


class NonFiniteStateError(FloatingPointError):
    """Raised when the right-hand side produces inf or nan values."""


@dataclass(frozen=True)
class CoeffBundle:
    w: ArrayLike
    beta: ArrayLike


def coeff_bundle(u: ArrayLike, r: ArrayLike, params: Params) -> CoeffBundle:
    beta = params.alpha**2 * np.sin(u) ** 2 / np.square(r)
    return CoeffBundle(w=1.0 + beta, beta=beta)


def coeff_w(u: ArrayLike, r: ArrayLike, params: Params) -> ArrayLike:
    """
    Leading coefficient w = 1 + alpha^2 sin^2(u) / r^2.

    Raises:
        ValueError: If any radius is not strictly positive.
    """
    if np.any(np.asarray(r) <= 0):
        raise ValueError("coeff_w requires r > 0")
    return coeff_bundle(u, r, params).w


def potential_density(u: ArrayLike, params: Params) -> ArrayLike:
    lam2 = params.effective_lambda**2
    if params.potential is Potential.v1:
        return lam2 * (1.0 - np.cos(u))
    if params.potential is Potential.v2:
        return lam2 * (1.0 - np.cos(u)) ** 2
    return np.zeros_like(np.asarray(u, dtype=np.float64))


def potential_force(u: ArrayLike, params: Params) -> ArrayLike:
    """Derivative dV/du of the potential density."""
    lam2 = params.effective_lambda**2
    if params.potential is Potential.v1:
        return lam2 * np.sin(u)
    if params.potential is Potential.v2:
        return 2.0 * lam2 * (1.0 - np.cos(u)) * np.sin(u)
    return np.zeros_like(np.asarray(u, dtype=np.float64))


def potential_bound(params: Params) -> float:
    """Supremum of the potential density over u."""
    lam2 = params.effective_lambda**2
    if params.potential is Potential.v1:
        return 2.0 * lam2
    if params.potential is Potential.v2:
        return 4.0 * lam2
    return 0.0


def pde_residual(jet: Jet, params: Params) -> ArrayLike:
    """
    Evaluate the main equation on a jet. Vanishes exactly on classical solutions.

    Args:
        jet (Jet): Pointwise derivatives of a test field, r > 0.
        params (Params): Physical parameters.

    Returns:
        float | ndarray: The residual, shaped like the jet fields.
    """
    r = jet.r
    coeffs = coeff_bundle(jet.u, r, params)
    a2 = params.alpha**2
    return (
        coeffs.w * (jet.utt - jet.urr)
        - (1.0 - coeffs.beta) * jet.ur / r
        + np.sin(2.0 * np.asarray(jet.u)) / (2.0 * np.square(r)) * (a2 * (np.square(jet.ut) - np.square(jet.ur)) + 1.0)
        + potential_force(jet.u, params)
    )


def accel_from_derivs(
    u: FloatArray, v: FloatArray, ur: FloatArray, urr: FloatArray, r: FloatArray, params: Params
) -> FloatArray:
    coeffs = coeff_bundle(u, r, params)
    w = coeffs.w
    a2 = params.alpha**2
    return np.asarray(
        urr
        + (1.0 - coeffs.beta) / w * ur / r
        - np.sin(2.0 * u) / (2.0 * r * r * w) * (a2 * (v * v - ur * ur) + 1.0)
        - potential_force(u, params) / w
    )


def semilinear_accel(state: FieldState, grid: RadialGrid, params: Params) -> FloatArray:
    """
    Acceleration u_tt at every cell from the semilinear form of the equation.

    The sweep is a pure array expression over cells; every output cell depends only on
    the read-only input snapshot.

    Raises:
        NonFiniteStateError: If the result contains inf or nan.
    """
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        ur, urr = spatial_derivs(state, grid)
        acc = accel_from_derivs(state.u, state.v, ur, urr, grid.r, params)
    if not np.all(np.isfinite(acc)):
        bad = int(np.argmax(~np.isfinite(acc)))
        logger.debug("Non-finite acceleration at cell %d (r=%.6g), t=%.6g", bad, grid.r[bad], state.t)
        raise NonFiniteStateError(f"non-finite acceleration at t={state.t:.6g}, r={grid.r[bad]:.6g}")
    return acc
