# src/skyrme_lab/core/initdata.py

"""
Initial data module: Builds field states from profile families or CSV files.

Every built-in family vanishes at r = 0 and grows at most linearly there, so the
sin^2(u)/r^2 part of the energy density stays bounded at the innermost cell for every
resolution.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from skyrme_lab.core.enums import ProfileFamily, VelocityFamily
from skyrme_lab.core.grid import FieldState, FloatArray, RadialGrid
from skyrme_lab.core.io import read_table, write_csv
from skyrme_lab.core.models import InitialDataSpec, Params, ProfileSpec, VelocitySpec

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["r", "u", "v"]
RADIUS_TOLERANCE = 1e-9


def _family_values(family: str, amplitude: float, scale: float, r: FloatArray) -> FloatArray:
    if family == "arctan":
        return np.asarray(amplitude * 2.0 * np.arctan(r / scale), dtype=np.float64)
    if family == "bump":
        return np.asarray(amplitude * r * np.exp(-np.square(r / scale)), dtype=np.float64)
    if family == "zero":
        return np.zeros_like(r, dtype=np.float64)
    raise ValueError(f"Unsupported profile family: {family}")


def profile_values(spec: Union[ProfileSpec, VelocitySpec], r: FloatArray) -> FloatArray:
    """
    Evaluate an analytic profile family at the radii ``r``.

    Args:
        spec (ProfileSpec | VelocitySpec): Family with amplitude A and scale s.
        r (FloatArray): Radii.

    Returns:
        FloatArray: Arctan A * 2 arctan(r/s), Bump A * r * exp(-(r/s)^2), or zeros.
    """
    return _family_values(spec.family.value, spec.amplitude, spec.scale, np.asarray(r, dtype=np.float64))


def build_initial(initial: InitialDataSpec, grid: RadialGrid, params: Params) -> FieldState:
    """
    Sample the initial data at the cell centers of ``grid``.

    The outer ghost values come from the profile itself; they stay frozen for the whole
    run.

    Raises:
        ValueError: If file data does not match the grid or is not finite.
    """
    profile = initial.profile
    if profile.family is ProfileFamily.from_file:
        assert profile.path is not None
        return load_initial_csv(profile.path, grid)

    u0 = profile_values(profile, grid.r)
    outer = profile_values(profile, grid.ghost_r)
    if initial.velocity.family is VelocityFamily.zero:
        v0 = np.zeros_like(u0)
    else:
        v0 = profile_values(initial.velocity, grid.r)
    logger.debug(
        "Built %s profile (A=%g, s=%g) on N=%d, alpha=%g", profile.family.value, profile.amplitude, profile.scale,
        grid.N, params.alpha,
    )
    state = FieldState(t=0.0, u=u0, v=v0, outer=outer)
    if not state.is_finite():
        raise ValueError("Initial data is not finite")
    return state


def load_initial_csv(path: Union[str, Path], grid: RadialGrid) -> FieldState:
    """
    Load an initial state from a CSV file with header ``r,u,v``.

    Args:
        path (str | Path): CSV file, one row per cell in increasing r.
        grid (RadialGrid): Grid the rows must match.

    Returns:
        FieldState: State at t = 0; outer ghosts extrapolated from the last cells.

    Raises:
        FileNotFoundError: If the file does not exist.
        ValueError: On missing columns, wrong row count, mismatched radii,
            unparsable or non-finite values.
    """
    file_path = Path(path)
    if not file_path.exists():
        raise FileNotFoundError(f"Initial data file not found at: {file_path.resolve()}")

    df = read_table(str(file_path))
    missing = [c for c in CSV_COLUMNS if c not in df.columns]
    if missing:
        raise ValueError(f"Initial data file {file_path} is missing columns: {missing}")
    if len(df) != grid.N:
        raise ValueError(f"Initial data file {file_path} has {len(df)} rows, grid expects N={grid.N}")

    try:
        values = df[CSV_COLUMNS].apply(pd.to_numeric, errors="raise").to_numpy(dtype=np.float64)
    except (ValueError, TypeError) as e:
        raise ValueError(f"Initial data file {file_path} contains unparsable values: {e}") from e

    if not np.all(np.isfinite(values)):
        raise ValueError(f"Initial data file {file_path} contains non-finite values")
    r, u, v = values[:, 0], values[:, 1], values[:, 2]
    offset = float(np.max(np.abs(r - grid.r)))
    if offset > RADIUS_TOLERANCE * grid.dr:
        raise ValueError(f"Radii in {file_path} do not match the grid centers (max offset {offset:.3e})")

    logger.info("Loaded initial data from %s (%d cells)", file_path, grid.N)
    return FieldState(t=0.0, u=u, v=v)


def dump_initial_csv(state: FieldState, grid: RadialGrid, path: Union[str, Path]) -> None:
    """Write ``state`` in the ``r,u,v`` schema with round-trip exact floats."""
    df = pd.DataFrame({"r": grid.r, "u": state.u, "v": state.v})
    write_csv(df, str(path))
    logger.info("Initial data written to %s", path)
