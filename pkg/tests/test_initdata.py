# tests/test_initdata.py

import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from skyrme_lab.core.enums import ProfileFamily, VelocityFamily
from skyrme_lab.core.grid import make_grid
from skyrme_lab.core.initdata import build_initial, dump_initial_csv, load_initial_csv, profile_values
from skyrme_lab.core.models import InitialDataSpec, Params, ProfileSpec, VelocitySpec


def test_arctan_matches_closed_form() -> None:
    grid = make_grid(1.0, 64)
    spec = InitialDataSpec(profile=ProfileSpec(family=ProfileFamily.arctan, amplitude=1.0, scale=0.5))
    state = build_initial(spec, grid, Params())
    assert np.allclose(state.u, 2.0 * np.arctan(grid.r / 0.5), rtol=0, atol=1e-15)
    assert np.all(state.v == 0.0)
    assert state.outer_values == pytest.approx(2.0 * np.arctan(grid.ghost_r / 0.5))


@pytest.mark.parametrize("family", [ProfileFamily.arctan, ProfileFamily.bump, ProfileFamily.zero])
def test_families_vanish_at_origin(family: ProfileFamily) -> None:
    values = profile_values(ProfileSpec(family=family, amplitude=2.0, scale=0.3), np.array([0.0, 1e-8]))
    assert values[0] == 0.0
    assert abs(values[1]) < 1e-6


def test_velocity_family() -> None:
    grid = make_grid(1.0, 32)
    spec = InitialDataSpec(
        profile=ProfileSpec(family=ProfileFamily.zero),
        velocity=VelocitySpec(family=VelocityFamily.bump, amplitude=0.5, scale=0.2),
    )
    state = build_initial(spec, grid, Params())
    assert np.all(state.u == 0.0)
    assert np.allclose(state.v, 0.5 * grid.r * np.exp(-((grid.r / 0.2) ** 2)))


def test_csv_round_trip_is_exact() -> None:
    grid = make_grid(1.0, 50)
    spec = InitialDataSpec(
        profile=ProfileSpec(family=ProfileFamily.arctan, amplitude=0.7, scale=0.3),
        velocity=VelocitySpec(family=VelocityFamily.arctan, amplitude=0.1, scale=0.4),
    )
    state = build_initial(spec, grid, Params())
    with tempfile.TemporaryDirectory() as tmpdir:
        first = Path(tmpdir) / "first.csv"
        second = Path(tmpdir) / "second.csv"
        dump_initial_csv(state, grid, first)
        loaded = load_initial_csv(first, grid)
        dump_initial_csv(loaded, grid, second)

        assert np.array_equal(loaded.u, state.u)
        assert np.array_equal(loaded.v, state.v)
        assert first.read_bytes() == second.read_bytes()


def test_from_file_spec_loads_csv() -> None:
    grid = make_grid(1.0, 16)
    with tempfile.TemporaryDirectory() as tmpdir:
        path = Path(tmpdir) / "init.csv"
        pd.DataFrame({"r": grid.r, "u": np.sin(grid.r), "v": np.zeros(16)}).to_csv(path, index=False)
        spec = InitialDataSpec(profile=ProfileSpec(family=ProfileFamily.from_file, path=str(path)))
        state = build_initial(spec, grid, Params())
    assert np.allclose(state.u, np.sin(grid.r))


def test_from_file_requires_path() -> None:
    with pytest.raises(ValueError):
        ProfileSpec(family=ProfileFamily.from_file)


def test_load_missing_file() -> None:
    with pytest.raises(FileNotFoundError):
        load_initial_csv("does/not/exist.csv", make_grid(1.0, 16))


def _write(tmpdir: str, text: str) -> Path:
    path = Path(tmpdir) / "bad.csv"
    path.write_text(text, encoding="utf-8")
    return path


def test_load_rejects_bad_files() -> None:
    grid = make_grid(1.0, 8)
    rows = "\n".join(f"{float(r)!r},0.0,0.0" for r in grid.r)
    with tempfile.TemporaryDirectory() as tmpdir:
        with pytest.raises(ValueError, match="missing columns"):
            load_initial_csv(_write(tmpdir, "r,u\n0.1,0.0\n"), grid)
        with pytest.raises(ValueError, match="rows"):
            load_initial_csv(_write(tmpdir, "r,u,v\n" + rows.split("\n")[0] + "\n"), grid)
        shifted = "\n".join(f"{float(r) + 0.01!r},0.0,0.0" for r in grid.r)
        with pytest.raises(ValueError, match="do not match"):
            load_initial_csv(_write(tmpdir, "r,u,v\n" + shifted + "\n"), grid)
        with_inf = rows.replace(",0.0,0.0", ",inf,0.0", 1)
        with pytest.raises(ValueError, match="non-finite"):
            load_initial_csv(_write(tmpdir, "r,u,v\n" + with_inf + "\n"), grid)
        with_text = rows.replace(",0.0,0.0", ",abc,0.0", 1)
        with pytest.raises(ValueError, match="unparsable"):
            load_initial_csv(_write(tmpdir, "r,u,v\n" + with_text + "\n"), grid)
