# src/skyrme_lab/cli/init_dump_cmd.py

"""
Init dump CLI: Write the configured initial state in the r,u,v CSV schema.
"""

import logging
from typing import Optional

import typer

from skyrme_lab.cli.common import CONFIG_OPTION, OUT_OPTION, THREADS_OPTION, load_or_exit, output_dir
from skyrme_lab.core.grid import make_grid
from skyrme_lab.core.initdata import build_initial, dump_initial_csv

logger = logging.getLogger(__name__)


def init_dump(
    config_path: str = CONFIG_OPTION,
    threads: int = THREADS_OPTION,
    out: Optional[str] = OUT_OPTION,
) -> None:
    """
    Build the initial state and write initial.csv; the file loads back unchanged as
    ``from_file`` initial data.

    Example:
    $ skyrme-lab init-dump --config lab.yaml --out data
    """
    config = load_or_exit(config_path)
    logger.debug("init-dump builds a single state; --threads=%d has no effect", threads)
    try:
        grid = make_grid(config.grid.R, config.grid.N)
        state = build_initial(config.initial, grid, config.params)
        path = output_dir(config, out) / "initial.csv"
        dump_initial_csv(state, grid, path)
    except Exception as e:
        logger.exception("Initial data dump failed.")
        typer.echo(f"❌ Initial data dump failed: {e}", err=True)
        raise typer.Exit(code=1) from e
    typer.echo(f"✅ Initial data written to {path}")
