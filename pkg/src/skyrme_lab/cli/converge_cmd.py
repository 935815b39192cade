# src/skyrme_lab/cli/converge_cmd.py

"""
Converge CLI: Self-convergence study of the solver over doubled resolutions.
"""

import logging
from typing import Optional

import typer

from skyrme_lab.cli.common import CONFIG_OPTION, OUT_OPTION, THREADS_OPTION, load_or_exit, output_dir
from skyrme_lab.core.config import config_hash
from skyrme_lab.core.io import write_json
from skyrme_lab.core.studies import run_convergence

logger = logging.getLogger(__name__)


def converge(
    config_path: str = CONFIG_OPTION,
    threads: int = THREADS_OPTION,
    out: Optional[str] = OUT_OPTION,
) -> None:
    """
    Run the configured resolutions and write convergence.json.

    Example:
    $ skyrme-lab converge --config lab.yaml --threads 3
    """
    config = load_or_exit(config_path)
    try:
        report = run_convergence(config, threads=threads)
        target = output_dir(config, out)
        write_json(report.payload(), str(target / "convergence.json"), config_hash=config_hash(config))
    except Exception as e:
        logger.exception("Convergence study failed.")
        typer.echo(f"❌ Convergence study failed: {e}", err=True)
        raise typer.Exit(code=1) from e

    shown = ", ".join("exact" if o is None else f"{o:.3f}" for o in report.orders)
    typer.echo(f"🔎 Solver orders: {shown}")
    if not report.passed:
        typer.secho(f"❌ Order below the floor {report.order_floor}.", fg=typer.colors.RED)
        raise typer.Exit(code=1)
    typer.secho("✅ Convergence study passed.", fg=typer.colors.GREEN)
