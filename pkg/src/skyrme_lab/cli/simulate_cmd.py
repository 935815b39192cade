# src/skyrme_lab/cli/simulate_cmd.py

"""
Simulate CLI: Evolve the configured initial data with all diagnostics attached and
write the time series and the run summary.
"""

import logging
from typing import Optional

import typer

from skyrme_lab.cli.common import CONFIG_OPTION, OUT_OPTION, THREADS_OPTION, load_or_exit, output_dir
from skyrme_lab.core.config import config_hash
from skyrme_lab.core.enums import RunStatus
from skyrme_lab.core.io import write_csv, write_json
from skyrme_lab.core.studies import run_simulation, simulation_payload, timeseries_frame

logger = logging.getLogger(__name__)


def simulate(
    config_path: str = CONFIG_OPTION,
    threads: int = THREADS_OPTION,
    out: Optional[str] = OUT_OPTION,
) -> None:
    """
    Run one simulation and write timeseries.csv and summary.json.

    A suspected blow-up stops the run but still exits with code 0; the status is
    recorded in the summary. Non-finite runs exit with code 1.

    Example:
    $ skyrme-lab simulate --config lab.yaml --out runs/arctan
    """
    config = load_or_exit(config_path)
    try:
        result = run_simulation(config, threads=threads)
        target = output_dir(config, out)
        digest = config_hash(config)
        if config.output.write_csv:
            write_csv(timeseries_frame(result), str(target / "timeseries.csv"))
        if config.output.write_json:
            write_json(simulation_payload(result), str(target / "summary.json"), config_hash=digest)
    except Exception as e:
        logger.exception("Simulation failed.")
        typer.echo(f"❌ Simulation failed: {e}", err=True)
        raise typer.Exit(code=1) from e

    status = result.summary.status
    if status is RunStatus.non_finite:
        typer.secho(f"❌ Run produced non-finite values at t={result.summary.t_final:.6g}", fg=typer.colors.RED)
        raise typer.Exit(code=1)
    if status is RunStatus.blowup_suspected:
        typer.secho(
            f"⚠️ Blow-up suspected at t={result.summary.t_final:.6g} near r={result.summary.blowup_radius}",
            fg=typer.colors.YELLOW,
        )
    else:
        typer.secho(
            f"✅ Run completed: t={result.summary.t_final:.6g}, energy drift {result.energy_drift:.3e}",
            fg=typer.colors.GREEN,
        )
    typer.echo(f"📁 Outputs written to {target}")
