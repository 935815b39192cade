# src/skyrme_lab/cli/concentration_cmd.py

"""
Concentration study CLI: Energy, annulus energy, cone-averaged densities and the u u_t
boundary terms versus the time to the apex for every configured cone.
"""

import logging
from typing import Optional

import typer

from skyrme_lab.cli.common import CONFIG_OPTION, OUT_OPTION, THREADS_OPTION, load_or_exit, output_dir
from skyrme_lab.core.config import config_hash
from skyrme_lab.core.io import write_csv, write_json
from skyrme_lab.core.studies import concentration_frame, concentration_payload, run_concentration_study

logger = logging.getLogger(__name__)


def concentration_study(
    config_path: str = CONFIG_OPTION,
    threads: int = THREADS_OPTION,
    out: Optional[str] = OUT_OPTION,
) -> None:
    """
    Write concentration.csv and concentration.json.

    The JSON flags, per cone and series, whether the series is non-increasing toward
    the apex within ``checks.monotone_tolerance`` times the initial energy, and whether
    the potential average and the u u_t boundary terms stay below their bounds.

    Example:
    $ skyrme-lab concentration-study --config lab.yaml
    """
    config = load_or_exit(config_path)
    try:
        result = run_concentration_study(config, threads=threads)
        target = output_dir(config, out)
        digest = config_hash(config)
        if config.output.write_csv:
            write_csv(concentration_frame(result), str(target / "concentration.csv"))
        if config.output.write_json:
            write_json(concentration_payload(result), str(target / "concentration.json"), config_hash=digest)
    except Exception as e:
        logger.exception("Concentration study failed.")
        typer.echo(f"❌ Concentration study failed: {e}", err=True)
        raise typer.Exit(code=1) from e

    for label, flags in result.flags.items():
        failing = [name for name, ok in flags.items() if not ok]
        if failing:
            typer.secho(f"⚠️ {label}: failed toward the apex: {', '.join(failing)}", fg=typer.colors.YELLOW)
        else:
            typer.secho(f"✅ {label}: every series non-increasing and bounded toward the apex", fg=typer.colors.GREEN)
