# src/skyrme_lab/cli/identity_cmd.py

"""
Identity check CLI: Oracle battery for the multiplier identities on random jets and
convergence of their discrete residuals on numerical runs.
"""

import logging
from typing import Optional

import typer

from skyrme_lab.cli.common import CONFIG_OPTION, OUT_OPTION, THREADS_OPTION, load_or_exit, output_dir
from skyrme_lab.core.config import config_hash
from skyrme_lab.core.io import write_json
from skyrme_lab.core.studies import identity_payload, run_identity_check

logger = logging.getLogger(__name__)


def identity_check(
    config_path: str = CONFIG_OPTION,
    threads: int = THREADS_OPTION,
    out: Optional[str] = OUT_OPTION,
) -> None:
    """
    Verify the identities and write identity_report.json.

    Exits with code 1 when an oracle defect exceeds ``checks.oracle_threshold`` or a
    residual order falls below ``checks.order_floor``.

    Example:
    $ skyrme-lab identity-check --config lab.yaml --threads 3
    """
    config = load_or_exit(config_path)
    try:
        result = run_identity_check(config, threads=threads)
        target = output_dir(config, out)
        write_json(identity_payload(result), str(target / "identity_report.json"), config_hash=config_hash(config))
    except Exception as e:
        logger.exception("Identity check failed to run.")
        typer.echo(f"❌ Identity check failed to run: {e}", err=True)
        raise typer.Exit(code=1) from e

    oracle = result.report.oracle
    if oracle is not None:
        typer.echo(f"🔎 Max normalised oracle defect: {oracle.max_defect:.3e} (threshold {oracle.threshold:.1e})")
    for name, orders in result.report.orders.items():
        shown = ", ".join("exact" if o is None else f"{o:.3f}" for o in orders)
        typer.echo(f"🔎 {name}: residual orders {shown}")
    if not result.passed:
        typer.secho("❌ Identity check failed.", fg=typer.colors.RED)
        raise typer.Exit(code=1)
    typer.secho("✅ Identity check passed.", fg=typer.colors.GREEN)
