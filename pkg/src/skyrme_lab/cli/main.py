# src/skyrme_lab/cli/main.py

import logging

import typer
from rich.logging import RichHandler

from skyrme_lab.cli import (
    concentration_cmd,
    config_cmd,
    converge_cmd,
    identity_cmd,
    init_dump_cmd,
    simulate_cmd,
)

app = typer.Typer(help="Equivariant Skyrme Lab CLI")


def setup_logging(verbose: bool = False) -> None:
    """
    Configure logging for the CLI.
    Args:
        verbose (bool): If True, set logging level to DEBUG; otherwise, INFO.
    """
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(name)s - %(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(rich_tracebacks=True, show_path=False)],
        force=True,
    )
    logging.debug("🔍 Verbose logging enabled.")


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable verbose (debug) logging")) -> None:
    """
    Equivariant Skyrme Lab CLI

    Use this CLI to evolve the 2+1 dimensional equivariant Skyrme equation and verify
    its energy, flux and multiplier identities.
    """
    setup_logging(verbose)


# Register subcommands
app.command("simulate", help="Evolve initial data with all diagnostics.")(simulate_cmd.simulate)
app.command("identity-check", help="Verify the multiplier identities.")(identity_cmd.identity_check)
app.command("converge", help="Self-convergence study of the solver.")(converge_cmd.converge)
app.command("concentration-study", help="Energy trends on shrinking cones.")(concentration_cmd.concentration_study)
app.command("init-dump", help="Write the initial state as CSV.")(init_dump_cmd.init_dump)
app.add_typer(config_cmd.app, name="config")

if __name__ == "__main__":
    app()
