# src/skyrme_lab/cli/config_cmd.py

"""
Config CLI: Create and validate experiment config files.
"""

import logging

import typer

from skyrme_lab.core.config import config_hash, dump_config, init_config, load_config

logger = logging.getLogger(__name__)
app = typer.Typer(help="Manage experiment config files.")


@app.command("init", help="Generate a commented config template.")
def init(
    output_path: str = typer.Option(
        ..., "--output", "-o", prompt="Enter output path for the config", help="Path to save the config"
    ),
) -> None:
    """
    Initialize a config file at the specified path.

    Example:
    $ skyrme-lab config init --output lab.yaml

    Raises:
        typer.Exit: Exits with code 1 if the file already exists or an error occurs.
    """
    try:
        init_config(output_path)
        typer.secho(f"✅ Config template created at: {output_path}", fg=typer.colors.GREEN)
    except FileExistsError as e:
        typer.secho(f"❌ {e}", fg=typer.colors.RED)
        raise typer.Exit(code=1) from e
    except Exception as e:
        logger.exception("Unexpected error during config init.")
        typer.secho(f"❌ Unexpected error: {e}", fg=typer.colors.RED)
        raise typer.Exit(code=1) from e


@app.command("validate", help="Validate a config file and print the normalised form.")
def validate(
    path: str = typer.Option(..., "--path", "-p", help="Path to the config file"),
) -> None:
    """
    Validate a config file.

    Loads the file, validates it, and prints the normalised YAML with every default
    filled in, followed by the config hash.

    Example:
    $ skyrme-lab config validate --path lab.yaml

    Raises:
        typer.Exit: Exits with code 1 if validation fails.
    """
    logger.info("📂 Loading config file from: %s", path)
    try:
        config = load_config(path)
    except Exception as e:
        logger.exception("❌ Config validation failed.")
        typer.echo(f"❌ Validation error: {e}", err=True)
        raise typer.Exit(code=1) from e
    typer.echo("✅ Config validation successful:")
    typer.echo(dump_config(config))
    typer.echo(f"config_hash: {config_hash(config)}")
