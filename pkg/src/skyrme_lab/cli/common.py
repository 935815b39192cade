# src/skyrme_lab/cli/common.py

"""
Shared helpers for the experiment commands: the common options, config loading with
CLI error reporting, and the output directory.
"""

import logging
from pathlib import Path
from typing import Optional

import typer

from skyrme_lab.core.config import config_hash, load_config
from skyrme_lab.core.models import LabConfig

logger = logging.getLogger(__name__)

CONFIG_OPTION = typer.Option(..., "--config", "-c", help="Path to the experiment config (YAML)")
THREADS_OPTION = typer.Option(1, "--threads", "-j", min=1, help="Worker threads for independent runs")
OUT_OPTION = typer.Option(None, "--out", "-o", help="Output directory (overrides output.directory)")


def load_or_exit(path: str) -> LabConfig:
    """Load the config or exit with code 1 naming the problem."""
    try:
        config = load_config(path)
    except (FileNotFoundError, ValueError) as e:
        logger.error("Config error: %s", e)
        typer.echo(f"❌ Config error: {e}", err=True)
        raise typer.Exit(code=1) from e
    logger.info("Loaded config %s (hash %s)", path, config_hash(config)[:12])
    return config


def output_dir(config: LabConfig, out: Optional[str]) -> Path:
    path = Path(out if out is not None else config.output.directory)
    path.mkdir(parents=True, exist_ok=True)
    return path
