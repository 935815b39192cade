# src/skyrme_lab/core/io.py

"""
IO module: CSV tables and JSON reports. Floats are written with 17 significant digits
so every value reads back bit for bit.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
SCHEMA_VERSION = 1


def read_table(path: str, encoding: str = "utf-8") -> pd.DataFrame:
    """
    Read a CSV table with round-trip exact floats.

    Raises:
        ValueError: If the file cannot be decoded or parsed as CSV.
    """
    try:
        return pd.read_csv(Path(path), encoding=encoding, float_precision="round_trip")
    except (UnicodeDecodeError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise ValueError(f"Failed to read table {path}: {exc}") from exc


def write_csv(df: pd.DataFrame, path: str) -> None:
    output_path = Path(path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(output_path, index=False, float_format=FLOAT_FORMAT)


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not np.isfinite(value):
        # JSON has no inf/nan
        return None
    return value


def write_json(payload: Dict[str, Any], path: str, config_hash: Optional[str] = None) -> None:
    output_path = Path(path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    document: Dict[str, Any] = {"schema_version": SCHEMA_VERSION}
    if config_hash is not None:
        document["config_hash"] = config_hash
    document.update(payload)
    output_path.write_text(json.dumps(_jsonable(document), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    logger.debug("JSON report written to %s", output_path)
