import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict

import yaml  # type: ignore
from pydantic import ValidationError

from skyrme_lab.core.models import LabConfig

logger = logging.getLogger(__name__)


def init_config(output_path: str) -> None:
    """
    Create a lab.yaml template with comments and valid example values.

    Args:
        output_path (str): Path where the config file should be created.

    Raises:
        FileExistsError: If the file already exists.
        OSError: If writing fails.
    """
    path = Path(output_path).resolve()

    if path.exists():
        raise FileExistsError(f"Config already exists at: {path}")
    path.parent.mkdir(parents=True, exist_ok=True)

    template = """\
# -----------------------------------------------------------------------------
# skyrme-lab: experiment configuration template
#
# One file describes one reproducible experiment. Every output written by the
# commands carries the SHA-256 hash of the validated configuration.
#
# INSTRUCTIONS:
# - Sections may be omitted; omitted fields take the defaults shown here.
# - Some fields accept only predefined values. See 'Allowed:' comments below.
# -----------------------------------------------------------------------------

grid:
  R: 1.0        # outer radius of the computational domain
  N: 256        # number of cells, at least 8

params:
  alpha: 1.0           # Skyrme length, > 0
  potential: none      # Allowed: none, v1, v2
  lambda_pot: 0.0      # potential strength, ignored when potential is none

run:
  t_end: 0.5
  cfl: 0.5                       # dt = cfl * dr, in (0, 1]
  observe_every: 1               # diagnostics every n steps
  blowup_grad_threshold: 1.0e6   # |u_r| above this flags a suspected singularity
  blowup_value_threshold: 1.0e3  # |u_t| above this flags a suspected singularity

initial:
  profile:
    family: arctan     # Allowed: arctan, bump, zero, from_file
    amplitude: 1.0
    scale: 0.5
    # path: initial.csv  # required for from_file; header r,u,v
  velocity:
    family: zero       # Allowed: zero, arctan, bump
    amplitude: 0.0
    scale: 0.5

cones:  # backward cones with apex (t_apex, 0); t_apex must not exceed R
  - t_apex: 0.4
    lambda_frac: 0.5   # annulus lambda * T <= r <= T, in (0, 1)

output:
  directory: out
  write_csv: true
  write_json: true

checks:
  energy_drift_tolerance: 1.0e-5
  monotone_tolerance: 1.0e-3   # relative to the initial energy
  domain_margin: 0.05          # the energy-drift cone stops this fraction short of R
  oracle_threshold: 1.0e-10
  oracle_samples: 10000
  oracle_alphas: [0.5, 1.0, 2.0]
  random_multipliers: 64
  presets: [energy, momentum, dilation_t, radial_r, sine]
  discrete_presets: [dilation_t, radial_r, sine]
  resolutions: [256, 512, 1024]
  order_floor: 1.7
  order_ceiling: 2.3
  d_bound_samples: 1000000
  seed: 20100
  # reversal_time: 0.25        # optional time-reversal check in simulate
"""

    try:
        path.write_text(template, encoding="utf-8")
        logger.info("Commented config template created at: %s", path)
    except Exception as e:
        logger.exception("Failed to write config template: %s", e)
        raise


def load_config(input_path: str) -> LabConfig:
    """
    Load a YAML config file and parse it into a validated LabConfig object.

    Args:
        input_path (str): Path to the config file.

    Returns:
        LabConfig: Validated configuration.

    Raises:
        FileNotFoundError: If the file does not exist.
        ValueError: If the file is malformed, improperly encoded, or fails schema validation.
    """
    path = Path(input_path).resolve()

    if not path.exists():
        raise FileNotFoundError(f"Config file not found at: {path}")

    try:
        with path.open("r", encoding="utf-8") as f:
            raw = yaml.safe_load(f)
    except (UnicodeDecodeError, yaml.YAMLError) as e:
        raise ValueError(f"Failed to read config file due to encoding or YAML error: {e}") from e

    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ValueError(f"Invalid config format: expected a dictionary, got {type(raw).__name__}")

    try:
        config = LabConfig.model_validate(raw)
    except ValidationError as e:
        raise ValueError(f"Config does not conform to expected schema: {e}") from e

    # relative initial-data paths are resolved against the config file
    profile = config.initial.profile
    if profile.path and not Path(profile.path).is_absolute():
        resolved = str((path.parent / profile.path).resolve())
        initial = config.initial.model_copy(update={"profile": profile.model_copy(update={"path": resolved})})
        config = config.model_copy(update={"initial": initial})
    return config


def config_dict(config: LabConfig) -> Dict[str, Any]:
    data: Dict[str, Any] = config.model_dump(mode="json")
    return data


def dump_config(config: LabConfig) -> str:
    """Serialize ``config`` to YAML; loading the result gives an equal config."""
    dumped: str = yaml.safe_dump(config_dict(config), sort_keys=False, allow_unicode=True)
    return dumped


def config_hash(config: LabConfig) -> str:
    """SHA-256 of the canonical JSON form of ``config``."""
    canonical = json.dumps(config_dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
