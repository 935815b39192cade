# /src/skyrme_lab/core/enums.py

"""
Enum definitions for constrained configuration fields.
These ensure config values are limited to valid options (e.g., potential choices, profile families).
"""

from enum import Enum


class Potential(str, Enum):
    none = "none"
    v1 = "v1"  # lambda^2 (1 - cos u)
    v2 = "v2"  # lambda^2 (1 - cos u)^2


class ProfileFamily(str, Enum):
    arctan = "arctan"
    bump = "bump"
    zero = "zero"
    from_file = "from_file"


class VelocityFamily(str, Enum):
    zero = "zero"
    arctan = "arctan"
    bump = "bump"


class RunStatus(str, Enum):
    completed = "completed"
    blowup_suspected = "blowup_suspected"
    non_finite = "non_finite"


class PresetName(str, Enum):
    energy = "energy"
    momentum = "momentum"
    dilation_t = "dilation_t"
    radial_r = "radial_r"
    sine = "sine"

