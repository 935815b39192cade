# src/skyrme_lab/core/models.py

"""
Models module: Defines the pydantic models that make up a lab configuration.
A configuration describes one reproducible experiment: the radial grid, the physical
parameters, the time stepping controls, the initial data, the monitoring cones,
the requested outputs and the thresholds used by the verification commands.
"""

from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from skyrme_lab.core.enums import Potential, PresetName, ProfileFamily, VelocityFamily


class _Frozen(BaseModel):  # type: ignore[misc]
    model_config = ConfigDict(frozen=True, extra="forbid")


class Params(_Frozen):
    """Physical constants: Skyrme length alpha and the optional potential."""

    alpha: float = Field(1.0, gt=0)
    potential: Potential = Potential.none
    lambda_pot: float = Field(0.0, ge=0)

    @property
    def effective_lambda(self) -> float:
        # lambda_pot is ignored when no potential is selected
        return 0.0 if self.potential is Potential.none else self.lambda_pot


class GridConfig(_Frozen):
    R: float = Field(1.0, gt=0)
    N: int = Field(256, ge=8)


class RunConfig(_Frozen):
    t_end: float = Field(0.5, gt=0)
    cfl: float = Field(0.5, gt=0, le=1)
    observe_every: int = Field(1, ge=1)
    blowup_grad_threshold: float = Field(1.0e6, gt=0)
    blowup_value_threshold: float = Field(1.0e3, gt=0)


class ProfileSpec(_Frozen):
    family: ProfileFamily = ProfileFamily.arctan
    amplitude: float = 1.0
    scale: float = Field(0.5, gt=0)
    path: Optional[str] = None

    @model_validator(mode="after")
    def _require_path_for_files(self) -> "ProfileSpec":
        if self.family is ProfileFamily.from_file and not self.path:
            raise ValueError("profile family 'from_file' requires 'path'")
        return self


class VelocitySpec(_Frozen):
    family: VelocityFamily = VelocityFamily.zero
    amplitude: float = 0.0
    scale: float = Field(0.5, gt=0)


class InitialDataSpec(_Frozen):
    profile: ProfileSpec = ProfileSpec()
    velocity: VelocitySpec = VelocitySpec()


class ConeSpec(_Frozen):
    """Backward monitoring cone with apex (t_apex, 0) and annulus fraction lambda_frac."""

    t_apex: float = Field(..., gt=0)
    lambda_frac: float = Field(0.5, gt=0, lt=1)


class OutputConfig(_Frozen):
    directory: str = "out"
    write_csv: bool = True
    write_json: bool = True

    @model_validator(mode="after")
    def _at_least_one_output(self) -> "OutputConfig":
        if not (self.write_csv or self.write_json):
            raise ValueError("at least one output (write_csv or write_json) must be enabled")
        return self


class ChecksConfig(_Frozen):
    energy_drift_tolerance: float = Field(1.0e-5, gt=0)
    monotone_tolerance: float = Field(1.0e-3, ge=0)
    domain_margin: float = Field(0.05, ge=0, lt=1)
    oracle_threshold: float = Field(1.0e-10, gt=0)
    oracle_samples: int = Field(10_000, ge=1)
    oracle_alphas: List[float] = [0.5, 1.0, 2.0]
    random_multipliers: int = Field(64, ge=0)
    presets: List[PresetName] = list(PresetName)
    discrete_presets: List[PresetName] = [PresetName.dilation_t, PresetName.radial_r, PresetName.sine]
    resolutions: List[int] = [256, 512, 1024]
    order_floor: float = 1.7
    order_ceiling: float = 2.3
    d_bound_samples: int = Field(1_000_000, ge=1)
    seed: int = 20100
    reversal_time: Optional[float] = None

    @field_validator("presets")
    @classmethod
    def _non_empty_presets(cls, value: List[PresetName]) -> List[PresetName]:
        if not value:
            raise ValueError("preset list must not be empty")
        return value

    @field_validator("oracle_alphas")
    @classmethod
    def _positive_alphas(cls, value: List[float]) -> List[float]:
        if not value or any(a <= 0 for a in value):
            raise ValueError("oracle_alphas must be a non-empty list of positive numbers")
        return value

    @field_validator("resolutions")
    @classmethod
    def _valid_resolutions(cls, value: List[int]) -> List[int]:
        if any(n < 8 for n in value):
            raise ValueError("every resolution must be at least 8 cells")
        if sorted(value) != value:
            raise ValueError("resolutions must be given in increasing order")
        return value


class LabConfig(_Frozen):
    grid: GridConfig = GridConfig()
    params: Params = Params()
    run: RunConfig = RunConfig()
    initial: InitialDataSpec = InitialDataSpec()
    cones: List[ConeSpec] = []
    output: OutputConfig = OutputConfig()
    checks: ChecksConfig = ChecksConfig()

    @model_validator(mode="after")
    def _cones_inside_grid(self) -> "LabConfig":
        for cone in self.cones:
            if cone.t_apex > self.grid.R:
                raise ValueError(
                    f"cone apex t_apex={cone.t_apex} puts the cone base outside the grid (R={self.grid.R})"
                )
        return self
